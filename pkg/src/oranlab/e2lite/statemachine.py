"""Per-connection E2-lite state machine.

`handle` is the pure transition function for inbound messages; it never
performs I/O and never moves the connection phase backward. The caller
owns delivery of accepted indications and transmission of the returned
outgoing messages. `record_outbound` tracks the few locally-sent
messages that change connection state (Setup, SubscriptionRequest,
Indication seq bookkeeping, Disconnect).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .messages import (
    ERR_NON_MONOTONIC_SEQ,
    ERR_OUT_OF_PHASE,
    ERR_UNKNOWN_SUB,
    ControlAck,
    ControlRequest,
    Disconnect,
    E2Message,
    Indication,
    ProtocolError,
    Setup,
    SetupAck,
    SubscriptionRequest,
    SubscriptionResponse,
    SubscriptionSpec,
)


class Phase(Enum):
    IDLE = 0
    SETUP_PENDING = 1
    ESTABLISHED = 2
    CLOSED = 3


class Side(Enum):
    AGENT = "agent"
    RIC = "ric"


@dataclass(frozen=True)
class SubState:
    spec: SubscriptionSpec
    last_seq: int = 0


@dataclass(frozen=True)
class E2ConnectionState:
    local_id: str  # ric_id on the RIC side, agent_id on the agent side
    phase: Phase = Phase.IDLE
    ran_functions: frozenset[int] = frozenset()  # agent's declared metric-set ids
    subscriptions: dict[int, SubState] = field(default_factory=dict)
    pending_subs: dict[int, SubscriptionSpec] = field(default_factory=dict)
    error_count: int = 0

    def last_seq(self, sub_id: int) -> Optional[int]:
        sub = self.subscriptions.get(sub_id)
        return sub.last_seq if sub else None


def _bump_error(state: E2ConnectionState) -> E2ConnectionState:
    return replace(state, error_count=state.error_count + 1)


def _out_of_phase(state: E2ConnectionState, msg: E2Message):
    err = ProtocolError(ERR_OUT_OF_PHASE, f"unexpected {type(msg).__name__} in {state.phase.name}")
    return _bump_error(state), [err]


def _close(state: E2ConnectionState) -> E2ConnectionState:
    # subscriptions do not survive the connection
    return replace(state, phase=Phase.CLOSED, subscriptions={}, pending_subs={})


def _handle_subscription_request(
    state: E2ConnectionState, msg: SubscriptionRequest
) -> tuple[E2ConnectionState, list[E2Message]]:
    if msg.sub_id in state.subscriptions or msg.sub_id in state.pending_subs:
        return state, [SubscriptionResponse(msg.sub_id, False, "duplicate sub_id")]
    wanted = {layer.value for layer in msg.spec.metric_set}
    if not wanted <= set(state.ran_functions):
        missing = sorted(wanted - set(state.ran_functions))
        return state, [
            SubscriptionResponse(msg.sub_id, False, f"metric ids {missing} not declared by agent")
        ]
    subs = dict(state.subscriptions)
    subs[msg.sub_id] = SubState(msg.spec, last_seq=0)
    return replace(state, subscriptions=subs), [SubscriptionResponse(msg.sub_id, True, "")]


def handle(
    state: E2ConnectionState, side: Side, msg: E2Message
) -> tuple[E2ConnectionState, list[E2Message]]:
    """Process one inbound message; returns (new state, outgoing messages)."""
    if state.phase is Phase.CLOSED:
        return state, []  # dead connection: ignore everything
    if isinstance(msg, Disconnect):
        return _close(state), []
    if isinstance(msg, ProtocolError):
        # peer complaint: count it, never reply (avoids error ping-pong)
        return _bump_error(state), []

    if side is Side.RIC:
        if state.phase is Phase.IDLE:
            if isinstance(msg, Setup):
                new = replace(
                    state,
                    phase=Phase.ESTABLISHED,
                    ran_functions=frozenset(msg.ran_functions),
                )
                return new, [SetupAck(state.local_id)]
            return _out_of_phase(state, msg)
        if state.phase is Phase.ESTABLISHED:
            if isinstance(msg, SubscriptionRequest):
                return _handle_subscription_request(state, msg)
            if isinstance(msg, SubscriptionResponse):
                if msg.sub_id in state.pending_subs:
                    pending = dict(state.pending_subs)
                    spec = pending.pop(msg.sub_id)
                    subs = dict(state.subscriptions)
                    if msg.accepted:
                        subs[msg.sub_id] = SubState(spec, last_seq=0)
                    return replace(state, subscriptions=subs, pending_subs=pending), []
                return _bump_error(state), [
                    ProtocolError(ERR_UNKNOWN_SUB, f"response for unknown sub {msg.sub_id}")
                ]
            if isinstance(msg, Indication):
                sub = state.subscriptions.get(msg.sub_id)
                if sub is None:
                    return _bump_error(state), [
                        ProtocolError(ERR_UNKNOWN_SUB, f"indication for unknown sub {msg.sub_id}")
                    ]
                if msg.seq <= sub.last_seq:
                    return _bump_error(state), [
                        ProtocolError(
                            ERR_NON_MONOTONIC_SEQ,
                            f"sub {msg.sub_id}: seq {msg.seq} <= last {sub.last_seq}",
                        )
                    ]
                subs = dict(state.subscriptions)
                subs[msg.sub_id] = SubState(sub.spec, msg.seq)
                return replace(state, subscriptions=subs), []
            if isinstance(msg, ControlAck):
                return state, []  # outcome is observed by the caller
            return _out_of_phase(state, msg)
        return _out_of_phase(state, msg)  # SETUP_PENDING is never entered ric-side

    # agent side
    if state.phase is Phase.SETUP_PENDING:
        if isinstance(msg, SetupAck):
            return replace(state, phase=Phase.ESTABLISHED), []
        return _out_of_phase(state, msg)
    if state.phase is Phase.ESTABLISHED:
        if isinstance(msg, SubscriptionRequest):
            return _handle_subscription_request(state, msg)
        if isinstance(msg, ControlRequest):
            return state, [ControlAck(msg.ctrl_id, 0)]
        return _out_of_phase(state, msg)
    return _out_of_phase(state, msg)  # IDLE agent expects nothing inbound


def record_outbound(state: E2ConnectionState, side: Side, msg: E2Message) -> E2ConnectionState:
    """Update connection state for a locally-sent message."""
    if state.phase is Phase.CLOSED:
        raise ValueError("cannot send on a closed connection")
    if isinstance(msg, Disconnect):
        return _close(state)
    if side is Side.AGENT and isinstance(msg, Setup):
        if state.phase is not Phase.IDLE:
            raise ValueError(f"Setup may only be sent from IDLE, not {state.phase.name}")
        return replace(
            state, phase=Phase.SETUP_PENDING, ran_functions=frozenset(msg.ran_functions)
        )
    if side is Side.RIC and isinstance(msg, SubscriptionRequest):
        if msg.sub_id in state.pending_subs or msg.sub_id in state.subscriptions:
            raise ValueError(f"sub_id {msg.sub_id} already used on this connection")
        pending = dict(state.pending_subs)
        pending[msg.sub_id] = msg.spec
        return replace(state, pending_subs=pending)
    if side is Side.AGENT and isinstance(msg, Indication):
        sub = state.subscriptions.get(msg.sub_id)
        if sub is None:
            raise ValueError(f"indication for inactive sub {msg.sub_id}")
        if msg.seq <= sub.last_seq:
            raise ValueError(f"non-monotonic outbound seq {msg.seq} for sub {msg.sub_id}")
        subs = dict(state.subscriptions)
        subs[msg.sub_id] = SubState(sub.spec, msg.seq)
        return replace(state, subscriptions=subs)
    return state
