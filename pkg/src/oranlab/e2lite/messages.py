"""E2-lite message types.

A tagged union of dataclasses covering the setup / subscription /
indication / control flows between RAN agents and the near-RT-RIC.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..metrics import MetricLayer, MetricSample

MAX_PAYLOAD = 65535

# Disconnect reason codes
REASON_NORMAL = 0
REASON_LEASE_ENDED = 1
REASON_ERROR = 2
REASON_SHUTDOWN = 3

# ProtocolError codes
ERR_OUT_OF_PHASE = 1
ERR_UNKNOWN_SUB = 2
ERR_NON_MONOTONIC_SEQ = 3
ERR_DUPLICATE_SUB = 4
ERR_UNSUPPORTED_METRICS = 5


@dataclass(frozen=True)
class SubscriptionSpec:
    report_period_ms: int
    metric_set: frozenset[MetricLayer]
    cell_filter: Optional[str] = None

    def __post_init__(self):
        if self.report_period_ms < 1:
            raise ValueError(f"report_period must be >= 1 ms, got {self.report_period_ms}")
        if not self.metric_set:
            raise ValueError("metric_set must be non-empty")

    def matches(self, sample: MetricSample) -> bool:
        if sample.layer not in self.metric_set:
            return False
        return self.cell_filter is None or sample.cell_id == self.cell_filter


@dataclass(frozen=True)
class Setup:
    agent_id: str
    ran_functions: tuple[int, ...]  # declared metric-set ids


@dataclass(frozen=True)
class SetupAck:
    ric_id: str


@dataclass(frozen=True)
class SubscriptionRequest:
    sub_id: int
    spec: SubscriptionSpec


@dataclass(frozen=True)
class SubscriptionResponse:
    sub_id: int
    accepted: bool
    reason: str = ""


@dataclass(frozen=True)
class Indication:
    sub_id: int
    seq: int
    samples: tuple[MetricSample, ...]


@dataclass(frozen=True)
class ControlRequest:
    ctrl_id: int
    target_cell: str
    payload: bytes


@dataclass(frozen=True)
class ControlAck:
    ctrl_id: int
    outcome: int  # 0 = success, 1 = failure


@dataclass(frozen=True)
class Disconnect:
    reason: int = REASON_NORMAL


@dataclass(frozen=True)
class ProtocolError:
    code: int
    detail: str = ""


E2Message = Union[
    Setup,
    SetupAck,
    SubscriptionRequest,
    SubscriptionResponse,
    Indication,
    ControlRequest,
    ControlAck,
    Disconnect,
    ProtocolError,
]

MESSAGE_TYPES = (
    Setup,
    SetupAck,
    SubscriptionRequest,
    SubscriptionResponse,
    Indication,
    ControlRequest,
    ControlAck,
    Disconnect,
    ProtocolError,
)


def message_kind(msg: E2Message) -> str:
    return type(msg).__name__


def to_jsonable(msg: E2Message) -> dict:
    """Stable JSON-friendly view of a message (conformance vectors, API)."""
    kind = message_kind(msg)
    if isinstance(msg, Setup):
        body = {"agent_id": msg.agent_id, "ran_functions": list(msg.ran_functions)}
    elif isinstance(msg, SetupAck):
        body = {"ric_id": msg.ric_id}
    elif isinstance(msg, SubscriptionRequest):
        body = {
            "sub_id": msg.sub_id,
            "report_period_ms": msg.spec.report_period_ms,
            "metric_set": sorted(l.name for l in msg.spec.metric_set),
            "cell_filter": msg.spec.cell_filter,
        }
    elif isinstance(msg, SubscriptionResponse):
        body = {"sub_id": msg.sub_id, "accepted": msg.accepted, "reason": msg.reason}
    elif isinstance(msg, Indication):
        body = {
            "sub_id": msg.sub_id,
            "seq": msg.seq,
            "samples": [
                {"t": s.t, "layer": s.layer.name, "latency_ms": s.latency_ms,
                 "ue_id": s.ue_id, "cell_id": s.cell_id}
                for s in msg.samples
            ],
        }
    elif isinstance(msg, ControlRequest):
        body = {"ctrl_id": msg.ctrl_id, "target_cell": msg.target_cell, "payload_hex": msg.payload.hex()}
    elif isinstance(msg, ControlAck):
        body = {"ctrl_id": msg.ctrl_id, "outcome": msg.outcome}
    elif isinstance(msg, Disconnect):
        body = {"reason": msg.reason}
    elif isinstance(msg, ProtocolError):
        body = {"code": msg.code, "detail": msg.detail}
    else:  # pragma: no cover
        raise TypeError(f"not an E2Message: {msg!r}")
    return {"kind": kind, **body}
