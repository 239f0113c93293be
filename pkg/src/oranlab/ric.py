"""Near-real-time RAN Intelligent Controller.

Terminates E2-lite connections from any number of agents, fans xApp
subscriptions out to matching agents, routes indications to the owning
xApp exactly once in per-subscription FIFO order, and classifies every
control action against the near-real-time window (10 ms to 1 s).

xApps run in-process behind a narrow handler contract: they receive an
indication context and return zero or more action intents; the RIC owns
control-message plumbing, timestamps and timing enforcement.
"""

from __future__ import annotations

import fnmatch
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

import numpy as np
import yaml

from .errors import OranLabError, ValidationError
from .metrics import MetricLayer, MetricSample
from . import e2lite
from .e2lite import codec
from .e2lite.messages import (
    ControlRequest,
    Disconnect,
    E2Message,
    Indication,
    Setup,
    SubscriptionRequest,
    SubscriptionSpec,
)
from .e2lite.statemachine import E2ConnectionState, Phase, Side, handle, record_outbound
from .e2lite.transport import E2TcpListener, TcpPeer
from .ransim import RanAgent, stable_seed

NEAR_RT_LOW_MS = 10
NEAR_RT_HIGH_MS = 1000


class RicError(OranLabError):
    pass


@dataclass(frozen=True)
class TimingClass:
    """The near-real-time control window, inclusive on both ends."""

    near_rt_low_ms: int = NEAR_RT_LOW_MS
    near_rt_high_ms: int = NEAR_RT_HIGH_MS


class TimingVerdict(Enum):
    WITHIN_WINDOW = "WithinWindow"
    SUB_WINDOW = "SubWindow"
    VIOLATION = "Violation"


@dataclass(frozen=True)
class ControlAction:
    ctrl_id: int
    target_agent: str
    target_cell: str
    payload: bytes
    trigger_ts: int  # virtual ms of the indication that caused it
    issued_ts: int  # virtual ms the RIC issued the request

    def __post_init__(self):
        if self.issued_ts < self.trigger_ts:
            raise ValidationError(
                f"issued_ts {self.issued_ts} before trigger_ts {self.trigger_ts}"
            )

    @property
    def latency_ms(self) -> int:
        return self.issued_ts - self.trigger_ts


def enforce_timing(action: ControlAction, tc: TimingClass = TimingClass()) -> TimingVerdict:
    """Classify an action's trigger-to-issue latency against the window.

    Sub-window actions are permitted (the lower bound describes the RIC's
    operating timescale, not a prohibition) and merely logged; violations
    are counted but the action is still forwarded.
    """
    latency = action.latency_ms
    if latency > tc.near_rt_high_ms:
        return TimingVerdict.VIOLATION
    if latency < tc.near_rt_low_ms:
        return TimingVerdict.SUB_WINDOW
    return TimingVerdict.WITHIN_WINDOW


# -- xApp contract -----------------------------------------------------


@dataclass(frozen=True)
class ActionIntent:
    """What an xApp wants done; the RIC turns it into a ControlRequest."""

    target_cell: str
    payload: bytes = b""


@dataclass(frozen=True)
class IndicationContext:
    agent_id: str
    sub_id: int
    seq: int
    samples: tuple[MetricSample, ...]
    now: int


class XAppHandler(Protocol):
    def on_indication(self, ctx: IndicationContext) -> list[ActionIntent]: ...


@dataclass(frozen=True)
class XAppDescriptor:
    xapp_id: str
    subscriptions: tuple[tuple[str, SubscriptionSpec], ...]  # (agent selector, spec)
    handler: object  # XAppHandler

    def __post_init__(self):
        if not self.subscriptions:
            raise ValidationError(f"xapp {self.xapp_id}: at least one subscription required")


def selector_matches(selector: str, agent_id: str) -> bool:
    return selector == "all" or fnmatch.fnmatchcase(agent_id, selector)


# -- built-in xApps ----------------------------------------------------


class LatencyMonitorXapp:
    """Keeps per-layer latency time series and a rolling mean for charting."""

    def __init__(self, window: int = 50):
        self.window = window
        self.series: dict[MetricLayer, list[MetricSample]] = {l: [] for l in MetricLayer}
        self.rolling_mean: dict[MetricLayer, list[float]] = {l: [] for l in MetricLayer}

    def on_indication(self, ctx: IndicationContext) -> list[ActionIntent]:
        for s in ctx.samples:
            series = self.series[s.layer]
            series.append(s)
            tail = series[-self.window:]
            self.rolling_mean[s.layer].append(sum(x.latency_ms for x in tail) / len(tail))
        return []

    def layer_series(self, layer: MetricLayer) -> list[MetricSample]:
        return self.series[layer]


class ThresholdControlXapp:
    """Fires one control action per cooldown when the rolling-mean MAC
    latency over the last N samples exceeds the threshold."""

    def __init__(self, window: int = 20, threshold_ms: float = 8.0, cooldown_ms: int = 200):
        self.window = window
        self.threshold_ms = threshold_ms
        self.cooldown_ms = cooldown_ms
        self._recent: dict[str, deque] = {}
        self._last_fire: dict[str, int] = {}

    def on_indication(self, ctx: IndicationContext) -> list[ActionIntent]:
        intents = []
        for s in ctx.samples:
            if s.layer is not MetricLayer.MAC:
                continue
            window = self._recent.setdefault(s.cell_id, deque(maxlen=self.window))
            window.append(s.latency_ms)
            if len(window) < self.window:
                continue
            mean = sum(window) / len(window)
            if mean <= self.threshold_ms:
                continue
            last = self._last_fire.get(s.cell_id)
            if last is not None and ctx.now - last < self.cooldown_ms:
                continue
            self._last_fire[s.cell_id] = ctx.now
            payload = f"reduce-load mean={mean:.3f}ms thr={self.threshold_ms:g}ms".encode()
            intents.append(ActionIntent(s.cell_id, payload))
        return intents


BUILTIN_XAPP_KINDS = ("latency_monitor", "threshold_control")


def build_xapp(decl: dict) -> XAppDescriptor:
    """Construct a built-in xApp from a config declaration."""
    kind = decl.get("kind")
    xapp_id = decl.get("xapp_id")
    if not xapp_id:
        raise ValidationError("xapp declaration missing xapp_id")
    selector = decl.get("selector", "all")
    layers = frozenset(MetricLayer.from_name(n) for n in decl.get("metric_set", []))
    period = int(decl.get("report_period_ms", 100))
    if kind == "latency_monitor":
        handler = LatencyMonitorXapp(window=int(decl.get("window", 50)))
        spec = SubscriptionSpec(period, layers or frozenset(MetricLayer))
    elif kind == "threshold_control":
        handler = ThresholdControlXapp(
            window=int(decl.get("window", 20)),
            threshold_ms=float(decl.get("threshold_ms", 8.0)),
            cooldown_ms=int(decl.get("cooldown_ms", 200)),
        )
        spec = SubscriptionSpec(period, layers or frozenset({MetricLayer.MAC}))
    else:
        raise ValidationError(f"unknown xapp kind {kind!r} (known: {BUILTIN_XAPP_KINDS})")
    return XAppDescriptor(xapp_id, ((selector, spec),), handler)


def load_xapp_registry(path: Path) -> list[XAppDescriptor]:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    return [build_xapp(decl) for decl in doc.get("xapps", [])]


# -- the RIC -----------------------------------------------------------


class _Connection:
    def __init__(self, conn_id: int, send_msg: Callable[[E2Message], None]):
        self.conn_id = conn_id
        self.state = E2ConnectionState(local_id="")
        self.send_msg = send_msg
        self.agent_id: Optional[str] = None
        self.frames = codec.FrameBuffer()


@dataclass
class _Registration:
    descriptor: XAppDescriptor
    sub_keys: set = field(default_factory=set)  # {(conn_id, sub_id)}
    lock: threading.Lock = field(default_factory=threading.Lock)


class Ric:
    """One near-RT-RIC instance serving any number of agent connections."""

    def __init__(
        self,
        ric_id: str,
        clock,
        seed: int = 0,
        routing_delay_ms: tuple[int, int] = (10, 60),
        timing: TimingClass = TimingClass(),
    ):
        self.ric_id = ric_id
        self.clock = clock
        self.timing = timing
        self.routing_delay_ms = routing_delay_ms
        self._delay_rng = np.random.default_rng(stable_seed(seed, "routing", ric_id))
        self._lock = threading.RLock()
        self._conns: dict[int, _Connection] = {}
        self._conn_counter = 0
        self._sub_counter = 0
        self._ctrl_counter = 0
        self._xapps: dict[str, _Registration] = {}
        self._sub_owner: dict[tuple[int, int], str] = {}  # (conn_id, sub_id) -> xapp_id
        self.invocation_log: list[dict] = []
        self.action_log: list[dict] = []
        self.violation_count = 0
        self.sub_window_count = 0
        self.unknown_sub_count = 0
        self.indication_error_count = 0
        self._route_listeners: list[Callable[[dict], None]] = []
        self._listener: Optional[E2TcpListener] = None

    # -- connection plumbing -------------------------------------------

    def _new_connection(self, send_msg: Callable[[E2Message], None]) -> _Connection:
        with self._lock:
            self._conn_counter += 1
            conn = _Connection(self._conn_counter, send_msg)
            conn.state = E2ConnectionState(local_id=self.ric_id)
            self._conns[conn.conn_id] = conn
            return conn

    def connect_local(self, agent: RanAgent) -> int:
        """Wire an in-process agent through the byte-level codec."""
        conn = self._new_connection(lambda msg: agent.receive_bytes(codec.encode(msg)))
        agent.wire_connect(lambda data: self.receive_bytes(conn.conn_id, data))
        return conn.conn_id

    def receive_bytes(self, conn_id: int, data: bytes):
        with self._lock:
            conn = self._conns[conn_id]
            msgs = conn.frames.feed(data)
        for msg in msgs:
            self.on_message(conn_id, msg)

    def on_message(self, conn_id: int, msg: E2Message):
        with self._lock:
            conn = self._conns.get(conn_id)
            if conn is None:
                return
            before_phase = conn.state.phase
            conn.state, outgoing = handle(conn.state, Side.RIC, msg)
            for out in outgoing:
                conn.send_msg(out)
            if isinstance(msg, Setup) and conn.state.phase is Phase.ESTABLISHED:
                conn.agent_id = msg.agent_id
                self._issue_pending_subscriptions(conn)
            elif isinstance(msg, Indication) and not outgoing:
                self._route_indication(conn, msg)
            elif isinstance(msg, Indication) and outgoing:
                self.indication_error_count += 1

    def disconnect_agent(self, conn_id: int, reason: int = e2lite.messages.REASON_SHUTDOWN):
        with self._lock:
            conn = self._conns.get(conn_id)
            if conn is None or conn.state.phase is Phase.CLOSED:
                return
            conn.send_msg(Disconnect(reason))
            conn.state = record_outbound(conn.state, Side.RIC, Disconnect(reason))

    def established_agents(self) -> list[str]:
        with self._lock:
            return sorted(
                c.agent_id for c in self._conns.values()
                if c.agent_id and c.state.phase is Phase.ESTABLISHED
            )

    # -- xApp registration ----------------------------------------------

    def register_xapp(self, desc: XAppDescriptor) -> dict:
        """Register an xApp and issue its subscriptions to matching
        Established agents; agents that connect later are subscribed at
        setup time."""
        with self._lock:
            if desc.xapp_id in self._xapps:
                raise RicError(f"duplicate xapp_id {desc.xapp_id!r}")
            reg = _Registration(desc)
            self._xapps[desc.xapp_id] = reg
            issued = 0
            for conn in self._conns.values():
                if conn.state.phase is Phase.ESTABLISHED and conn.agent_id:
                    issued += self._issue_for_xapp(conn, reg)
            return {"xapp_id": desc.xapp_id, "subscriptions_issued": issued}

    def _issue_for_xapp(self, conn: _Connection, reg: _Registration) -> int:
        issued = 0
        for selector, spec in reg.descriptor.subscriptions:
            if not selector_matches(selector, conn.agent_id or ""):
                continue
            # tailor the request to the agent's declared metric sets; the
            # wire rule stays strict (accepted iff subset of declared)
            declared = {MetricLayer(v) for v in conn.state.ran_functions
                        if v in MetricLayer._value2member_map_}
            layers = frozenset(spec.metric_set) & declared
            if not layers:
                continue
            if layers != spec.metric_set:
                spec = SubscriptionSpec(spec.report_period_ms, layers, spec.cell_filter)
            self._sub_counter += 1
            sub_id = self._sub_counter
            req = SubscriptionRequest(sub_id, spec)
            conn.state = record_outbound(conn.state, Side.RIC, req)
            self._sub_owner[(conn.conn_id, sub_id)] = reg.descriptor.xapp_id
            reg.sub_keys.add((conn.conn_id, sub_id))
            conn.send_msg(req)
            issued += 1
        return issued

    def _issue_pending_subscriptions(self, conn: _Connection):
        for reg in self._xapps.values():
            self._issue_for_xapp(conn, reg)

    def xapp(self, xapp_id: str) -> XAppDescriptor:
        reg = self._xapps.get(xapp_id)
        if reg is None:
            raise RicError(f"unknown xapp {xapp_id!r}")
        return reg.descriptor

    def list_xapps(self) -> list[XAppDescriptor]:
        with self._lock:
            return [r.descriptor for r in self._xapps.values()]

    # -- indication routing ----------------------------------------------

    def add_route_listener(self, fn: Callable[[dict], None]):
        self._route_listeners.append(fn)

    def _route_indication(self, conn: _Connection, ind: Indication):
        owner = self._sub_owner.get((conn.conn_id, ind.sub_id))
        if owner is None:
            # subscription not issued by any xApp: protocol-level state
            # accepted it, but nobody owns it; count and drop
            self.unknown_sub_count += 1
            return
        reg = self._xapps[owner]
        ctx = IndicationContext(
            agent_id=conn.agent_id or "?",
            sub_id=ind.sub_id,
            seq=ind.seq,
            samples=ind.samples,
            now=self.clock.now,
        )
        with reg.lock:  # per-xApp FIFO
            intents = reg.descriptor.handler.on_indication(ctx) or []
        record = {
            "xapp_id": owner,
            "agent_id": ctx.agent_id,
            "conn_id": conn.conn_id,
            "sub_id": ind.sub_id,
            "seq": ind.seq,
            "n_samples": len(ind.samples),
            "t": ctx.now,
        }
        self.invocation_log.append(record)
        for listener in self._route_listeners:
            listener({**record, "samples": ind.samples})
        for intent in intents:
            self._issue_control(conn, owner, intent, trigger_ts=ctx.now)

    def _issue_control(self, conn: _Connection, xapp_id: str, intent: ActionIntent, trigger_ts: int):
        self._ctrl_counter += 1
        delay = int(self._delay_rng.integers(self.routing_delay_ms[0], self.routing_delay_ms[1] + 1))
        action = ControlAction(
            ctrl_id=self._ctrl_counter,
            target_agent=conn.agent_id or "?",
            target_cell=intent.target_cell,
            payload=intent.payload,
            trigger_ts=trigger_ts,
            issued_ts=trigger_ts + delay,
        )
        verdict = enforce_timing(action, self.timing)
        if verdict is TimingVerdict.VIOLATION:
            self.violation_count += 1
        elif verdict is TimingVerdict.SUB_WINDOW:
            self.sub_window_count += 1
        self.action_log.append(
            {
                "ctrl_id": action.ctrl_id,
                "xapp_id": xapp_id,
                "target_agent": action.target_agent,
                "target_cell": action.target_cell,
                "trigger_ts": action.trigger_ts,
                "issued_ts": action.issued_ts,
                "latency_ms": action.latency_ms,
                "verdict": verdict.value,
            }
        )
        # violations are forwarded anyway: operators need to see late actions
        conn.send_msg(ControlRequest(action.ctrl_id, action.target_cell, action.payload))

    # -- TCP listener (BYOD) ----------------------------------------------

    def open_listener(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        ric = self

        def on_connect(peer: TcpPeer):
            conn = ric._new_connection(peer.send)

            class Sink:
                def on_message(self, msg):
                    ric.on_message(conn.conn_id, msg)

                def on_close(self):
                    with ric._lock:
                        if conn.state.phase is not Phase.CLOSED:
                            conn.state, _ = handle(conn.state, Side.RIC, Disconnect())

            return Sink()

        self._listener = E2TcpListener(host, port, on_connect)
        self._listener.start()
        return self._listener.address

    def close_listener(self):
        if self._listener is not None:
            self._listener.stop()
            self._listener = None

    # -- views -------------------------------------------------------------

    def timing_summary(self) -> dict:
        return {
            "actions": len(self.action_log),
            "within_window": sum(1 for a in self.action_log if a["verdict"] == "WithinWindow"),
            "sub_window": self.sub_window_count,
            "violations": self.violation_count,
        }
