"""Simulated disaggregated RAN on a virtual clock.

Each agent binds to one BaseStation node, carries CU/DU/RU role markers,
attaches in-range UEs and generates per-layer latency samples from a
seeded log-normal model: latency = median(layer) * exp(jitter * z) with
z standard normal, so the distribution median equals the configured
median exactly. Samples are bucketed per subscription into E2-lite
indications with gapless, strictly increasing sequence numbers.

Everything is a pure function of (inventory, link model, seed, command
sequence): agents advance under a coordinator in agent_id order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import OranLabError, ValidationError
from .inventory import Inventory, NodeRecord, NodeRole, list_nodes, node_distance_m
from .linkmodel import LinkModel, in_range
from .metrics import MetricLayer, MetricSample
from . import e2lite
from .e2lite import codec
from .e2lite.statemachine import E2ConnectionState, Phase, Side, handle, record_outbound

ALL_LAYERS = (MetricLayer.RLC, MetricLayer.PDCP, MetricLayer.MAC)


class RanSimError(OranLabError):
    pass


def stable_seed(*parts) -> list[int]:
    """Platform-independent integer seed sequence from mixed parts."""
    out = []
    for part in parts:
        if isinstance(part, int):
            out.append(part & 0xFFFFFFFF)
        else:
            digest = hashlib.sha256(str(part).encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:4], "big"))
    return out


class VirtualClock:
    """Monotone virtual-millisecond counter shared by one simulation."""

    def __init__(self, start_ms: int = 0):
        self._now = int(start_ms)

    @property
    def now(self) -> int:
        return self._now

    def advance(self, dt_ms: int) -> int:
        if dt_ms < 0:
            raise RanSimError(f"clock cannot move backward (dt={dt_ms})")
        self._now += int(dt_ms)
        return self._now


@dataclass
class AttachResult:
    ok: bool
    ue_id: str
    distance_m: float
    threshold_m: float
    at_ms: int
    already_attached: bool = False
    detail: str = ""


@dataclass
class _BucketState:
    spec: e2lite.SubscriptionSpec
    open_buckets: dict[int, list[MetricSample]] = field(default_factory=dict)
    delivered: int = 0


class RanAgent:
    """One E2-visible RAN entity bound to a BaseStation node."""

    def __init__(
        self,
        agent_id: str,
        bs_node: NodeRecord,
        lm: LinkModel,
        seed: int,
        layers: Iterable[MetricLayer] = ALL_LAYERS,
        units: frozenset[str] = frozenset({"CU", "DU", "RU"}),
        cell_id: Optional[str] = None,
    ):
        if bs_node.role is not NodeRole.BASE_STATION:
            raise ValidationError(
                f"agent {agent_id}: node {bs_node.node_id} is {bs_node.role.value}, expected BaseStation"
            )
        self.agent_id = agent_id
        self.bs_node = bs_node
        self.lm = lm
        self.units = units
        self.cell_id = cell_id or f"cell-{bs_node.node_id}"
        self.layers = tuple(sorted(layers, key=lambda l: l.value))
        self.rng = np.random.default_rng(stable_seed(seed, agent_id))
        self.attached: dict[str, NodeRecord] = {}
        # wire plumbing
        self.state = E2ConnectionState(local_id=agent_id)
        self._send_bytes: Optional[Callable[[bytes], None]] = None
        self._frames = codec.FrameBuffer()
        self._buckets: dict[int, _BucketState] = {}
        # conservation counters
        self.samples_generated = 0
        self.samples_matched = 0
        self.samples_unmatched = 0
        self.indications_sent = 0
        self.control_requests_seen = 0

    # -- wire ----------------------------------------------------------

    @property
    def established(self) -> bool:
        return self.state.phase is Phase.ESTABLISHED

    def wire_connect(self, send_bytes: Callable[[bytes], None]):
        self._send_bytes = send_bytes

    def send(self, msg: e2lite.E2Message):
        if self._send_bytes is None:
            raise RanSimError(f"agent {self.agent_id} has no wire")
        self.state = record_outbound(self.state, Side.AGENT, msg)
        self._send_bytes(codec.encode(msg))

    def receive_bytes(self, data: bytes):
        for msg in self._frames.feed(data):
            before = set(self.state.subscriptions)
            self.state, outgoing = handle(self.state, Side.AGENT, msg)
            if isinstance(msg, e2lite.ControlRequest):
                self.control_requests_seen += 1
            for sub_id in set(self.state.subscriptions) - before:
                self._buckets[sub_id] = _BucketState(self.state.subscriptions[sub_id].spec)
            for out in outgoing:
                self.send(out)

    def setup(self):
        self.send(e2lite.Setup(self.agent_id, tuple(l.value for l in self.layers)))

    def disconnect(self, reason: int = e2lite.messages.REASON_NORMAL):
        if self.state.phase is not Phase.CLOSED and self._send_bytes is not None:
            self.send(e2lite.Disconnect(reason))

    # -- attach --------------------------------------------------------

    def attach_ue(self, ue: NodeRecord, now_ms: int) -> AttachResult:
        """Attach a UE iff it is within coverage; idempotent on re-attach."""
        if not self.established:
            raise RanSimError(f"agent {self.agent_id} not Established on E2")
        if ue.node_id in self.attached:
            dist = node_distance_m(self.bs_node, ue)
            return AttachResult(True, ue.node_id, dist, self._radius_for(ue), now_ms, True)
        dist = node_distance_m(self.bs_node, ue)
        radius = self._radius_for(ue)
        if not in_range(self.bs_node, ue, self.lm):
            return AttachResult(
                False, ue.node_id, dist, radius, now_ms,
                detail=f"UE {ue.node_id} at {dist:.1f} m exceeds {radius:.1f} m threshold",
            )
        self.attached[ue.node_id] = ue
        return AttachResult(True, ue.node_id, dist, radius, now_ms)

    def _radius_for(self, ue: NodeRecord) -> float:
        both_boosted = self.bs_node.booster is not None and ue.booster is not None
        return self.lm.boosted_radius_m if both_boosted else self.lm.base_radius_m

    # -- metric generation ----------------------------------------------

    def sample_tick(self, t: int) -> list[MetricSample]:
        """One sample per attached UE per declared layer, stamped at t."""
        samples = []
        for ue_id in sorted(self.attached):
            for layer in self.layers:
                z = self.rng.standard_normal()
                latency = self.lm.median_ms[layer] * math.exp(self.lm.jitter_fraction * z)
                samples.append(MetricSample(t, layer, latency, ue_id, self.cell_id))
        self.samples_generated += len(samples)
        return samples

    # -- reporting -------------------------------------------------------

    def report(self, samples: Iterable[MetricSample], now: int) -> int:
        """Bucket samples per subscription and emit every bucket that has
        closed by `now`; returns the number of indications sent."""
        for sample in samples:
            matched = False
            for sub_id, bucket in self._buckets.items():
                if bucket.spec.matches(sample):
                    idx = sample.t // bucket.spec.report_period_ms
                    bucket.open_buckets.setdefault(idx, []).append(sample)
                    matched = True
            if matched:
                self.samples_matched += 1
            else:
                self.samples_unmatched += 1
        return self._flush(now)

    def _flush(self, now: Optional[int]) -> int:
        sent = 0
        for sub_id in sorted(self._buckets):
            bucket = self._buckets[sub_id]
            period = bucket.spec.report_period_ms
            for idx in sorted(bucket.open_buckets):
                if now is not None and (idx + 1) * period > now:
                    break
                batch = bucket.open_buckets.pop(idx)
                sent += self._emit_indication(sub_id, bucket, batch)
        return sent

    def _emit_indication(self, sub_id: int, bucket: _BucketState, batch: list[MetricSample]) -> int:
        sent = 0
        for chunk in _chunk_samples(batch):
            seq = self.state.subscriptions[sub_id].last_seq + 1
            self.send(e2lite.Indication(sub_id, seq, tuple(chunk)))
            bucket.delivered += len(chunk)
            self.indications_sent += 1
            sent += 1
        return sent

    def flush_all(self) -> int:
        """Emit every open bucket regardless of period (end of run)."""
        return self._flush(None)

    # -- accounting -------------------------------------------------------

    def conservation(self) -> dict[str, int]:
        pending = sum(
            len(batch) for b in self._buckets.values() for batch in b.open_buckets.values()
        )
        return {
            "generated": self.samples_generated,
            "matched": self.samples_matched,
            "unmatched": self.samples_unmatched,
            "pending": pending,
            "delivered_assignments": sum(b.delivered for b in self._buckets.values()),
        }


def _chunk_samples(batch: list[MetricSample], max_payload: int = codec.MAX_PAYLOAD):
    """Split a sample batch so each indication frame stays within the max
    payload (senders split oversize indications; seq preserves order)."""
    fixed = 4 + 8 + 2  # sub_id + seq + count
    chunk: list[MetricSample] = []
    size = fixed
    for s in batch:
        s_size = 8 + 2 + 8 + 2 + len(s.ue_id.encode()) + 2 + len(s.cell_id.encode())
        if chunk and size + s_size > max_payload:
            yield chunk
            chunk, size = [], fixed
        chunk.append(s)
        size += s_size
    if chunk:
        yield chunk


def step(agent: RanAgent, clock: VirtualClock, dt_ms: int) -> list[MetricSample]:
    """Advance the clock by dt and emit one sampling tick of metrics.

    Samples are stamped at the tick start so a bucket spanning [T, T+p)
    closes exactly when the clock reaches T+p.
    """
    if dt_ms <= 0:
        raise RanSimError(f"dt must be > 0, got {dt_ms}")
    t0 = clock.now
    clock.advance(dt_ms)
    return agent.sample_tick(t0)


def report(agent: RanAgent, samples: Iterable[MetricSample], now: int) -> int:
    return agent.report(samples, now)


class Coordinator:
    """Steps multiple agents deterministically in agent_id order."""

    def __init__(self, clock: VirtualClock, agents: Iterable[RanAgent]):
        self.clock = clock
        self.agents = sorted(agents, key=lambda a: a.agent_id)
        self.stream_log: list[MetricSample] = []

    def tick(self, dt_ms: int):
        t0 = self.clock.now
        self.clock.advance(dt_ms)
        for agent in self.agents:
            samples = agent.sample_tick(t0)
            self.stream_log.extend(samples)
            agent.report(samples, self.clock.now)

    def run(self, total_ms: int, dt_ms: int):
        if total_ms % dt_ms != 0:
            raise RanSimError(f"total {total_ms} not a multiple of tick {dt_ms}")
        for _ in range(total_ms // dt_ms):
            self.tick(dt_ms)

    def flush_all(self):
        for agent in self.agents:
            agent.flush_all()


def make_split_agents(
    base_agent_id: str,
    bs_node: NodeRecord,
    lm: LinkModel,
    seed: int,
) -> tuple[RanAgent, RanAgent]:
    """CU/DU split mode: two E2-visible entities for one base station.

    The CU carries the PDCP metric set, the DU carries RLC and MAC; their
    interconnect is in-process state sharing (same cell, same UE set is
    the caller's responsibility when attaching).
    """
    cell = f"cell-{bs_node.node_id}"
    cu = RanAgent(f"{base_agent_id}-cu", bs_node, lm, seed,
                  layers=(MetricLayer.PDCP,), units=frozenset({"CU"}), cell_id=cell)
    du = RanAgent(f"{base_agent_id}-du", bs_node, lm, seed,
                  layers=(MetricLayer.RLC, MetricLayer.MAC), units=frozenset({"DU", "RU"}),
                  cell_id=cell)
    return cu, du


def stream_csv_lines(samples: Iterable[MetricSample]) -> Iterable[str]:
    """Line-delimited (t, layer, latency, ue, cell) records."""
    yield "t_ms,layer,latency_ms,ue_id,cell_id"
    for s in samples:
        yield f"{s.t},{s.layer.name},{s.latency_ms!r},{s.ue_id},{s.cell_id}"
