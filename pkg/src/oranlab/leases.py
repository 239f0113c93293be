"""Reservation engine: admits, tracks and expires node+spectrum leases.

Admission is strict first-come-first-served at a single linearization
point (the engine lock). Conflicting requests are persisted as Rejected
leases for the audit trail. All times are half-open intervals in integer
virtual milliseconds.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import OranLabError, ValidationError
from .inventory import Inventory, NodeRole, UE_ROLES


class LeaseError(OranLabError):
    """Structurally invalid lease request or illegal lifecycle operation."""


class LeaseState(Enum):
    REQUESTED = "Requested"
    ACTIVE = "Active"
    EXPIRED = "Expired"
    TERMINATED = "Terminated"
    REJECTED = "Rejected"


TERMINAL_STATES = (LeaseState.EXPIRED, LeaseState.TERMINATED, LeaseState.REJECTED)

_LEGAL_TRANSITIONS = {
    LeaseState.REQUESTED: {LeaseState.ACTIVE, LeaseState.REJECTED, LeaseState.TERMINATED},
    LeaseState.ACTIVE: {LeaseState.EXPIRED, LeaseState.TERMINATED},
}


@dataclass(frozen=True)
class SpectrumBlock:
    center: float  # MHz
    bandwidth: float  # MHz

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise LeaseError(f"spectrum bandwidth must be > 0, got {self.bandwidth}")

    @property
    def low(self) -> float:
        return self.center - self.bandwidth / 2.0

    @property
    def high(self) -> float:
        return self.center + self.bandwidth / 2.0

    def overlaps(self, other: "SpectrumBlock") -> bool:
        # blocks are half-open ranges: touching edges do not overlap
        return self.low < other.high and other.low < self.high


@dataclass(frozen=True)
class LeaseRequest:
    requester: str
    node_ids: frozenset[str]
    spectrum: SpectrumBlock
    interval: tuple[int, int]  # [start, end) virtual ms
    images: tuple[str, ...] = ()

    def __post_init__(self):
        start, end = self.interval
        if not start < end:
            raise LeaseError(f"interval start {start} must be < end {end}")
        if not self.node_ids:
            raise LeaseError("node_ids must be non-empty")

    @property
    def start(self) -> int:
        return self.interval[0]

    @property
    def end(self) -> int:
        return self.interval[1]


@dataclass(frozen=True)
class ConflictReason:
    other_lease_id: str
    kind: str  # "node" | "spectrum"
    detail: str


@dataclass
class Lease:
    lease_id: str
    request: LeaseRequest
    state: LeaseState
    decided_at: int
    conflicts: tuple[ConflictReason, ...] = ()
    released_at: Optional[int] = None  # early release instant (termination)

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def effective_end(self) -> int:
        """End of the instants this lease actually holds its resources."""
        if self.released_at is not None:
            return min(self.request.end, self.released_at)
        return self.request.end

    def to_jsonable(self) -> dict:
        return {
            "lease_id": self.lease_id,
            "requester": self.request.requester,
            "node_ids": sorted(self.request.node_ids),
            "spectrum": {"center": self.request.spectrum.center, "bandwidth": self.request.spectrum.bandwidth},
            "interval": [self.request.start, self.request.end],
            "images": list(self.request.images),
            "state": self.state.value,
            "decided_at": self.decided_at,
            "conflicts": [
                {"other_lease_id": c.other_lease_id, "kind": c.kind, "detail": c.detail}
                for c in self.conflicts
            ],
            "released_at": self.released_at,
        }


@dataclass(frozen=True)
class LeaseTransition:
    at: int
    lease_id: str
    from_state: LeaseState
    to_state: LeaseState
    cause: str


def intervals_overlap(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """[a0,a1) and [b0,b1) overlap iff a0 < b1 and b0 < a1."""
    return a[0] < b[1] and b[0] < a[1]


def conflicts(req: LeaseRequest, calendar: Iterable[Lease], inv: Inventory) -> list[ConflictReason]:
    """Conflict reasons against every admitted, non-terminal lease.

    A lease conflicts when intervals overlap and either the node sets
    intersect or some nodes share a site while the spectrum blocks
    overlap (spectrum exclusivity is scoped per site).
    """
    req_sites = {inv.node(n).site_id for n in req.node_ids}
    out: list[ConflictReason] = []
    for lease in calendar:
        if lease.terminal:
            continue
        if not intervals_overlap(req.interval, lease.request.interval):
            continue
        shared_nodes = req.node_ids & lease.request.node_ids
        if shared_nodes:
            out.append(
                ConflictReason(
                    lease.lease_id,
                    "node",
                    f"nodes {sorted(shared_nodes)} already leased by {lease.lease_id}",
                )
            )
            continue
        lease_sites = {inv.node(n).site_id for n in lease.request.node_ids}
        shared_sites = req_sites & lease_sites
        if shared_sites and req.spectrum.overlaps(lease.request.spectrum):
            out.append(
                ConflictReason(
                    lease.lease_id,
                    "spectrum",
                    f"spectrum block [{req.spectrum.low:g}, {req.spectrum.high:g}) MHz overlaps "
                    f"{lease.lease_id} at site(s) {sorted(shared_sites)}",
                )
            )
    return out


class LeaseEngine:
    """Calendar of leases with FCFS admission and a virtual-time lifecycle.

    An optional append-only JSONL event log persists every admission and
    transition; replaying the log reconstructs the calendar byte-identically.
    """

    def __init__(
        self,
        inventory: Inventory,
        gnb_image_names: frozenset[str] = frozenset({"gnb-ric"}),
        log_path: Optional[Path] = None,
    ):
        self._inv = inventory
        self._gnb_images = gnb_image_names
        self._leases: dict[str, Lease] = {}
        self._order: list[str] = []
        self._counter = 0
        self._last_now: Optional[int] = None
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path else None

    # -- validation ----------------------------------------------------

    def _validate_request(self, req: LeaseRequest):
        for node_id in sorted(req.node_ids):
            if not self._inv.has_node(node_id):
                raise LeaseError(f"unknown node_id {node_id!r}")
        for node_id in sorted(req.node_ids):
            node = self._inv.node(node_id)
            for radio in node.radios:
                lo, hi = radio.freq_range
                if req.spectrum.low < lo or req.spectrum.high > hi:
                    raise LeaseError(
                        f"spectrum [{req.spectrum.low:g}, {req.spectrum.high:g}) MHz outside "
                        f"radio range [{lo:g}, {hi:g}] of node {node_id}"
                    )
                if req.spectrum.bandwidth > radio.max_bandwidth:
                    raise LeaseError(
                        f"bandwidth {req.spectrum.bandwidth:g} MHz exceeds {radio.max_bandwidth:g} MHz "
                        f"capability of node {node_id}"
                    )
        if any(img in self._gnb_images for img in req.images):
            roles = {self._inv.node(n).role for n in req.node_ids}
            if NodeRole.BASE_STATION not in roles or not (roles & set(UE_ROLES)):
                raise LeaseError(
                    "requests with a gNB image must include at least 1 BaseStation and 1 UE node"
                )

    # -- operations ----------------------------------------------------

    def request_lease(self, req: LeaseRequest, now: int) -> Lease:
        """Admit or reject a request against the current calendar (atomic)."""
        with self._lock:
            self._validate_request(req)
            reasons = conflicts(req, self._leases.values(), self._inv)
            self._counter += 1
            lease_id = f"lease-{self._counter:04d}"
            if reasons:
                lease = Lease(lease_id, req, LeaseState.REJECTED, now, tuple(reasons))
                event = "rejected"
            else:
                state = LeaseState.ACTIVE if req.start <= now < req.end else LeaseState.REQUESTED
                lease = Lease(lease_id, req, state, now)
                event = "admitted"
            self._leases[lease_id] = lease
            self._order.append(lease_id)
            self._log({"event": event, "at": now, "lease": lease.to_jsonable()})
            return lease

    def advance_time(self, now: int) -> list[LeaseTransition]:
        """Apply start/expiry boundaries crossed up to `now` (monotone)."""
        with self._lock:
            if self._last_now is not None and now < self._last_now:
                raise LeaseError(f"clock regression: {now} < {self._last_now}")
            self._last_now = now
            transitions: list[LeaseTransition] = []
            for lease_id in self._order:
                lease = self._leases[lease_id]
                if lease.state is LeaseState.REQUESTED and lease.request.start <= now:
                    transitions.append(
                        LeaseTransition(lease.request.start, lease_id, LeaseState.REQUESTED, LeaseState.ACTIVE, "start")
                    )
                    lease.state = LeaseState.ACTIVE
                if lease.state is LeaseState.ACTIVE and lease.request.end <= now:
                    transitions.append(
                        LeaseTransition(lease.request.end, lease_id, LeaseState.ACTIVE, LeaseState.EXPIRED, "expiry")
                    )
                    lease.state = LeaseState.EXPIRED
            transitions.sort(key=lambda t: (t.at, t.lease_id))
            for t in transitions:
                self._log(
                    {"event": "transition", "at": t.at, "lease_id": t.lease_id,
                     "from": t.from_state.value, "to": t.to_state.value, "cause": t.cause}
                )
            return transitions

    def terminate_lease(self, lease_id: str, now: int) -> Lease:
        with self._lock:
            lease = self._leases.get(lease_id)
            if lease is None:
                raise LeaseError(f"unknown lease {lease_id!r}")
            if lease.terminal:
                raise LeaseError(f"lease {lease_id} already terminal ({lease.state.value})")
            from_state = lease.state
            lease.state = LeaseState.TERMINATED
            lease.released_at = now
            self._log(
                {"event": "transition", "at": now, "lease_id": lease_id,
                 "from": from_state.value, "to": LeaseState.TERMINATED.value, "cause": "terminate"}
            )
            return lease

    # -- queries -------------------------------------------------------

    def get(self, lease_id: str) -> Lease:
        lease = self._leases.get(lease_id)
        if lease is None:
            raise LeaseError(f"unknown lease {lease_id!r}")
        return lease

    def list_leases(self) -> list[Lease]:
        with self._lock:
            return [self._leases[i] for i in self._order]

    def snapshot_canonical(self) -> bytes:
        """Canonical byte serialization of the full calendar state."""
        with self._lock:
            doc = [self._leases[i].to_jsonable() for i in self._order]
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()

    # -- event log -----------------------------------------------------

    def _log(self, record: dict):
        if self._log_path is not None:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def replay_log(cls, inventory: Inventory, log_path: Path,
                   gnb_image_names: frozenset[str] = frozenset({"gnb-ric"})) -> "LeaseEngine":
        """Rebuild an engine's state from its append-only event log."""
        engine = cls(inventory, gnb_image_names)
        for line in Path(log_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["event"] in ("admitted", "rejected"):
                raw = rec["lease"]
                req = LeaseRequest(
                    requester=raw["requester"],
                    node_ids=frozenset(raw["node_ids"]),
                    spectrum=SpectrumBlock(raw["spectrum"]["center"], raw["spectrum"]["bandwidth"]),
                    interval=(raw["interval"][0], raw["interval"][1]),
                    images=tuple(raw["images"]),
                )
                lease = Lease(
                    raw["lease_id"], req, LeaseState(raw["state"]), raw["decided_at"],
                    tuple(ConflictReason(c["other_lease_id"], c["kind"], c["detail"]) for c in raw["conflicts"]),
                    raw["released_at"],
                )
                engine._leases[lease.lease_id] = lease
                engine._order.append(lease.lease_id)
                engine._counter = max(engine._counter, int(lease.lease_id.split("-")[1]))
            elif rec["event"] == "transition":
                lease = engine._leases[rec["lease_id"]]
                lease.state = LeaseState(rec["to"])
                if rec["cause"] == "terminate":
                    lease.released_at = rec["at"]
                engine._last_now = max(engine._last_now or 0, rec["at"])
        return engine


def verify_calendar_safety(leases: Iterable[Lease], inv: Inventory) -> list[str]:
    """Sweep all interval boundaries of admitted leases for double-booking.

    Checks, at every instant, node exclusivity and per-site spectrum
    disjointness over the leases' effective intervals (a termination
    releases resources early). Returns human-readable violations.
    """
    admitted = [l for l in leases if l.state is not LeaseState.REJECTED]
    points = sorted({l.request.start for l in admitted} | {l.effective_end() for l in admitted})
    violations: list[str] = []
    for t in points:
        holding = [l for l in admitted if l.request.start <= t < l.effective_end()]
        seen_nodes: dict[str, str] = {}
        for lease in holding:
            for n in sorted(lease.request.node_ids):
                if n in seen_nodes:
                    violations.append(f"t={t}: node {n} held by {seen_nodes[n]} and {lease.lease_id}")
                else:
                    seen_nodes[n] = lease.lease_id
        for i, a in enumerate(holding):
            for b in holding[i + 1:]:
                a_sites = {inv.node(n).site_id for n in a.request.node_ids}
                b_sites = {inv.node(n).site_id for n in b.request.node_ids}
                if (a_sites & b_sites) and a.request.spectrum.overlaps(b.request.spectrum):
                    if not (a.request.node_ids & b.request.node_ids):
                        violations.append(
                            f"t={t}: same-site spectrum overlap between {a.lease_id} and {b.lease_id}"
                        )
    return violations
