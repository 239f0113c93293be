"""Booster-aware coverage model and the deployment coverage check."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .inventory import Inventory, NodeRecord, NodeRole, UE_ROLES, list_nodes, node_distance_m
from .metrics import MetricLayer

ONE_MILE_M = 1609.0

DEFAULT_MEDIANS_MS = {MetricLayer.RLC: 4.0, MetricLayer.PDCP: 5.0, MetricLayer.MAC: 3.0}


@dataclass(frozen=True)
class LinkModel:
    """Coverage radii plus per-layer latency parameters.

    base_radius applies when either end lacks a booster; boosted_radius
    requires boosters on both ends and must extend beyond one mile.
    """

    base_radius_m: float = 300.0
    boosted_radius_m: float = 2000.0
    median_ms: dict[MetricLayer, float] = field(
        default_factory=lambda: dict(DEFAULT_MEDIANS_MS)
    )
    jitter_fraction: float = 0.25

    def __post_init__(self):
        if not 0 < self.base_radius_m < self.boosted_radius_m:
            raise ValidationError(
                f"radii must satisfy 0 < base ({self.base_radius_m}) < boosted ({self.boosted_radius_m})"
            )
        if self.boosted_radius_m <= ONE_MILE_M:
            raise ValidationError(
                f"boosted_radius must exceed one mile ({ONE_MILE_M} m), got {self.boosted_radius_m}"
            )
        for layer, med in self.median_ms.items():
            if med <= 0:
                raise ValidationError(f"median_ms({layer.name}) must be > 0, got {med}")
        if not 0 <= self.jitter_fraction < 1:
            raise ValidationError(f"jitter_fraction must be in [0, 1), got {self.jitter_fraction}")


def in_range(bs: NodeRecord, ue: NodeRecord, lm: LinkModel) -> bool:
    """Whether the UE lies within the BS coverage radius.

    The boosted radius applies only when both ends carry a booster.
    """
    if bs.role is not NodeRole.BASE_STATION:
        raise ValidationError(f"node {bs.node_id} is {bs.role.value}, expected BaseStation")
    if ue.role not in UE_ROLES:
        raise ValidationError(f"node {ue.node_id} is {ue.role.value}, expected a UE role")
    radius = lm.boosted_radius_m if (bs.booster and ue.booster) else lm.base_radius_m
    return node_distance_m(bs, ue) <= radius


@dataclass(frozen=True)
class CoverageEntry:
    bs_id: str
    in_range_ues: tuple[str, ...]
    flagged: bool  # fewer than the required minimum of in-range UEs


@dataclass(frozen=True)
class CoverageReport:
    entries: tuple[CoverageEntry, ...]
    min_ues: int

    @property
    def flagged_bs_ids(self) -> list[str]:
        return [e.bs_id for e in self.entries if e.flagged]


def validate_coverage(inv: Inventory, lm: LinkModel, min_ues: int = 2) -> CoverageReport:
    """Per-BS in-range UE listing; flags every BS covering fewer than min_ues."""
    ues = list_nodes(inv, predicate=lambda n: n.role in UE_ROLES)
    entries = []
    for bs in list_nodes(inv, role=NodeRole.BASE_STATION):
        covered = tuple(ue.node_id for ue in ues if in_range(bs, ue, lm))
        entries.append(CoverageEntry(bs.node_id, covered, len(covered) < min_ues))
    return CoverageReport(tuple(entries), min_ues)
