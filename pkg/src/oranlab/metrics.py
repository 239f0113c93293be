"""Per-layer latency metric records shared by the RAN simulator, the wire
protocol and the RIC."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class MetricLayer(enum.Enum):
    """Protocol-stack layer a latency sample was measured at.

    The enum value doubles as the metric-set id on the wire; ids above
    MAC are reserved numeric space.
    """

    RLC = 1
    PDCP = 2
    MAC = 3

    @classmethod
    def from_wire(cls, wire_id: int) -> "MetricLayer":
        return cls(wire_id)

    @classmethod
    def from_name(cls, name: str) -> "MetricLayer":
        return cls[name.upper()]


@dataclass(frozen=True)
class MetricSample:
    """One (time, layer, latency) observation for a UE in a cell."""

    t: int  # virtual ms
    layer: MetricLayer
    latency_ms: float
    ue_id: str
    cell_id: str

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError(f"latency must be >= 0, got {self.latency_ms}")

    def as_row(self) -> tuple:
        return (self.t, self.layer.name, self.latency_ms, self.ue_id, self.cell_id)
