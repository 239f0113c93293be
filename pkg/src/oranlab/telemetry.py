"""Auxiliary sensor data: weather readings and spectrum-monitor samples.

Append-only store, timestamp-aligned with experiment metrics. Sensors
may deliver out of order; records are sorted at query time and each
series tracks a high-water mark plus how many records arrived late.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .errors import OranLabError, ValidationError
from .inventory import Inventory
from .ransim import stable_seed


class TelemetryError(OranLabError):
    pass


@dataclass(frozen=True)
class WeatherReading:
    t: int  # ms, virtual or wall per time_base tag
    site_id: str
    temperature_c: float
    wind_speed_ms: float
    precipitation_mmh: float
    time_base: str = "virtual"  # "virtual" | "wall"

    def __post_init__(self):
        if self.wind_speed_ms < 0:
            raise ValidationError(f"wind_speed must be >= 0, got {self.wind_speed_ms}")
        if self.precipitation_mmh < 0:
            raise ValidationError(f"precipitation must be >= 0, got {self.precipitation_mmh}")
        if "\x00" in self.site_id:
            raise ValidationError("site_id must not contain NUL")


@dataclass(frozen=True)
class SpectrumSample:
    t: int
    node_id: str
    center_mhz: float
    bandwidth_mhz: float
    power_dbm: float
    time_base: str = "virtual"

    def __post_init__(self):
        if self.bandwidth_mhz <= 0:
            raise ValidationError(f"bandwidth must be > 0, got {self.bandwidth_mhz}")
        if "\x00" in self.node_id:
            raise ValidationError("node_id must not contain NUL")


Record = Union[WeatherReading, SpectrumSample]

_CSV_FIELDS = {
    "weather": ["t", "site_id", "temperature_c", "wind_speed_ms", "precipitation_mmh", "time_base"],
    "spectrum": ["t", "node_id", "center_mhz", "bandwidth_mhz", "power_dbm", "time_base"],
}


def record_kind(record: Record) -> str:
    return "weather" if isinstance(record, WeatherReading) else "spectrum"


class TelemetryStore:
    """Per-site / per-node time series with immutable, append-only records."""

    def __init__(self, inventory: Inventory):
        self._inv = inventory
        self._records: dict[str, list[tuple[int, Record]]] = {"weather": [], "spectrum": []}
        self._high_water: dict[tuple[str, str], int] = {}
        self._late: dict[tuple[str, str], int] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def ingest(self, record: Record) -> str:
        if isinstance(record, WeatherReading):
            if not any(s.site_id == record.site_id for s in self._inv.sites):
                raise TelemetryError(f"unknown site_id {record.site_id!r}")
            series_key = ("weather", record.site_id)
        elif isinstance(record, SpectrumSample):
            if not self._inv.has_node(record.node_id):
                raise TelemetryError(f"unknown node_id {record.node_id!r}")
            series_key = ("spectrum", record.node_id)
        else:
            raise TelemetryError(f"not a telemetry record: {type(record).__name__}")
        with self._lock:
            self._counter += 1
            stored_id = f"tlm-{self._counter:06d}"
            self._records[record_kind(record)].append((self._counter, record))
            hw = self._high_water.get(series_key)
            if hw is not None and record.t < hw:
                self._late[series_key] = self._late.get(series_key, 0) + 1
            self._high_water[series_key] = max(hw or record.t, record.t)
            return stored_id

    def query(
        self,
        kind: str,
        selector: Optional[str] = None,
        start: Optional[int] = None,
        end: Optional[int] = None,
    ) -> list[Record]:
        """Records with t in [start, end), time-ordered (stable by arrival)."""
        if kind not in self._records:
            raise TelemetryError(f"unknown telemetry kind {kind!r} (weather|spectrum)")
        if start is not None and end is not None and start > end:
            raise TelemetryError(f"inverted time range [{start}, {end})")
        with self._lock:
            rows = list(self._records[kind])
        out = []
        for arrival, rec in rows:
            key = rec.site_id if kind == "weather" else rec.node_id
            if selector is not None and key != selector:
                continue
            if start is not None and rec.t < start:
                continue
            if end is not None and rec.t >= end:
                continue
            out.append((rec.t, arrival, rec))
        out.sort(key=lambda pair: (pair[0], pair[1]))
        return [rec for _, _, rec in out]

    def counts(self) -> dict[str, int]:
        with self._lock:
            return {k: len(v) for k, v in self._records.items()}

    def series_health(self) -> list[dict]:
        with self._lock:
            return [
                {
                    "kind": kind,
                    "selector": sel,
                    "high_water_t": hw,
                    "late_records": self._late.get((kind, sel), 0),
                }
                for (kind, sel), hw in sorted(self._high_water.items())
            ]


def export_csv(series: Iterable[Record]) -> str:
    """RFC-4180-style CSV: header row plus one row per record.

    A mixed-kind series is rejected; re-parsing the output yields the
    identical series.
    """
    rows = list(series)
    if not rows:
        return "t\r\n"
    kind = record_kind(rows[0])
    if any(record_kind(r) != kind for r in rows):
        raise TelemetryError("cannot export a mixed weather/spectrum series")
    fields = _CSV_FIELDS[kind]
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(fields)
    for rec in rows:
        writer.writerow([_csv_cell(getattr(rec, f)) for f in fields])
    return buf.getvalue()


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def parse_csv(text: str) -> list[Record]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return []
    header = rows[0]
    if header == _CSV_FIELDS["weather"]:
        return [
            WeatherReading(int(r[0]), r[1], float(r[2]), float(r[3]), float(r[4]), r[5])
            for r in rows[1:]
        ]
    if header == _CSV_FIELDS["spectrum"]:
        return [
            SpectrumSample(int(r[0]), r[1], float(r[2]), float(r[3]), float(r[4]), r[5])
            for r in rows[1:]
        ]
    if header == ["t"]:
        return []
    raise TelemetryError(f"unrecognized CSV header {header!r}")


class SyntheticTelemetry:
    """Seeded generator of plausible weather / spectrum streams so
    experiments can be correlated with environmental data without
    hardware; real sensors use the same ingest endpoint."""

    def __init__(self, store: TelemetryStore, inventory: Inventory, seed: int = 0):
        self._store = store
        self._inv = inventory
        self._rng = np.random.default_rng(stable_seed(seed, "telemetry"))
        self._temp = 18.0
        self._wind = 3.0

    def tick(self, t: int):
        for site in self._inv.sites:
            self._temp += float(self._rng.normal(0, 0.05))
            self._wind = max(0.0, self._wind + float(self._rng.normal(0, 0.2)))
            rain = max(0.0, float(self._rng.normal(0, 0.3)))
            self._store.ingest(
                WeatherReading(t, site.site_id, round(self._temp, 3),
                               round(self._wind, 3), round(rain, 3))
            )
