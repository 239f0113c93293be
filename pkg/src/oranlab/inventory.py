"""Static testbed description: sites, nodes, radios, boosters.

An Inventory is loaded once from a YAML deployment document, fully
validated, and shared immutably afterwards. Farm/campus sites carry
geographic positions (decimal degrees); sandbox sites use a local planar
grid in meters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import yaml

from .errors import ParseError, ValidationError

EARTH_RADIUS_M = 6371000.0

WIDEBAND_BANDWIDTH_MHZ = 200.0  # fixed capability of the wideband SDR class


class SiteKind(enum.Enum):
    FARM = "farm"
    CAMPUS = "campus"
    SANDBOX = "sandbox"


class NodeRole(enum.Enum):
    BASE_STATION = "BaseStation"
    FIXED_UE = "FixedUE"
    MOBILE_UE = "MobileUE"
    SANDBOX_HOST = "SandboxHost"


UE_ROLES = (NodeRole.FIXED_UE, NodeRole.MOBILE_UE)


@dataclass(frozen=True)
class GeoPosition:
    """Latitude/longitude in decimal degrees."""

    latitude: float
    longitude: float


@dataclass(frozen=True)
class PlanarPosition:
    """Local grid position in meters (sandbox sites)."""

    x: float
    y: float


Position = Union[GeoPosition, PlanarPosition]


def distance_m(a: Position, b: Position) -> float:
    """Distance in meters between two positions in the same frame.

    Geographic pairs use the equirectangular approximation, adequate at
    the <=10 km scales of the deployment; planar pairs are Euclidean.
    """
    if isinstance(a, PlanarPosition) and isinstance(b, PlanarPosition):
        return math.hypot(a.x - b.x, a.y - b.y)
    if isinstance(a, GeoPosition) and isinstance(b, GeoPosition):
        lat1, lat2 = math.radians(a.latitude), math.radians(b.latitude)
        dlat = lat2 - lat1
        dlon = math.radians(b.longitude - a.longitude)
        x = dlon * math.cos((lat1 + lat2) / 2.0)
        return EARTH_RADIUS_M * math.hypot(x, dlat)
    raise ValidationError("cannot measure distance across geographic/planar frames")


@dataclass(frozen=True)
class Site:
    site_id: str
    name: str
    kind: SiteKind
    position: Position


@dataclass(frozen=True)
class RadioUnitSpec:
    model_class: str  # "wideband-sdr" | "portable-sdr"
    max_bandwidth: float  # MHz
    freq_range: tuple[float, float]  # [min MHz, max MHz]


@dataclass(frozen=True)
class BoosterSpec:
    tx_gain: float  # dB, power amplifier
    rx_gain: float  # dB, low-noise amplifier


@dataclass(frozen=True)
class NodeRecord:
    node_id: str
    site_id: str
    role: NodeRole
    position: Position
    radios: tuple[RadioUnitSpec, ...]
    booster: Optional[BoosterSpec]
    mgmt_endpoint: str


@dataclass(frozen=True)
class Inventory:
    sites: tuple[Site, ...]
    nodes: tuple[NodeRecord, ...]
    _site_index: dict = field(default_factory=dict, repr=False, compare=False)
    _node_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._site_index.update({s.site_id: s for s in self.sites})
        self._node_index.update({n.node_id: n for n in self.nodes})

    def site(self, site_id: str) -> Site:
        try:
            return self._site_index[site_id]
        except KeyError:
            raise ValidationError(f"unknown site_id {site_id!r}") from None

    def node(self, node_id: str) -> NodeRecord:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise ValidationError(f"unknown node_id {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_index


MODEL_CLASSES = ("wideband-sdr", "portable-sdr")


def _require(mapping: dict, key: str, ctx: str):
    if key not in mapping:
        raise ValidationError(f"{ctx}: missing field {key!r}")
    return mapping[key]


def _parse_position(raw, ctx: str, planar: bool) -> Position:
    if not isinstance(raw, dict):
        raise ValidationError(f"{ctx}: position must be a mapping")
    if planar:
        return PlanarPosition(float(_require(raw, "x", ctx)), float(_require(raw, "y", ctx)))
    lat = float(_require(raw, "latitude", ctx))
    lon = float(_require(raw, "longitude", ctx))
    if not -90.0 <= lat <= 90.0:
        raise ValidationError(f"{ctx}: latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ValidationError(f"{ctx}: longitude {lon} outside [-180, 180]")
    return GeoPosition(lat, lon)


def _parse_radio(raw, ctx: str) -> RadioUnitSpec:
    model = _require(raw, "model_class", ctx)
    if model not in MODEL_CLASSES:
        raise ValidationError(f"{ctx}: unknown radio model_class {model!r}")
    bw = float(_require(raw, "max_bandwidth", ctx))
    if bw <= 0:
        raise ValidationError(f"{ctx}: max_bandwidth must be > 0, got {bw}")
    if model == "wideband-sdr" and bw != WIDEBAND_BANDWIDTH_MHZ:
        raise ValidationError(
            f"{ctx}: wideband-sdr max_bandwidth must be {WIDEBAND_BANDWIDTH_MHZ:.0f} MHz, got {bw}"
        )
    fr = _require(raw, "freq_range", ctx)
    if not (isinstance(fr, (list, tuple)) and len(fr) == 2):
        raise ValidationError(f"{ctx}: freq_range must be [min, max]")
    lo, hi = float(fr[0]), float(fr[1])
    if not lo < hi:
        raise ValidationError(f"{ctx}: freq_range min {lo} must be < max {hi}")
    return RadioUnitSpec(model, bw, (lo, hi))


def _parse_site(raw) -> Site:
    site_id = str(_require(raw, "site_id", "site"))
    ctx = f"site {site_id}"
    name = str(_require(raw, "name", ctx))
    kind_raw = _require(raw, "kind", ctx)
    try:
        kind = SiteKind(kind_raw)
    except ValueError:
        raise ValidationError(f"{ctx}: unknown kind {kind_raw!r}") from None
    pos = _parse_position(_require(raw, "position", ctx), ctx, planar=kind is SiteKind.SANDBOX)
    return Site(site_id, name, kind, pos)


def _parse_node(raw, sites: dict) -> NodeRecord:
    node_id = str(_require(raw, "node_id", "node"))
    ctx = f"node {node_id}"
    site_id = str(_require(raw, "site_id", ctx))
    if site_id not in sites:
        raise ValidationError(f"{ctx}: references unknown site_id {site_id!r}")
    role_raw = _require(raw, "role", ctx)
    try:
        role = NodeRole(role_raw)
    except ValueError:
        raise ValidationError(f"{ctx}: unknown role {role_raw!r}") from None
    planar = sites[site_id].kind is SiteKind.SANDBOX
    pos = _parse_position(_require(raw, "position", ctx), ctx, planar=planar)
    radios = tuple(_parse_radio(r, ctx) for r in raw.get("radios", []))
    if role is NodeRole.SANDBOX_HOST and len(radios) != 2:
        raise ValidationError(f"{ctx}: SandboxHost must have exactly 2 radios, got {len(radios)}")
    if role in (NodeRole.BASE_STATION, NodeRole.FIXED_UE, NodeRole.MOBILE_UE) and not radios:
        raise ValidationError(f"{ctx}: role {role.value} requires at least 1 radio")
    booster = None
    if raw.get("booster") is not None:
        braw = raw["booster"]
        tx = float(_require(braw, "tx_gain", ctx))
        rx = float(_require(braw, "rx_gain", ctx))
        if tx < 0 or rx < 0:
            raise ValidationError(f"{ctx}: booster gains must be >= 0, got tx={tx} rx={rx}")
        booster = BoosterSpec(tx, rx)
    mgmt = str(_require(raw, "mgmt_endpoint", ctx)).strip()
    if not mgmt:
        raise ValidationError(f"{ctx}: mgmt_endpoint must be non-empty")
    return NodeRecord(node_id, site_id, role, pos, radios, booster, mgmt)


def bundled_deployment_path(name: str) -> Path:
    """Path of a bundled deployment fixture ('ara-phase1', 'sandbox-50')."""
    fname = name if name.endswith(".yaml") else f"{name}.yaml"
    return Path(str(resources.files("oranlab").joinpath("deployments", fname)))


def resolve_deployment(source: Union[str, Path]) -> Path:
    """Resolve a deployment argument: a filesystem path or a bundled name."""
    p = Path(source)
    if p.exists():
        return p
    bundled = bundled_deployment_path(str(source))
    if bundled.exists():
        return bundled
    raise ParseError(f"deployment {source!r} is neither a file nor a bundled fixture")


def load_inventory(source: Union[str, Path]) -> Inventory:
    """Load and validate a deployment document (path or bundled name).

    Raises ParseError for malformed documents and ValidationError naming
    the first violated invariant and offending id.
    """
    path = resolve_deployment(source)
    return load_inventory_text(path.read_text(encoding="utf-8"))


def load_inventory_text(text: str) -> Inventory:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed deployment document: {exc}") from exc
    if not isinstance(doc, dict) or "sites" not in doc or "nodes" not in doc:
        raise ParseError("deployment document must have top-level 'sites:' and 'nodes:' lists")

    sites: dict[str, Site] = {}
    for raw in doc["sites"] or []:
        site = _parse_site(raw)
        if site.site_id in sites:
            raise ValidationError(f"duplicate site_id {site.site_id!r}")
        sites[site.site_id] = site

    nodes: dict[str, NodeRecord] = {}
    for raw in doc["nodes"] or []:
        node = _parse_node(raw, sites)
        if node.node_id in nodes:
            raise ValidationError(f"duplicate node_id {node.node_id!r}")
        nodes[node.node_id] = node

    return Inventory(tuple(sites.values()), tuple(nodes.values()))


def list_nodes(
    inv: Inventory,
    role: Optional[NodeRole] = None,
    site_id: Optional[str] = None,
    predicate: Optional[Callable[[NodeRecord], bool]] = None,
) -> list[NodeRecord]:
    """Nodes satisfying the filter, stable-ordered by node_id."""
    out = []
    for node in inv.nodes:
        if role is not None and node.role is not role:
            continue
        if site_id is not None and node.site_id != site_id:
            continue
        if predicate is not None and not predicate(node):
            continue
        out.append(node)
    out.sort(key=lambda n: n.node_id)
    return out


def node_distance_m(a: NodeRecord, b: NodeRecord) -> float:
    return distance_m(a.position, b.position)
