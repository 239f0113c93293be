"""Inventory loading, validation and coverage checks."""

import math
import random

import pytest

from oranlab.errors import ParseError, ValidationError
from oranlab.inventory import (
    GeoPosition,
    NodeRole,
    PlanarPosition,
    bundled_deployment_path,
    distance_m,
    list_nodes,
    load_inventory,
    load_inventory_text,
)
from oranlab.linkmodel import LinkModel, in_range, validate_coverage

MINIMAL_DOC = """
sites:
  - site_id: s1
    name: Site One
    kind: farm
    position: {latitude: 42.0, longitude: -93.7}
nodes: []
"""


def node_doc(node_id="n1", site="s1", role="BaseStation", lat=42.0, lon=-93.7,
             radios=None, booster=None, mgmt="mgmt://n1"):
    doc = {
        "node_id": node_id,
        "site_id": site,
        "role": role,
        "position": {"latitude": lat, "longitude": lon},
        "radios": radios if radios is not None else [
            {"model_class": "wideband-sdr", "max_bandwidth": 200, "freq_range": [3300, 3800]}
        ],
        "mgmt_endpoint": mgmt,
    }
    if booster is not None:
        doc["booster"] = booster
    return doc


def make_doc(nodes):
    import yaml

    return yaml.safe_dump(
        {
            "sites": [
                {"site_id": "s1", "name": "Site One", "kind": "farm",
                 "position": {"latitude": 42.0, "longitude": -93.7}}
            ],
            "nodes": nodes,
        }
    )


class TestLoad:
    def test_default_dataset_counts(self, phase1):
        bs = list_nodes(phase1, role=NodeRole.BASE_STATION)
        ues = list_nodes(phase1, role=NodeRole.FIXED_UE)
        assert len(bs) == 2
        assert len(ues) == 4
        assert len({s.site_id for s in phase1.sites}) == 2
        per_farm = {s.site_id: 0 for s in phase1.sites}
        for ue in ues:
            per_farm[ue.site_id] += 1
        assert set(per_farm.values()) == {2}

    def test_sandbox_dataset_counts(self, sandbox):
        hosts = list_nodes(sandbox, role=NodeRole.SANDBOX_HOST)
        assert len(hosts) == 25
        assert sum(len(h.radios) for h in hosts) == 50
        assert all(len(h.radios) == 2 for h in hosts)

    def test_empty_node_list_is_valid(self):
        inv = load_inventory_text(MINIMAL_DOC)
        assert inv.nodes == ()
        assert len(inv.sites) == 1

    def test_same_bytes_equal_inventories(self):
        text = bundled_deployment_path("ara-phase1").read_text()
        assert load_inventory_text(text) == load_inventory_text(text)

    def test_malformed_document(self):
        with pytest.raises(ParseError):
            load_inventory_text("sites: [")
        with pytest.raises(ParseError):
            load_inventory_text("just_a_scalar")

    def test_unknown_bundled_name(self):
        with pytest.raises(ParseError):
            load_inventory("no-such-deployment")

    def test_duplicate_node_id_named(self):
        doc = make_doc([node_doc(), node_doc()])
        with pytest.raises(ValidationError, match="n1"):
            load_inventory_text(doc)

    def test_unknown_site_reference_named(self):
        doc = make_doc([node_doc(site="ghost")])
        with pytest.raises(ValidationError, match="ghost"):
            load_inventory_text(doc)

    def test_latitude_bounds(self):
        doc = make_doc([node_doc(lat=91.0)])
        with pytest.raises(ValidationError, match="latitude"):
            load_inventory_text(doc)

    def test_wideband_bandwidth_pinned(self):
        radios = [{"model_class": "wideband-sdr", "max_bandwidth": 100, "freq_range": [3300, 3800]}]
        with pytest.raises(ValidationError, match="200"):
            load_inventory_text(make_doc([node_doc(radios=radios)]))

    def test_sandbox_host_needs_two_radios(self):
        import yaml

        doc = yaml.safe_dump(
            {
                "sites": [{"site_id": "lab", "name": "Lab", "kind": "sandbox",
                           "position": {"x": 0, "y": 0}}],
                "nodes": [
                    {
                        "node_id": "h1", "site_id": "lab", "role": "SandboxHost",
                        "position": {"x": 0, "y": 0},
                        "radios": [{"model_class": "portable-sdr", "max_bandwidth": 56,
                                    "freq_range": [70, 6000]}],
                        "mgmt_endpoint": "mgmt://h1",
                    }
                ],
            }
        )
        with pytest.raises(ValidationError, match="exactly 2"):
            load_inventory_text(doc)

    def test_empty_mgmt_endpoint(self):
        with pytest.raises(ValidationError, match="mgmt_endpoint"):
            load_inventory_text(make_doc([node_doc(mgmt="  ")]))

    def test_negative_booster_gain(self):
        doc = make_doc([node_doc(booster={"tx_gain": -1, "rx_gain": 3})])
        with pytest.raises(ValidationError, match="gains"):
            load_inventory_text(doc)

    def test_mobile_ue_validates_like_fixed(self):
        radios = [{"model_class": "portable-sdr", "max_bandwidth": 100,
                   "freq_range": [400, 6000]}]
        inv = load_inventory_text(make_doc([node_doc("ue-m", role="MobileUE", radios=radios)]))
        assert inv.node("ue-m").role is NodeRole.MOBILE_UE
        with pytest.raises(ValidationError, match="at least 1 radio"):
            load_inventory_text(make_doc([node_doc("ue-m", role="MobileUE", radios=[])]))


class TestListNodes:
    def test_role_filter(self, phase1):
        assert len(list_nodes(phase1, role=NodeRole.FIXED_UE)) == 4

    def test_empty_filter_returns_all(self, phase1):
        assert len(list_nodes(phase1)) == 6

    def test_nonexistent_site_empty(self, phase1):
        assert list_nodes(phase1, site_id="nowhere") == []

    def test_stable_order(self, phase1):
        ids = [n.node_id for n in list_nodes(phase1)]
        assert ids == sorted(ids)


class TestDistance:
    def test_planar(self):
        assert distance_m(PlanarPosition(0, 0), PlanarPosition(3, 4)) == 5.0

    def test_geo_one_degree_latitude(self):
        d = distance_m(GeoPosition(42.0, -93.7), GeoPosition(43.0, -93.7))
        assert abs(d - 111194.9) < 60  # R * pi / 180

    def test_mixed_frames_rejected(self):
        with pytest.raises(ValidationError):
            distance_m(GeoPosition(0, 0), PlanarPosition(0, 0))


class TestCoverage:
    def test_default_dataset_zero_flags(self, phase1, link_model):
        report = validate_coverage(phase1, link_model)
        assert report.flagged_bs_ids == []
        for entry in report.entries:
            assert len(entry.in_range_ues) == 2

    def test_one_bs_one_ue_flagged(self, link_model):
        import yaml

        doc = yaml.safe_dump(
            {
                "sites": [{"site_id": "s1", "name": "S", "kind": "farm",
                           "position": {"latitude": 42.0, "longitude": -93.7}}],
                "nodes": [
                    node_doc("bs1"),
                    node_doc("ue1", role="FixedUE",
                             radios=[{"model_class": "portable-sdr", "max_bandwidth": 100,
                                      "freq_range": [400, 6000]}]),
                ],
            }
        )
        inv = load_inventory_text(doc)
        report = validate_coverage(inv, link_model)
        assert report.flagged_bs_ids == ["bs1"]  # 1 in-range UE < 2

    def test_randomized_placements_match_bruteforce(self, link_model):
        # oracle: direct pairwise equirectangular distance, written here
        # independently of the package implementation
        rng = random.Random(2024)
        R = 6371000.0

        def oracle_dist(a, b):
            lat1, lat2 = math.radians(a[0]), math.radians(b[0])
            x = math.radians(b[1] - a[1]) * math.cos((lat1 + lat2) / 2)
            y = lat2 - lat1
            return R * math.sqrt(x * x + y * y)

        for trial in range(20):
            n_bs, n_ue = rng.randint(1, 4), rng.randint(0, 6)
            nodes = []
            placements = {}
            for i in range(n_bs):
                lat = 42.0 + rng.uniform(-0.02, 0.02)
                lon = -93.7 + rng.uniform(-0.02, 0.02)
                boosted = rng.random() < 0.8
                placements[f"bs{i}"] = (lat, lon, boosted)
                nodes.append(node_doc(f"bs{i}", lat=lat, lon=lon,
                                      booster={"tx_gain": 30, "rx_gain": 20} if boosted else None))
            for j in range(n_ue):
                lat = 42.0 + rng.uniform(-0.02, 0.02)
                lon = -93.7 + rng.uniform(-0.02, 0.02)
                boosted = rng.random() < 0.8
                placements[f"ue{j}"] = (lat, lon, boosted)
                nodes.append(node_doc(f"ue{j}", role="FixedUE", lat=lat, lon=lon,
                                      radios=[{"model_class": "portable-sdr", "max_bandwidth": 100,
                                               "freq_range": [400, 6000]}],
                                      booster={"tx_gain": 20, "rx_gain": 15} if boosted else None))
            inv = load_inventory_text(make_doc(nodes))
            report = validate_coverage(inv, link_model)

            expected_flags = []
            for i in range(n_bs):
                bs_lat, bs_lon, bs_boost = placements[f"bs{i}"]
                covered = 0
                for j in range(n_ue):
                    ue_lat, ue_lon, ue_boost = placements[f"ue{j}"]
                    radius = 2000.0 if (bs_boost and ue_boost) else 300.0
                    if oracle_dist((bs_lat, bs_lon), (ue_lat, ue_lon)) <= radius:
                        covered += 1
                if covered < 2:
                    expected_flags.append(f"bs{i}")
            assert report.flagged_bs_ids == expected_flags


class TestInRange:
    def test_boosted_pair_at_one_mile(self, phase1, link_model):
        # default boosted radius (2000 m) covers one mile (1609 m)
        bs = phase1.node("bs-ag")
        ue = phase1.node("ue-ag-2")  # ~1294 m away, both boosted
        assert in_range(bs, ue, link_model)
        assert link_model.boosted_radius_m > 1609

    def test_zero_distance_always_true(self, phase1, link_model):
        bs = phase1.node("bs-ag")
        ue_here = type(bs)(
            node_id="ue-x", site_id=bs.site_id, role=NodeRole.FIXED_UE,
            position=bs.position, radios=bs.radios, booster=None,
            mgmt_endpoint="mgmt://x",
        )
        assert in_range(bs, ue_here, link_model)

    def test_unboosted_pair_beyond_base_radius(self, phase1, link_model):
        bs = phase1.node("bs-ag")
        far_ue = phase1.node("ue-ag-2")
        unboosted = type(far_ue)(
            node_id="ue-y", site_id=far_ue.site_id, role=NodeRole.FIXED_UE,
            position=far_ue.position, radios=far_ue.radios, booster=None,
            mgmt_endpoint="mgmt://y",
        )
        # ~1294 m apart but base radius is 300 m without both boosters
        assert not in_range(bs, unboosted, link_model)

    def test_wrong_roles_rejected(self, phase1, link_model):
        bs = phase1.node("bs-ag")
        ue = phase1.node("ue-ag-1")
        with pytest.raises(ValidationError):
            in_range(ue, bs, link_model)

    def test_link_model_invariants(self):
        with pytest.raises(ValidationError):
            LinkModel(base_radius_m=0)
        with pytest.raises(ValidationError):
            LinkModel(base_radius_m=500, boosted_radius_m=400)
        with pytest.raises(ValidationError):
            LinkModel(boosted_radius_m=1500)  # must exceed one mile
        with pytest.raises(ValidationError):
            LinkModel(jitter_fraction=1.0)
