"""Provisioning: image resolution, all-or-nothing launch, teardown."""

import pytest

from oranlab.leases import LeaseEngine, LeaseRequest, SpectrumBlock
from oranlab.provisioner import (
    ContainerState,
    ExecutorFailure,
    ImageCatalog,
    ProvisionError,
    Provisioner,
    SessionState,
    SimExecutor,
)
from oranlab.ransim import VirtualClock


@pytest.fixture
def clock():
    return VirtualClock()


@pytest.fixture
def active_lease(phase1):
    engine = LeaseEngine(phase1)
    req = LeaseRequest(
        requester="alice",
        node_ids=frozenset({"bs-ag", "ue-ag-1"}),
        spectrum=SpectrumBlock(3550, 100),
        interval=(0, 3_600_000),
        images=("gnb-ric", "nrue"),
    )
    return engine.request_lease(req, now=0), engine


def make_provisioner(phase1, catalog, clock, fail_on=(), log_path=None):
    executor = SimExecutor(clock, seed=1, fail_on=fail_on, log_path=log_path)
    return Provisioner(phase1, catalog, executor, clock), executor


class TestResolveImage:
    def test_prebuilt_images(self, catalog):
        assert catalog.resolve_image("gnb-ric").role_tag == "gnb-ric"
        assert catalog.resolve_image("nrue").role_tag == "nrue"

    def test_unknown_image(self, catalog):
        with pytest.raises(ProvisionError, match="unknown image"):
            catalog.resolve_image("no-such-image")

    def test_user_registered_resolves_identically(self, catalog):
        desc = catalog.register("my-xapp-lab", "user supplied stack", "custom")
        assert catalog.resolve_image("my-xapp-lab") == desc
        assert catalog.verify_digest("my-xapp-lab")

    def test_catalog_digest_pinned(self, tmp_path):
        bad = tmp_path / "catalog.yaml"
        bad.write_text(
            "images:\n"
            "  - name: evil\n"
            "    role_tag: custom\n"
            "    content: something\n"
            "    digest: " + "0" * 64 + "\n"
        )
        with pytest.raises(Exception, match="digest"):
            ImageCatalog.load(bad)


class TestLaunch:
    def test_full_launch(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, executor = make_provisioner(phase1, catalog, clock)
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        assert session.state is SessionState.RUNNING
        assert len(session.containers) == 2
        roles = sorted(p.role for c in session.containers for p in c.processes)
        assert roles == ["gNB", "near-RT-RIC", "nrUE", "xApp-host"]
        # BS container started before the UE container
        start_order = [r["node"] for r in executor.log if r["action"] == "start"]
        assert start_order == ["bs-ag", "ue-ag-1"]

    def test_missing_assignment_nothing_started(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, executor = make_provisioner(phase1, catalog, clock)
        with pytest.raises(ProvisionError, match="missing"):
            prov.launch_session(lease, {"bs-ag": "gnb-ric"})
        assert executor.log == []

    def test_rollback_on_executor_failure(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, executor = make_provisioner(phase1, catalog, clock, fail_on={"ue-ag-1"})
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        assert session.state is SessionState.FAILED
        bs = session.container_for_node("bs-ag")
        ue = session.container_for_node("ue-ag-1")
        assert bs.state is ContainerState.STOPPED
        assert ue.state is ContainerState.FAILED
        # executor log shows start bs, start ue (failed), stop bs
        actions = [(r["action"], r["node"]) for r in executor.log]
        assert actions == [
            ("start", "bs-ag"),
            ("start", "ue-ag-1"),
            ("start-failed", "ue-ag-1"),
            ("stop", "bs-ag"),
        ]
        assert not any(c.state is ContainerState.RUNNING for c in session.containers)

    def test_lease_not_active(self, phase1, catalog, clock):
        engine = LeaseEngine(phase1)
        req = LeaseRequest(
            requester="a", node_ids=frozenset({"bs-ag"}),
            spectrum=SpectrumBlock(3550, 100), interval=(500, 1000),
        )
        lease = engine.request_lease(req, now=0)  # Requested, not Active
        prov, _ = make_provisioner(phase1, catalog, clock)
        with pytest.raises(ProvisionError, match="not Active"):
            prov.launch_session(lease, {"bs-ag": "gnb-ric"})

    def test_role_image_compatibility(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, _ = make_provisioner(phase1, catalog, clock)
        with pytest.raises(ProvisionError, match="BaseStation requires"):
            prov.launch_session(lease, {"bs-ag": "nrue", "ue-ag-1": "nrue"})
        with pytest.raises(ProvisionError, match="UE requires"):
            prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "gnb-ric"})

    def test_digest_verified_at_launch(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        catalog._tamper("nrue", "supply-chain surprise")
        prov, executor = make_provisioner(phase1, catalog, clock)
        with pytest.raises(ProvisionError, match="digest"):
            prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        assert executor.log == []


class TestStop:
    def launch(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, executor = make_provisioner(phase1, catalog, clock)
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        return prov, executor, session

    def test_stop_reverse_order(self, phase1, catalog, clock, active_lease):
        prov, executor, session = self.launch(phase1, catalog, clock, active_lease)
        prov.stop_session(session.session_id)
        assert session.state is SessionState.STOPPED
        assert all(c.state is ContainerState.STOPPED for c in session.containers)
        stops = [r["node"] for r in executor.log if r["action"] == "stop"]
        assert stops == ["ue-ag-1", "bs-ag"]  # reverse of launch order

    def test_double_stop_errors(self, phase1, catalog, clock, active_lease):
        prov, _, session = self.launch(phase1, catalog, clock, active_lease)
        prov.stop_session(session.session_id)
        with pytest.raises(ProvisionError, match="already stopped"):
            prov.stop_session(session.session_id)

    def test_unknown_session(self, phase1, catalog, clock):
        prov, _ = make_provisioner(phase1, catalog, clock)
        with pytest.raises(ProvisionError, match="unknown session"):
            prov.stop_session("session-9999")

    def test_failed_session_cleanup_idempotent(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, executor = make_provisioner(phase1, catalog, clock, fail_on={"ue-ag-1"})
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        assert session.state is SessionState.FAILED
        stopped = prov.stop_session(session.session_id, cause="cleanup")
        assert stopped.state is SessionState.STOPPED
        # rollback already stopped bs; cleanup must not stop anything twice
        stops = [r for r in executor.log if r["action"] == "stop"]
        assert len(stops) == 1


class TestDeterminism:
    def test_same_seed_reproduces_log_and_state(self, phase1, catalog):
        # the executor is the only side-effect boundary: identical inputs
        # under one seed reproduce the identical action log and session
        outputs = []
        for _ in range(2):
            clock = VirtualClock()
            engine = LeaseEngine(phase1)
            req = LeaseRequest(
                requester="alice", node_ids=frozenset({"bs-ag", "ue-ag-1"}),
                spectrum=SpectrumBlock(3550, 100), interval=(0, 1000),
            )
            lease = engine.request_lease(req, now=0)
            prov, executor = make_provisioner(phase1, catalog, clock)
            session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
            prov.stop_session(session.session_id)
            outputs.append((executor.log, prov.session_status(session.session_id)))
        assert outputs[0] == outputs[1]


class TestStatus:
    def test_status_view(self, phase1, catalog, clock, active_lease):
        lease, _ = active_lease
        prov, _ = make_provisioner(phase1, catalog, clock)
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        clock.advance(1234)
        status = prov.session_status(session.session_id)
        assert status["state"] == "Running"
        assert status["uptime_ms"] == 1234
        by_node = {c["node_id"]: c for c in status["containers"]}
        assert by_node["bs-ag"]["processes"] == ["gNB", "near-RT-RIC", "xApp-host"]
        assert by_node["ue-ag-1"]["processes"] == ["nrUE"]
        prov.stop_session(session.session_id)
        status = prov.session_status(session.session_id)
        assert status["state"] == "Stopped"
        assert all(c["state"] == "Stopped" for c in status["containers"])
        assert status["uptime_ms"] == 1234  # frozen at stop

    def test_mid_launch_snapshot(self, phase1, catalog, clock):
        # observe the session while the executor is still starting
        # containers: earlier ones Running, the current one Starting,
        # later ones still Pending
        engine = LeaseEngine(phase1)
        req = LeaseRequest(
            requester="a", node_ids=frozenset({"bs-ag", "bs-curtiss", "ue-ag-1"}),
            spectrum=SpectrumBlock(3550, 100), interval=(0, 1000),
        )
        lease = engine.request_lease(req, now=0)
        snapshots = []

        class SnoopingExecutor(SimExecutor):
            def start_container(self, node, image, container_id):
                if prov._sessions:
                    session_id = next(iter(prov._sessions))
                    states = [c.state.value for c in prov.get(session_id).containers]
                    snapshots.append(states)
                super().start_container(node, image, container_id)

        prov = Provisioner(phase1, catalog, SnoopingExecutor(clock, seed=1), clock)
        prov.launch_session(lease, {"bs-ag": "gnb-ric", "bs-curtiss": "gnb-ric",
                                    "ue-ag-1": "nrue"})
        # second container's start: first Running, second Starting, third Pending
        assert snapshots[1] == ["Running", "Starting", "Pending"]

    def test_executor_log_file(self, phase1, catalog, clock, active_lease, tmp_path):
        import json

        lease, _ = active_lease
        log_path = tmp_path / "executor.jsonl"
        prov, _ = make_provisioner(phase1, catalog, clock, log_path=log_path)
        session = prov.launch_session(lease, {"bs-ag": "gnb-ric", "ue-ag-1": "nrue"})
        prov.stop_session(session.session_id)
        records = [json.loads(l) for l in log_path.read_text().splitlines()]
        assert [r["action"] for r in records] == ["start", "start", "stop", "stop"]
        assert all({"action", "node", "container", "t"} <= set(r) for r in records)
