"""The living-lab facade: one object wiring inventory, leases,
provisioning, the simulated RAN, the RIC and telemetry on a shared
virtual clock.

This is the only mutation path the API and CLI use; nothing bypasses
lease admission. `advance()` is the single driver of virtual time:
it applies lease transitions (stopping sessions whose lease expired),
steps every running session's agents in deterministic order, and ticks
the synthetic telemetry generator.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .config import LabConfig
from .errors import OranLabError
from .inventory import Inventory, NodeRole, UE_ROLES, list_nodes, load_inventory, node_distance_m
from .leases import Lease, LeaseEngine, LeaseRequest, LeaseState, SpectrumBlock
from .linkmodel import validate_coverage
from .metrics import MetricLayer, MetricSample
from .provisioner import (
    ExperimentSession,
    ImageCatalog,
    Provisioner,
    SessionState,
    SimExecutor,
)
from .ransim import RanAgent, VirtualClock, stream_csv_lines
from .ric import Ric, build_xapp, LatencyMonitorXapp
from .telemetry import SyntheticTelemetry, TelemetryStore

import yaml

TELEMETRY_EVERY_TICKS = 10


class SessionRuntime:
    """Simulation objects realized for one running session: a RIC, one
    agent per gnb-ric container, and the UE nodes of nrue containers."""

    def __init__(self, lab: "LivingLab", session: ExperimentSession, lease: Lease):
        self.lab = lab
        self.session = session
        cfg = lab.config
        self.ric = Ric(
            f"ric-{session.session_id}",
            lab.clock,
            seed=cfg.seed,
            routing_delay_ms=cfg.routing_delay_ms,
        )
        self.routed_events: list[dict] = []
        self._event_counter = 0
        self.stream_log: list[MetricSample] = []
        self.attach_results = []
        self.monitors: dict[str, LatencyMonitorXapp] = {}

        self.ric.add_route_listener(self._on_routed)

        # xApps first: agents connecting afterwards get subscriptions at setup
        for decl in lab.load_registry_declarations():
            desc = build_xapp(decl)
            self.ric.register_xapp(desc)
            if isinstance(desc.handler, LatencyMonitorXapp):
                self.monitors[desc.xapp_id] = desc.handler

        self.agents: list[RanAgent] = []
        ue_nodes = []
        for container in session.containers:
            node = lab.inventory.node(container.node_id)
            if container.image.role_tag == "gnb-ric":
                agent = RanAgent(f"gnb-{node.node_id}", node, cfg.link_model, cfg.seed)
                self.ric.connect_local(agent)
                agent.setup()
                self.agents.append(agent)
            elif container.image.role_tag == "nrue":
                ue_nodes.append(node)
        self.agents.sort(key=lambda a: a.agent_id)
        self.ue_nodes = ue_nodes

        # each UE attaches to the nearest in-range agent
        for ue in sorted(ue_nodes, key=lambda n: n.node_id):
            candidates = sorted(
                self.agents, key=lambda a: (node_distance_m(a.bs_node, ue), a.agent_id)
            )
            for agent in candidates:
                result = agent.attach_ue(ue, lab.clock.now)
                self.attach_results.append(result)
                if result.ok:
                    break

    def _on_routed(self, record: dict):
        self._event_counter += 1
        samples = record.pop("samples")
        self.routed_events.append(
            {
                "event_id": self._event_counter,
                **record,
                "samples": [
                    {"t": s.t, "layer": s.layer.name, "latency_ms": s.latency_ms,
                     "ue_id": s.ue_id, "cell_id": s.cell_id}
                    for s in samples
                ],
            }
        )

    @property
    def attached_ue_count(self) -> int:
        return sum(len(a.attached) for a in self.agents)

    def tick(self, t0: int, now: int):
        for agent in self.agents:
            samples = agent.sample_tick(t0)
            self.stream_log.extend(samples)
            agent.report(samples, now)

    def shutdown(self):
        for agent in self.agents:
            agent.flush_all()
            agent.disconnect()
        self.ric.close_listener()

    def conservation(self) -> dict:
        totals = {"generated": 0, "matched": 0, "unmatched": 0, "pending": 0}
        for agent in self.agents:
            c = agent.conservation()
            for k in totals:
                totals[k] += c[k]
        return totals

    def monitor(self) -> LatencyMonitorXapp:
        if not self.monitors:
            raise OranLabError("no latency-monitor xApp registered in this session")
        return next(iter(self.monitors.values()))


class LivingLab:
    """Facade over the full desk-scale testbed."""

    def __init__(self, config: Optional[LabConfig] = None):
        self.config = config or LabConfig()
        self.clock = VirtualClock()
        self.inventory: Inventory = load_inventory(self.config.deployment)
        self.catalog = ImageCatalog.load(self.config.catalog_path)
        self.engine = LeaseEngine(
            self.inventory,
            gnb_image_names=self.catalog.gnb_image_names(),
            log_path=self.config.lease_log_path,
        )
        self.executor = SimExecutor(
            self.clock, seed=self.config.seed, log_path=self.config.executor_log_path
        )
        self.provisioner = Provisioner(
            self.inventory,
            self.catalog,
            self.executor,
            self.clock,
            runtime_factory=lambda session, lease: SessionRuntime(self, session, lease),
        )
        self.telemetry = TelemetryStore(self.inventory)
        self.telemetry_gen = SyntheticTelemetry(self.telemetry, self.inventory, self.config.seed)
        self._lock = threading.RLock()
        self._tick_count = 0

    # -- registry -------------------------------------------------------

    def load_registry_declarations(self) -> list[dict]:
        path = self.config.registry_path
        if path is None:
            path = Path(str(resources.files("oranlab").joinpath("xapps", "registry.yaml")))
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        decls = []
        for decl in doc.get("xapps", []):
            merged = dict(decl)
            merged.update(self.config.xapp_overrides.get(decl.get("xapp_id"), {}))
            decls.append(merged)
        return decls

    # -- time ------------------------------------------------------------

    def advance(self, dt_ms: int):
        """Drive the virtual clock forward in sampling-tick quanta."""
        with self._lock:
            tick = self.config.tick_ms
            if dt_ms % tick != 0:
                raise OranLabError(f"dt {dt_ms} must be a multiple of tick_ms {tick}")
            for _ in range(dt_ms // tick):
                t0 = self.clock.now
                self.clock.advance(tick)
                now = self.clock.now
                for transition in self.engine.advance_time(now):
                    if transition.to_state is LeaseState.EXPIRED:
                        for session in self.provisioner.sessions_for_lease(transition.lease_id):
                            if session.state not in (SessionState.STOPPED, SessionState.FAILED):
                                self.provisioner.stop_session(session.session_id, cause="lease expired")
                for session in sorted(self.provisioner.list_sessions(), key=lambda s: s.session_id):
                    if session.running and session.runtime is not None:
                        session.runtime.tick(t0, now)
                self._tick_count += 1
                if self._tick_count % TELEMETRY_EVERY_TICKS == 0:
                    self.telemetry_gen.tick(t0)

    # -- lease workflow -----------------------------------------------------

    def request_lease(self, requester: str, node_ids, center_mhz: float, bandwidth_mhz: float,
                      start: int, end: int, images=()) -> Lease:
        req = LeaseRequest(
            requester=requester,
            node_ids=frozenset(node_ids),
            spectrum=SpectrumBlock(center_mhz, bandwidth_mhz),
            interval=(start, end),
            images=tuple(images),
        )
        return self.engine.request_lease(req, self.clock.now)

    def terminate_lease(self, lease_id: str) -> Lease:
        with self._lock:
            lease = self.engine.terminate_lease(lease_id, self.clock.now)
            for session in self.provisioner.sessions_for_lease(lease_id):
                if session.state not in (SessionState.STOPPED, SessionState.FAILED):
                    self.provisioner.stop_session(session.session_id, cause="lease terminated")
            return lease

    def launch_session(self, lease_id: str, assignments: dict[str, str]) -> ExperimentSession:
        with self._lock:
            lease = self.engine.get(lease_id)
            return self.provisioner.launch_session(lease, assignments)

    def stop_session(self, session_id: str) -> ExperimentSession:
        with self._lock:
            return self.provisioner.stop_session(session_id)

    def runtime(self, session_id: str) -> SessionRuntime:
        session = self.provisioner.get(session_id)
        if session.runtime is None:
            raise OranLabError(f"session {session_id} has no runtime (not Running)")
        return session.runtime

    # -- views ----------------------------------------------------------------

    def coverage_report(self):
        return validate_coverage(self.inventory, self.config.link_model)

    def chart_export(self, session_id: str) -> str:
        """Columnar text: aligned per-layer latency series for charting."""
        monitor = self.runtime(session_id).monitor()
        layers = (MetricLayer.RLC, MetricLayer.PDCP, MetricLayer.MAC)
        series = {l: monitor.layer_series(l) for l in layers}
        n = max((len(s) for s in series.values()), default=0)
        lines = ["idx,t_ms,rlc_ms,pdcp_ms,mac_ms"]
        for i in range(n):
            t = ""
            cells = []
            for layer in layers:
                s = series[layer]
                if i < len(s):
                    t = t or str(s[i].t)
                    cells.append(repr(s[i].latency_ms))
                else:
                    cells.append("")
            lines.append(f"{i},{t}," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def stream_export(self, session_id: str) -> str:
        """Line-delimited raw generated metric stream of a session."""
        runtime = self.runtime(session_id)
        return "\n".join(stream_csv_lines(runtime.stream_log)) + "\n"

    def account_for_token(self, token: Optional[str]) -> Optional[str]:
        if token is None:
            return None
        return self.config.tokens.get(token)


@dataclass
class DemoResult:
    lease_id: str
    session_id: str
    indications_routed: int
    actions: int
    timing: dict
    attach_ok: bool
    containers: list
    conservation: dict

    @property
    def ok(self) -> bool:
        return (
            self.indications_routed >= 10
            and self.attach_ok
            and all(c["state"] == "Running" for c in self.containers)
        )


def run_demo_workflow(lab: LivingLab, duration_ms: int = 3000) -> DemoResult:
    """The four-step field workflow against the bundled fixtures:
    reserve 1 BS + 1 UE, pick images, launch containers, run the
    gNB / near-RT-RIC / xApps and the nrUE until metrics flow."""
    bs = list_nodes(lab.inventory, role=NodeRole.BASE_STATION)[0]
    ue = [n for n in list_nodes(lab.inventory) if n.role in UE_ROLES and n.site_id == bs.site_id][0]
    lease = lab.request_lease(
        requester="demo",
        node_ids=[bs.node_id, ue.node_id],
        center_mhz=3550.0,
        bandwidth_mhz=100.0,
        start=lab.clock.now,
        end=lab.clock.now + 3_600_000,
        images=("gnb-ric", "nrue"),
    )
    if lease.state is not LeaseState.ACTIVE:
        raise OranLabError(f"demo lease not admitted: {lease.state.value} {lease.conflicts}")
    session = lab.launch_session(lease.lease_id, {bs.node_id: "gnb-ric", ue.node_id: "nrue"})
    if not session.running:
        raise OranLabError(f"demo session failed: {session.stop_cause}")
    lab.advance(duration_ms)
    runtime = lab.runtime(session.session_id)
    status = lab.provisioner.session_status(session.session_id)
    return DemoResult(
        lease_id=lease.lease_id,
        session_id=session.session_id,
        indications_routed=len(runtime.routed_events),
        actions=len(runtime.ric.action_log),
        timing=runtime.ric.timing_summary(),
        attach_ok=runtime.attached_ue_count >= 1,
        containers=status["containers"],
        conservation=runtime.conservation(),
    )
