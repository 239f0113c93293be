"""Large-scale indoor scenarios: repurpose the 50 sandbox radios as a
mix of E2 agents and UEs under a single RIC.

Each (host, radio) pair becomes one logical entity: the first radio of
the first n_agents hosts backs a CU/DU agent, every remaining radio
backs a UE. Derived node records keep the host position so the planar
link model applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OranLabError
from .inventory import Inventory, NodeRecord, NodeRole, list_nodes
from .linkmodel import LinkModel
from .metrics import MetricLayer
from .ransim import Coordinator, RanAgent, VirtualClock
from .ric import LatencyMonitorXapp, Ric, SubscriptionSpec, XAppDescriptor


def sandbox_link_model() -> LinkModel:
    # the whole room fits in the base radius; no boosters indoors
    return LinkModel(base_radius_m=300.0, boosted_radius_m=2000.0)


@dataclass
class ScaleScenario:
    clock: VirtualClock
    ric: Ric
    agents: list[RanAgent]
    coordinator: Coordinator
    monitor: LatencyMonitorXapp
    ue_nodes: list[NodeRecord]

    def run(self, total_ms: int, dt_ms: int = 100):
        self.coordinator.run(total_ms, dt_ms)

    def finish(self):
        self.coordinator.flush_all()

    def conservation(self) -> dict:
        totals = {"generated": 0, "matched": 0, "unmatched": 0, "pending": 0}
        for agent in self.agents:
            c = agent.conservation()
            for k in totals:
                totals[k] += c[k]
        return totals


def _derived_nodes(inv: Inventory, n_agents: int, n_ues: int) -> tuple[list[NodeRecord], list[NodeRecord]]:
    hosts = list_nodes(inv, role=NodeRole.SANDBOX_HOST)
    radio_slots = []  # (host, radio_index) in deterministic order
    for host in hosts:
        for idx in range(len(host.radios)):
            radio_slots.append((host, idx))
    if n_agents + n_ues > len(radio_slots):
        raise OranLabError(
            f"need {n_agents + n_ues} radios, sandbox provides {len(radio_slots)}"
        )
    # first radio of the first n_agents hosts become base stations
    agent_slots = [(h, 0) for h in hosts[:n_agents]]
    taken = set((h.node_id, 0) for h in hosts[:n_agents])
    ue_slots = [(h, i) for (h, i) in radio_slots if (h.node_id, i) not in taken][:n_ues]

    def derive(host: NodeRecord, idx: int, role: NodeRole) -> NodeRecord:
        return NodeRecord(
            node_id=f"{host.node_id}/r{idx}",
            site_id=host.site_id,
            role=role,
            position=host.position,
            radios=(host.radios[idx],),
            booster=None,
            mgmt_endpoint=host.mgmt_endpoint,
        )

    bs_nodes = [derive(h, i, NodeRole.BASE_STATION) for h, i in agent_slots]
    ue_nodes = [derive(h, i, NodeRole.FIXED_UE) for h, i in ue_slots]
    return bs_nodes, ue_nodes


def sandbox_scenario(
    inv: Inventory,
    n_agents: int = 10,
    n_ues: int = 40,
    seed: int = 7,
    report_period_ms: int = 200,
    monitor_window: int = 50,
) -> ScaleScenario:
    """One RIC, n_agents CU/DU agents, n_ues UEs spread round-robin."""
    lm = sandbox_link_model()
    bs_nodes, ue_nodes = _derived_nodes(inv, n_agents, n_ues)
    clock = VirtualClock()
    ric = Ric("ric-sandbox", clock, seed=seed)
    monitor = LatencyMonitorXapp(window=monitor_window)
    ric.register_xapp(
        XAppDescriptor(
            "latency-monitor",
            (("all", SubscriptionSpec(report_period_ms, frozenset(MetricLayer))),),
            monitor,
        )
    )
    agents = []
    for i, node in enumerate(bs_nodes):
        agent = RanAgent(f"agent-{i:02d}", node, lm, seed)
        ric.connect_local(agent)
        agent.setup()
        agents.append(agent)
    for j, ue in enumerate(ue_nodes):
        agent = agents[j % n_agents]
        result = agent.attach_ue(ue, clock.now)
        if not result.ok:
            raise OranLabError(f"scenario attach failed: {result.detail}")
    coordinator = Coordinator(clock, agents)
    return ScaleScenario(clock, ric, agents, coordinator, monitor, ue_nodes)
