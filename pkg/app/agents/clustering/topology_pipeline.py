"""End-to-end topology synthesis: budgets, ICAP, then NICO."""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from app.agents.channel import ChannelModelFactory, compute_node_budgets
from app.agents.clustering.icap import GridSpec, IcapPhase
from app.agents.clustering.interfaces import TopologyContext
from app.agents.clustering.nico import NicoResult, run_nico
from app.agents.utils.errors import EmptyScenarioError, NodeUnreachableError, ScenarioInfeasibleError
from app.agents.utils.scenario_config import ScenarioConfig
from app.agents.utils.tissue_schema import ClusterState, NodeSpec, TissueStack


@dataclass
class TopologyRun:
    context: TopologyContext
    icap_state: Optional[ClusterState]
    grid: Optional[GridSpec]
    nico: NicoResult

    @property
    def state(self) -> ClusterState:
        return self.nico.state

    @property
    def K(self) -> int:
        return self.nico.state.K

    @property
    def icap_occupied(self) -> Optional[int]:
        return self.grid.occupied_cells if self.grid else None


class TopologyPipeline:
    """
    Builds the run context and drives both clustering phases.

    Usage:
        pipeline = TopologyPipeline(nodes, stack, config)
        run = pipeline.run()
    """

    def __init__(self, nodes: Iterable[NodeSpec], stack: TissueStack, config: ScenarioConfig, trace: bool = False):
        self.logger = logging.getLogger(__name__)
        self.nodes = list(nodes)
        self.stack = stack
        self.config = config
        self.trace = trace

    def build_context(self) -> TopologyContext:
        """
        Validate the node set and derive every node's budget.

        Raises:
            EmptyScenarioError: If there are no nodes
            NodeOutOfVolumeError: If a node lies outside the tissue volume
            ScenarioInfeasibleError: If some node cannot reach any relay or
                alone exceeds the cluster capacity
        """
        if not self.nodes:
            raise EmptyScenarioError()
        duplicated = sorted(k for k, v in Counter(n.id for n in self.nodes).items() if v > 1)
        if duplicated:
            raise ValueError(f"Duplicate node ids: {duplicated}")
        for node in self.nodes:
            node.check_within(self.stack)

        model = ChannelModelFactory.create_model(self.config.channel)
        try:
            budgets = compute_node_budgets(self.nodes, self.config, model)
        except NodeUnreachableError as e:
            raise ScenarioInfeasibleError(e.node_ids) from e

        oversized = [n.id for n in self.nodes if n.data_rate > self.config.capacity]
        if oversized:
            raise ScenarioInfeasibleError(oversized, reason="data rate above cluster capacity")

        return TopologyContext(
            nodes={n.id: n for n in self.nodes},
            stack=self.stack,
            config=self.config,
            model=model,
            budgets=budgets,
        )

    def run(self, initial_state: Optional[ClusterState] = None) -> TopologyRun:
        """
        Synthesize the topology.

        Args:
            initial_state: Memberships and relays of a previous run to resume
                from; ICAP is skipped when given

        Returns:
            TopologyRun: ICAP grid and state (when run) plus the NICO result
        """
        context = self.build_context()
        grid = None
        icap_state = None
        if initial_state is None:
            icap = IcapPhase(context)
            icap_state = icap.run()
            grid = icap.grid
            start = icap_state
        else:
            initial_state.check_conservation(context.nodes)
            self.logger.info(f"Resuming from a stored topology with K={initial_state.K}")
            start = initial_state

        nico = run_nico(start, context, trace=self.trace)
        return TopologyRun(context=context, icap_state=icap_state, grid=grid, nico=nico)
