"""Interface for the clustering phases of topology synthesis."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

from app.agents.channel.interfaces import ChannelModelInterface
from app.agents.channel.link_budget import NodeBudget
from app.agents.utils.scenario_config import ScenarioConfig
from app.agents.utils.tissue_schema import ClusterState, NodeSpec, TissueStack


@dataclass(frozen=True)
class TopologyContext:
    """Immutable inputs shared by every phase of one run."""
    nodes: Dict[str, NodeSpec]
    stack: TissueStack
    config: ScenarioConfig
    model: ChannelModelInterface
    budgets: Dict[str, NodeBudget]

    def node(self, node_id: str) -> NodeSpec:
        return self.nodes[node_id]

    def sorted_nodes(self) -> List[NodeSpec]:
        return [self.nodes[k] for k in sorted(self.nodes)]

    @property
    def bounds(self):
        return (*self.stack.surface_x_range, *self.stack.surface_y_range)


class ClusteringPhaseInterface(ABC):
    """
    Abstract interface for a clustering phase.

    A phase takes the current cluster state (or nothing, for the phase that
    creates the first one) and returns a new state. Phases never mutate the
    state they are given.
    """

    def __init__(self, context: TopologyContext):
        self.context = context

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def run(self, state: Optional[ClusterState] = None) -> ClusterState:
        """
        Execute the phase.

        Args:
            state: Cluster state produced by the previous phase, if any

        Returns:
            ClusterState: The state after this phase
        """
        pass
