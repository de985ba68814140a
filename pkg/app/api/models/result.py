"""Result file schemas for topology runs."""
from enum import IntEnum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict

from app.agents.clustering import TopologyRun
from app.agents.utils.tissue_schema import Cluster, ClusterState, NodeSpec, RelayPlacement


class RelayModel(BaseModel):
    x: float
    y: float


class ClusterModel(BaseModel):
    cluster_id: int
    relay: RelayModel
    members: List[str]


class NodeResultModel(BaseModel):
    id: str
    cluster_id: int
    length_cm: float
    pt_w: float
    lifetime_days: Optional[float]


class TopologyResult(BaseModel):
    """
    Final topology of one run.

    Clusters are ordered by relay (x, y) and nodes by id so that equal runs
    serialize to identical bytes.
    """
    model_config = ConfigDict(extra="forbid")

    scenario: str
    seed: int
    K: int
    icap_occupied: Optional[int] = None
    termination: str
    iterations: int
    converged: bool
    clusters: List[ClusterModel]
    nodes: List[NodeResultModel]

    @classmethod
    def from_run(cls, run: TopologyRun, scenario: str, seed: int) -> "TopologyResult":
        diagnostics = run.nico.diagnostics
        clusters = sorted(run.state.clusters, key=lambda c: (c.relay.x, c.relay.y, c.cluster_id))
        return cls(
            scenario=scenario,
            seed=seed,
            K=run.K,
            icap_occupied=run.icap_occupied,
            termination=diagnostics.termination.value,
            iterations=diagnostics.iterations,
            converged=diagnostics.converged,
            clusters=[
                ClusterModel(
                    cluster_id=c.cluster_id,
                    relay=RelayModel(x=c.relay.x, y=c.relay.y),
                    members=c.member_ids,
                )
                for c in clusters
            ],
            nodes=[
                NodeResultModel(
                    id=link.node_id,
                    cluster_id=link.cluster_id,
                    length_cm=link.length,
                    pt_w=link.pt,
                    lifetime_days=link.lifetime_days if link.lifetime_days != float("inf") else None,
                )
                for link in run.nico.links
            ],
        )

    def to_cluster_state(self, nodes: Dict[str, NodeSpec]) -> ClusterState:
        """Rebuild the stored memberships and relays over the given node specs."""
        missing = sorted({m for c in self.clusters for m in c.members} - set(nodes))
        if missing:
            raise ValueError(f"Stored topology references unknown nodes: {missing}")
        clusters = [
            Cluster(
                cluster_id=c.cluster_id,
                members=[nodes[m] for m in c.members],
                relay=RelayPlacement(x=c.relay.x, y=c.relay.y),
            )
            for c in sorted(self.clusters, key=lambda c: c.cluster_id)
        ]
        assigned = {m for c in self.clusters for m in c.members}
        return ClusterState(clusters=clusters, not_clustered=set(nodes) - assigned)


class RunStatus(IntEnum):
    """Process exit codes of the command line."""
    OK = 0
    PARSE_ERROR = 1
    INFEASIBLE = 2
    NOT_CONVERGED = 3
