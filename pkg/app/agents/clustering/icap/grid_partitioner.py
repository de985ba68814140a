"""Initial cluster approximation on a cuboid grid."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.agents.clustering.interfaces import ClusteringPhaseInterface, TopologyContext
from app.agents.utils.tissue_schema import Cluster, ClusterState, NodeSpec, PathType, RelayPlacement, TissueStack

logger = logging.getLogger(__name__)


@dataclass
class GridSpec:
    lam: float
    x_splits: List[float]
    y_splits: List[float]
    height: float
    occupied_cells: int = 0
    cell_members: Dict[Tuple[int, int], List[str]] = field(default_factory=dict)

    @property
    def columns(self) -> int:
        return len(self.x_splits) - 1

    @property
    def rows(self) -> int:
        return len(self.y_splits) - 1

    @property
    def geometric_cells(self) -> int:
        return self.columns * self.rows

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        """Cells are half-open [x, x + lam) except the last, which is closed."""
        a = int(math.floor((x - self.x_splits[0]) / self.lam))
        b = int(math.floor((y - self.y_splits[0]) / self.lam))
        return min(max(a, 0), self.columns - 1), min(max(b, 0), self.rows - 1)

    def cell_bounds(self, cell: Tuple[int, int]) -> Tuple[float, float, float, float]:
        a, b = cell
        return self.x_splits[a], self.x_splits[a + 1], self.y_splits[b], self.y_splits[b + 1]

    def cell_center(self, cell: Tuple[int, int], stack: TissueStack) -> RelayPlacement:
        x1, x2, y1, y2 = self.cell_bounds(cell)
        x, y = stack.clamp((x1 + x2) / 2, (y1 + y2) / 2)
        return RelayPlacement(x=x, y=y)


def grid_size(threshold_ss: float, threshold_ms: float) -> float:
    """Cell side such that the cell diagonal equals the shorter threshold."""
    if threshold_ss <= 0 or threshold_ms <= 0:
        raise ValueError(f"Thresholds must be > 0, got S-S={threshold_ss}, M-S={threshold_ms}")
    return min(threshold_ss, threshold_ms) / math.sqrt(2)


def split_points(low: float, high: float, lam: float) -> List[float]:
    count = int(math.ceil((high - low) / lam - 1e-12))
    count = max(count, 1)
    return [low + a * lam for a in range(count + 1)]


def partition(nodes: Iterable[NodeSpec], stack: TissueStack, lam: float) -> Tuple[GridSpec, ClusterState]:
    """
    Assign every node to the grid cell enclosing it.

    Args:
        nodes: Nodes to partition
        stack: Tissue volume whose surface the grid tiles
        lam: Cell side in cm

    Returns:
        Tuple[GridSpec, ClusterState]: Grid description and one cluster per
        occupied cell, relays at the cell centres, NL empty

    Raises:
        NodeOutOfVolumeError: If a node lies outside the surface ranges
    """
    if lam <= 0:
        raise ValueError(f"Grid size must be > 0, got {lam}")
    x1, x2 = stack.surface_x_range
    y1, y2 = stack.surface_y_range
    grid = GridSpec(
        lam=lam,
        x_splits=split_points(x1, x2, lam),
        y_splits=split_points(y1, y2, lam),
        height=stack.total_depth,
    )

    cells: Dict[Tuple[int, int], List[NodeSpec]] = {}
    for node in sorted(nodes, key=lambda n: n.id):
        node.check_within(stack)
        cells.setdefault(grid.cell_of(node.x, node.y), []).append(node)

    state = ClusterState()
    for cluster_id, cell in enumerate(sorted(cells)):
        state.clusters.append(
            Cluster(cluster_id=cluster_id, members=list(cells[cell]), relay=grid.cell_center(cell, stack))
        )
        grid.cell_members[cell] = [n.id for n in cells[cell]]
    grid.occupied_cells = len(cells)
    logger.info(
        f"ICAP grid lam={lam:.4f} cm: {grid.columns}x{grid.rows} cells, {grid.occupied_cells} occupied"
    )
    return grid, state


def grid_thresholds(context: TopologyContext) -> Tuple[float, float]:
    """Smallest S-S and M-S thresholds over all nodes, each falling back to the other path."""
    ss = [b.threshold for b in context.budgets.values() if b.path == PathType.SS]
    ms = [b.threshold for b in context.budgets.values() if b.path == PathType.MS]
    threshold_ss = min(ss) if ss else min(ms)
    threshold_ms = min(ms) if ms else threshold_ss
    return threshold_ss, threshold_ms


def horizontal_separations(lam: float, samples: int, rng: np.random.Generator) -> np.ndarray:
    """In-plane distance between a random point and a random relay in the same cell."""
    points = rng.uniform(0.0, lam, size=(samples, 2))
    relays = rng.uniform(0.0, lam, size=(samples, 2))
    return np.hypot(points[:, 0] - relays[:, 0], points[:, 1] - relays[:, 1])


class IcapPhase(ClusteringPhaseInterface):
    """Phase I: grid partition sized from the node thresholds."""

    def __init__(self, context: TopologyContext):
        super().__init__(context)
        self.logger = logging.getLogger(__name__)
        self.grid: Optional[GridSpec] = None

    @property
    def name(self) -> str:
        return "icap"

    def run(self, state: Optional[ClusterState] = None) -> ClusterState:
        threshold_ss, threshold_ms = grid_thresholds(self.context)
        lam = grid_size(threshold_ss, threshold_ms)
        self.grid, initial = partition(self.context.nodes.values(), self.context.stack, lam)
        self.logger.info(f"ICAP produced K={initial.K} from {len(self.context.nodes)} nodes")
        return initial
