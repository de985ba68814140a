from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from app.agents.utils.errors import NodeOutOfVolumeError


class Tissue(IntEnum):
    """Tissue layer a node resides in, enumerated as used in the weight exponent."""
    SKIN = 1
    MUSCLE = 2


class PathType(Enum):
    SS = "S-S"
    MS = "M-S"


@dataclass(frozen=True)
class TissueStack:
    surface_x_range: Tuple[float, float]
    surface_y_range: Tuple[float, float]
    thickness_skin: float
    thickness_fat: float
    thickness_muscle: float

    def __post_init__(self):
        x1, x2 = self.surface_x_range
        y1, y2 = self.surface_y_range
        if not (x2 > x1 and y2 > y1):
            raise ValueError(f"Invalid surface ranges: x={self.surface_x_range}, y={self.surface_y_range}")
        if min(self.thickness_skin, self.thickness_fat, self.thickness_muscle) < 0:
            raise ValueError("Tissue thicknesses must be >= 0")
        if self.total_depth <= 0:
            raise ValueError("Total tissue depth must be > 0")

    @property
    def total_depth(self) -> float:
        return self.thickness_skin + self.thickness_fat + self.thickness_muscle

    @property
    def width(self) -> float:
        return self.surface_x_range[1] - self.surface_x_range[0]

    @property
    def length(self) -> float:
        return self.surface_y_range[1] - self.surface_y_range[0]

    def contains(self, x: float, y: float) -> bool:
        x1, x2 = self.surface_x_range
        y1, y2 = self.surface_y_range
        return x1 <= x <= x2 and y1 <= y <= y2

    def clamp(self, x: float, y: float) -> Tuple[float, float]:
        x1, x2 = self.surface_x_range
        y1, y2 = self.surface_y_range
        return min(max(x, x1), x2), min(max(y, y1), y2)


@dataclass(frozen=True)
class NodeSpec:
    """A sensor/actuator placed on the skin or implanted in muscle.

    A zero energy store is accepted so that dead nodes can be described;
    such nodes are rejected later as unreachable.
    """
    id: str
    x: float
    y: float
    z: float
    tissue: Tissue
    data_rate: float
    energy_store: float
    required_lifetime: float
    modulation_level: int = 2

    def __post_init__(self):
        if self.tissue == Tissue.SKIN and self.z != 0:
            raise ValueError(f"Surface node {self.id} must have z=0, got {self.z}")
        if self.z < 0:
            raise ValueError(f"Node {self.id} has negative depth {self.z}")
        if self.data_rate <= 0:
            raise ValueError(f"Node {self.id} needs a positive data rate")
        if self.energy_store < 0:
            raise ValueError(f"Node {self.id} has a negative energy store")
        if self.required_lifetime <= 0:
            raise ValueError(f"Node {self.id} needs a positive required lifetime")
        if self.modulation_level < 2:
            raise ValueError(f"Node {self.id} modulation level must be >= 2")

    @property
    def path(self) -> PathType:
        return PathType.MS if self.tissue == Tissue.MUSCLE else PathType.SS

    @property
    def is_implant(self) -> bool:
        return self.tissue == Tissue.MUSCLE

    def check_within(self, stack: TissueStack) -> None:
        if not stack.contains(self.x, self.y):
            raise NodeOutOfVolumeError(self.id, self.x, self.y)
        if self.is_implant and self.z > stack.thickness_muscle:
            raise ValueError(
                f"Implant {self.id} depth {self.z} exceeds muscle thickness {stack.thickness_muscle}"
            )


@dataclass(frozen=True)
class RelayPlacement:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if self.z != 0:
            raise ValueError("Relays sit on the skin surface (z=0)")


@dataclass
class Cluster:
    cluster_id: int
    members: List[NodeSpec]
    relay: Optional[RelayPlacement] = None

    @property
    def member_ids(self) -> List[str]:
        return sorted(node.id for node in self.members)

    @property
    def implant_count(self) -> int:
        return sum(1 for node in self.members if node.is_implant)

    @property
    def rates(self) -> List[float]:
        return [node.data_rate for node in self.members]

    @property
    def key(self) -> FrozenSet[str]:
        return frozenset(node.id for node in self.members)

    def sorted_members(self) -> List[NodeSpec]:
        return sorted(self.members, key=lambda node: node.id)


@dataclass
class ClusterState:
    """Cluster memberships, relays and the not-clustered list of one run."""
    clusters: List[Cluster] = field(default_factory=list)
    not_clustered: Set[str] = field(default_factory=set)

    @property
    def K(self) -> int:
        return len(self.clusters)

    def assigned_ids(self) -> List[str]:
        return [node.id for cluster in self.clusters for node in cluster.members]

    def next_cluster_id(self) -> int:
        return max((c.cluster_id for c in self.clusters), default=-1) + 1

    def get_cluster(self, cluster_id: int) -> Cluster:
        for cluster in self.clusters:
            if cluster.cluster_id == cluster_id:
                return cluster
        raise KeyError(f"Unknown cluster id: {cluster_id}")

    def drop_empty(self) -> int:
        before = len(self.clusters)
        self.clusters = [c for c in self.clusters if c.members]
        return before - len(self.clusters)

    def membership_signature(self) -> FrozenSet[FrozenSet[str]]:
        return frozenset(cluster.key for cluster in self.clusters)

    def check_conservation(self, node_ids: Iterable[str]) -> None:
        """Every node must appear exactly once across clusters and NL."""
        seen: Dict[str, int] = {}
        for node_id in self.assigned_ids():
            seen[node_id] = seen.get(node_id, 0) + 1
        for node_id in self.not_clustered:
            seen[node_id] = seen.get(node_id, 0) + 1
        expected = set(node_ids)
        duplicated = sorted(k for k, v in seen.items() if v > 1)
        missing = sorted(expected - set(seen))
        unknown = sorted(set(seen) - expected)
        if duplicated or missing or unknown:
            raise AssertionError(
                f"Membership conservation broken: duplicated={duplicated}, missing={missing}, unknown={unknown}"
            )
        if any(not cluster.members for cluster in self.clusters):
            raise AssertionError("Empty cluster present in state")
