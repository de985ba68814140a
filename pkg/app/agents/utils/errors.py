"""Domain errors raised by the topology engines."""
from typing import Iterable, Tuple


class TopologyError(ValueError):
    """Base class for invalid inputs to the topology engines."""


class DegenerateLinkError(TopologyError):
    def __init__(self, length: float):
        super().__init__(f"degenerate link: length must be > 0, got {length}")
        self.length = length


class UnreachableGainError(TopologyError):
    def __init__(self, gain: float, max_gain: float):
        super().__init__(f"unreachable gain: {gain} is outside (0, {max_gain}]")
        self.gain = gain
        self.max_gain = max_gain


class NodeUnreachableError(TopologyError):
    def __init__(self, node_ids: Iterable[str]):
        self.node_ids: Tuple[str, ...] = tuple(sorted(node_ids))
        super().__init__(f"node unreachable at any distance: {', '.join(self.node_ids)}")


class ScenarioInfeasibleError(TopologyError):
    def __init__(self, node_ids: Iterable[str], reason: str = "unreachable nodes"):
        self.node_ids: Tuple[str, ...] = tuple(sorted(node_ids))
        self.reason = reason
        super().__init__(f"infeasible scenario, {reason}: {', '.join(self.node_ids)}")


class EmptyClusterError(TopologyError):
    def __init__(self):
        super().__init__("empty cluster")


class EmptyScenarioError(TopologyError):
    def __init__(self):
        super().__init__("no nodes")


class NodeOutOfVolumeError(TopologyError):
    def __init__(self, node_id: str, x: float, y: float):
        super().__init__(f"node out of volume: {node_id} at ({x}, {y})")
        self.node_id = node_id


class UnderdeterminedFitError(TopologyError):
    def __init__(self, path: str, rows: int):
        super().__init__(f"underdetermined: path {path} has {rows} distinct length(s), need at least 2")
        self.path = path
        self.rows = rows


class UnsafeThresholdOverrideError(TopologyError):
    def __init__(self, path: str, length: float, power: float, safe_power: float):
        super().__init__(
            f"threshold override above safe power: {length} cm on {path} needs {power:.6g} W > {safe_power:.6g} W"
        )
        self.path = path
        self.length = length
        self.power = power
