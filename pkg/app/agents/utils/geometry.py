"""Link geometry and per-cluster weighting shared by every engine."""
import math
from typing import Sequence

from app.agents.utils.errors import EmptyClusterError
from app.agents.utils.scenario_config import ScenarioConfig
from app.agents.utils.tissue_schema import NodeSpec, RelayPlacement


def link_length(node: NodeSpec, relay: RelayPlacement) -> float:
    """Distance from a node to a surface relay in cm.

    Implants measure their horizontal offset to the relay's projection onto
    the implant plane, which shares (x, y) with the relay, plus the depth.
    """
    dx = node.x - relay.x
    dy = node.y - relay.y
    return math.sqrt(dx * dx + dy * dy + node.z * node.z)


def weight_exponent(node: NodeSpec, config: ScenarioConfig) -> float:
    return int(node.tissue) + node.z * config.depth_scale - 1


def node_weight(node: NodeSpec, cluster_rates: Sequence[float], config: ScenarioConfig) -> float:
    """alpha^((T + z) - 1) scaled by the node's share of the cluster data rate.

    Args:
        node: Node whose weight is computed; its rate must be in cluster_rates
        cluster_rates: Data rates of every member of the cluster
        config: Supplies alpha and the depth scale

    Returns:
        float: Dimensionless weight

    Raises:
        EmptyClusterError: If cluster_rates is empty
    """
    if len(cluster_rates) == 0:
        raise EmptyClusterError()
    total = float(sum(cluster_rates))
    return config.alpha ** weight_exponent(node, config) * node.data_rate / total


def capacity_ok(cluster_rates: Sequence[float], capacity: float) -> bool:
    return len(cluster_rates) >= 1 and sum(cluster_rates) <= capacity


def uniformity_ok(implant_lengths: Sequence[float], uniformity: float) -> bool:
    """True when min/max implant link ratio exceeds the uniformity factor."""
    if len(implant_lengths) <= 1:
        return True
    longest = max(implant_lengths)
    if longest <= 0:
        # all implants sit directly under the relay at zero depth
        return True
    return min(implant_lengths) / longest > uniformity
