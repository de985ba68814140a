"""Transmit-power bounds, threshold link lengths, energy and lifetime."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

from scipy.optimize import brentq

from app.agents.channel.interfaces import ChannelModelInterface
from app.agents.utils.errors import NodeUnreachableError, UnreachableGainError, UnsafeThresholdOverrideError
from app.agents.utils.scenario_config import LifetimeParams, ScenarioConfig
from app.agents.utils.tissue_schema import NodeSpec, PathType

logger = logging.getLogger(__name__)

HOURS_PER_DAY = 24.0


@dataclass(frozen=True)
class PowerBounds:
    pt_min: float
    pt_max: float

    @property
    def feasible(self) -> bool:
        return self.within()

    def within(self, tolerance: float = 0.0) -> bool:
        return self.pt_min <= self.pt_max * (1 + tolerance)


@dataclass(frozen=True)
class NodeBudget:
    """Per-node limits used by the clustering constraints."""
    node_id: str
    path: PathType
    pt_max: float
    threshold: float


def pt_min(config: ScenarioConfig, gain: float) -> float:
    """Minimum transmit power reaching the SNR target through the given gain."""
    if gain <= 0:
        raise ValueError(f"gain must be > 0, got {gain}")
    return config.noise_power / gain


def pt_max(config: ScenarioConfig, node: NodeSpec) -> float:
    return min(config.safe_power, node.energy_store / node.required_lifetime)


def link_power(config: ScenarioConfig, model: ChannelModelInterface, node: NodeSpec, length: float) -> float:
    """Transmit power of a node over a link of the given length (0 when co-located)."""
    if length <= 0:
        return 0.0
    return pt_min(config, model.gain(node.path, length, node.z))


def power_bounds(config: ScenarioConfig, model: ChannelModelInterface, node: NodeSpec, length: float,
                 cap: Optional[float] = None) -> PowerBounds:
    """Power needed over the link against the node cap (its own pt_max unless given)."""
    return PowerBounds(pt_min=link_power(config, model, node, length), pt_max=pt_max(config, node) if cap is None else cap)


def threshold_length(
    config: ScenarioConfig,
    node: NodeSpec,
    model: ChannelModelInterface,
    bisect: bool = False,
) -> float:
    """
    Longest link over which the node meets both its SNR and power limits.

    Args:
        config: Scenario configuration (SNR target, noise, Pt_s)
        node: Node whose budget is evaluated
        model: Channel model
        bisect: Solve the pt_min/pt_max crossing numerically instead of
            inverting the gain map

    Returns:
        float: Threshold length in cm

    Raises:
        NodeUnreachableError: If no positive length satisfies the budget
    """
    budget = pt_max(config, node)
    if budget <= 0:
        raise NodeUnreachableError([node.id])
    required_gain = config.noise_power / budget
    try:
        model.check_gain(node.path, required_gain, node.z)
    except UnreachableGainError as e:
        raise NodeUnreachableError([node.id]) from e

    if not bisect:
        return model.inverse_gain(node.path, required_gain, node.z)

    def crossing(length: float) -> float:
        return pt_min(config, model.gain(node.path, length, node.z)) - budget

    low = model.min_length
    high = max(2 * low, 1.0)
    while crossing(high) < 0:
        high *= 2
    return brentq(crossing, low, high, xtol=1e-12, maxiter=500)


def compute_node_budgets(
    nodes: Iterable[NodeSpec],
    config: ScenarioConfig,
    model: ChannelModelInterface,
) -> Dict[str, NodeBudget]:
    """Threshold length and effective power cap of every node.

    A configured threshold override replaces the derived length and the
    power cap becomes the power needed at that length, so the power and
    length bounds stay equivalent.

    Raises:
        UnsafeThresholdOverrideError: If an override needs more than Pt_s
        NodeUnreachableError: Listing every node that cannot reach a relay,
            including implants deeper than their own threshold
    """
    budgets: Dict[str, NodeBudget] = {}
    unreachable = []
    for node in nodes:
        override: Optional[float] = config.threshold_override(node.path)
        try:
            if override is not None:
                threshold = override
                cap = link_power(config, model, node, override)
                if cap > config.safe_power * (1 + 1e-9):
                    raise UnsafeThresholdOverrideError(node.path.value, override, cap, config.safe_power)
            else:
                threshold = threshold_length(config, node, model)
                cap = pt_max(config, node)
        except NodeUnreachableError:
            unreachable.append(node.id)
            continue
        if node.z > threshold:
            unreachable.append(node.id)
            continue
        budgets[node.id] = NodeBudget(node_id=node.id, path=node.path, pt_max=cap, threshold=threshold)
    if unreachable:
        logger.error(f"Nodes unreachable from any surface relay: {sorted(unreachable)}")
        raise NodeUnreachableError(unreachable)
    return budgets


def energy_over_period(node: NodeSpec, pt: float, config: ScenarioConfig, period: Optional[float] = None) -> float:
    """Energy in J spent transmitting the node's data over a period (default: its required lifetime)."""
    horizon = node.required_lifetime if period is None else period
    energy_per_bit = pt / config.bandwidth
    return energy_per_bit * node.data_rate * horizon / (
        config.bandwidth * math.log2(node.modulation_level)
    )


def node_lifetime(pt: float, lifetime: LifetimeParams) -> float:
    """
    Battery lifetime in days under a Peukert-style constant-load model.

    Args:
        pt: Transmit power in W
        lifetime: Battery constants

    Returns:
        float: Days until the battery is exhausted (inf with no load)
    """
    if pt < 0:
        raise ValueError(f"transmit power must be >= 0, got {pt}")
    total_power = pt + lifetime.overhead_power
    if total_power <= 0:
        return math.inf
    load_ma = total_power / lifetime.supply_voltage * 1000.0
    hours = lifetime.battery_capacity_mah / (lifetime.duty_cycle * load_ma)
    return hours / HOURS_PER_DAY * lifetime.external_factor
