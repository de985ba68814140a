"""Cluster conformance checks and eviction of offending members."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.agents.channel.link_budget import power_bounds
from app.agents.clustering.interfaces import TopologyContext
from app.agents.utils.geometry import capacity_ok, link_length, uniformity_ok
from app.agents.utils.tissue_schema import Cluster, NodeSpec, RelayPlacement

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-9


@dataclass
class ConformanceReport:
    """Which bounds a set of members meets when served by a fixed relay."""
    lengths: Dict[str, float] = field(default_factory=dict)
    powers: Dict[str, float] = field(default_factory=dict)
    power_violators: List[str] = field(default_factory=list)
    length_violators: List[str] = field(default_factory=list)
    ordering_ok: bool = True
    uniformity_ok: bool = True
    capacity_ok: bool = True

    @property
    def violators(self) -> List[str]:
        return sorted(set(self.power_violators) | set(self.length_violators))

    @property
    def bounds_ok(self) -> bool:
        return not self.violators and self.ordering_ok and self.uniformity_ok

    @property
    def conformant(self) -> bool:
        return self.bounds_ok and self.capacity_ok


def check_cluster(members: Sequence[NodeSpec], relay: RelayPlacement, context: TopologyContext) -> ConformanceReport:
    """
    Evaluate the per-node power and length bounds, the implant/surface power
    ordering, implant link uniformity and the outgoing capacity.

    Args:
        members: Cluster members
        relay: Relay serving them
        context: Run inputs with per-node budgets

    Returns:
        ConformanceReport: The outcome of every check
    """
    config = context.config
    report = ConformanceReport()
    implant_powers, surface_powers, implant_lengths = [], [], []
    for node in members:
        budget = context.budgets[node.id]
        length = link_length(node, relay)
        bounds = power_bounds(config, context.model, node, length, cap=budget.pt_max)
        power = bounds.pt_min
        report.lengths[node.id] = length
        report.powers[node.id] = power
        if not bounds.within(BOUND_TOLERANCE):
            report.power_violators.append(node.id)
        if length > budget.threshold * (1 + BOUND_TOLERANCE):
            report.length_violators.append(node.id)
        if node.is_implant:
            implant_powers.append(power)
            implant_lengths.append(length)
        else:
            surface_powers.append(power)

    if implant_powers and surface_powers:
        report.ordering_ok = bool(
            np.mean(implant_powers) <= config.implant_power_ratio * np.mean(surface_powers) * (1 + BOUND_TOLERANCE)
        )
    report.uniformity_ok = uniformity_ok(implant_lengths, config.uniformity)
    report.capacity_ok = capacity_ok([n.data_rate for n in members], config.capacity)
    return report


def _longest(nodes: Sequence[NodeSpec], lengths: Dict[str, float]) -> NodeSpec:
    return max(nodes, key=lambda n: (lengths[n.id], n.id))


def reform_cluster(cluster: Cluster, context: TopologyContext) -> Tuple[Cluster, List[NodeSpec]]:
    """
    Evict members until the cluster conforms at its current relay.

    While a bound other than capacity fails, the longest-link implant leaves
    (or, when only surface nodes break their own bounds, the longest-link
    surface violator). Then, while the data rates exceed the capacity, the
    member with the highest rate leaves, ties going to the longer link.

    Returns:
        Tuple[Cluster, List[NodeSpec]]: The reduced cluster (possibly empty)
        and the evicted nodes in eviction order
    """
    members = list(cluster.sorted_members())
    evicted: List[NodeSpec] = []
    if cluster.relay is None:
        raise ValueError(f"Cluster {cluster.cluster_id} has no relay to reform around")

    while members:
        report = check_cluster(members, cluster.relay, context)
        if report.bounds_ok:
            break
        implants = [n for n in members if n.is_implant]
        violators = set(report.violators)
        implant_violates = any(n.id in violators for n in implants)
        if implants and (implant_violates or not report.ordering_ok or not report.uniformity_ok):
            victim = _longest(implants, report.lengths)
        else:
            victim = _longest([n for n in members if n.id in violators], report.lengths)
        members.remove(victim)
        evicted.append(victim)

    while members and not capacity_ok([n.data_rate for n in members], context.config.capacity):
        lengths = {n.id: link_length(n, cluster.relay) for n in members}
        victim = max(members, key=lambda n: (n.data_rate, lengths[n.id], n.id))
        members.remove(victim)
        evicted.append(victim)

    if evicted:
        logger.debug(f"Cluster {cluster.cluster_id} evicted {[n.id for n in evicted]}")
    return Cluster(cluster_id=cluster.cluster_id, members=members, relay=cluster.relay), evicted
