"""Lifetime and residual-energy reporting for a finished topology."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.agents.channel.link_budget import link_power, node_lifetime
from app.agents.clustering.icap import GridSpec
from app.agents.clustering.interfaces import TopologyContext
from app.agents.clustering.nico.relay_optimizer import extreme_center_placement
from app.agents.utils.geometry import link_length
from app.agents.utils.tissue_schema import Cluster, ClusterState, NodeSpec, RelayPlacement


@dataclass
class ClusterEnergy:
    cluster_id: int
    lifetimes: Dict[str, float]
    reference_death: float
    residual_fractions: Dict[str, float]
    residual_spread: float
    implant_residual_spread: float
    implant_link_ratio: Optional[float]

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "reference_death_days": _finite(self.reference_death),
            "residual_spread": self.residual_spread,
            "implant_residual_spread": self.implant_residual_spread,
            "implant_link_ratio": self.implant_link_ratio,
            "lifetimes_days": {k: _finite(v) for k, v in sorted(self.lifetimes.items())},
            "residual_fractions": dict(sorted(self.residual_fractions.items())),
        }


@dataclass
class EnergyReport:
    clusters: List[ClusterEnergy] = field(default_factory=list)
    network_lifetime: float = math.inf
    mean_planar_link: float = 0.0
    mean_link: float = 0.0
    mean_implant_link: Optional[float] = None
    total_pt: float = 0.0
    baseline_pt: Dict[str, float] = field(default_factory=dict)

    @property
    def max_residual_spread(self) -> float:
        return max((c.residual_spread for c in self.clusters), default=0.0)

    @property
    def max_implant_residual_spread(self) -> float:
        return max((c.implant_residual_spread for c in self.clusters), default=0.0)

    def baseline_savings(self, baseline: str) -> Optional[float]:
        """Fraction of the baseline's total transmit power saved by the optimized relays."""
        reference = self.baseline_pt.get(baseline)
        if not reference:
            return None
        return 1.0 - self.total_pt / reference

    def to_dict(self) -> dict:
        return {
            "network_lifetime_days": _finite(self.network_lifetime),
            "mean_planar_link_cm": self.mean_planar_link,
            "mean_link_cm": self.mean_link,
            "mean_implant_link_cm": self.mean_implant_link,
            "total_pt_w": self.total_pt,
            "baseline_pt_w": dict(sorted(self.baseline_pt.items())),
            "baseline_savings": {k: self.baseline_savings(k) for k in sorted(self.baseline_pt)},
            "clusters": [c.to_dict() for c in self.clusters],
        }


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def cluster_energy(cluster: Cluster, context: TopologyContext) -> ClusterEnergy:
    """Residual energy of every member when the cluster's first implant dies.

    Clusters without implants are measured at their first member's death.
    """
    config = context.config
    lifetimes, implant_lengths = {}, []
    for node in cluster.members:
        length = link_length(node, cluster.relay)
        lifetimes[node.id] = node_lifetime(link_power(config, context.model, node, length), config.lifetime)
        if node.is_implant:
            implant_lengths.append(length)

    implants = [n.id for n in cluster.members if n.is_implant]
    reference = min(lifetimes[i] for i in (implants or lifetimes))
    fractions = {
        node_id: (max(0.0, 1.0 - reference / days) if math.isfinite(days) else 1.0)
        for node_id, days in lifetimes.items()
    }
    if not math.isfinite(reference):
        fractions = {node_id: 1.0 for node_id in lifetimes}
    implant_fractions = [fractions[i] for i in implants]
    ratio = None
    if len(implant_lengths) > 1 and max(implant_lengths) > 0:
        ratio = min(implant_lengths) / max(implant_lengths)
    return ClusterEnergy(
        cluster_id=cluster.cluster_id,
        lifetimes=lifetimes,
        reference_death=reference,
        residual_fractions=fractions,
        residual_spread=max(fractions.values()) - min(fractions.values()),
        implant_residual_spread=(max(implant_fractions) - min(implant_fractions)) if implant_fractions else 0.0,
        implant_link_ratio=ratio,
    )


def _total_power(members: List[NodeSpec], relay: RelayPlacement, context: TopologyContext) -> float:
    return sum(link_power(context.config, context.model, n, link_length(n, relay)) for n in members)


def energy_report(state: ClusterState, context: TopologyContext, grid: Optional[GridSpec] = None) -> EnergyReport:
    """
    Summarize lifetimes, residual energy and baseline power for a topology.

    Args:
        state: Terminal clusters with relays
        context: Run inputs
        grid: ICAP grid, enabling the cell-centre baseline

    Returns:
        EnergyReport: Per-cluster energy plus network-wide figures; the
        network lifetime is the earliest implant death, or the earliest
        death of any node when there are no implants
    """
    report = EnergyReport()
    planar, lengths, implant_lengths, implant_days, all_days = [], [], [], [], []
    baseline = {"extreme_center": 0.0}
    if grid is not None:
        baseline["cell_center"] = 0.0

    for cluster in sorted(state.clusters, key=lambda c: c.cluster_id):
        energy = cluster_energy(cluster, context)
        report.clusters.append(energy)
        for node in cluster.members:
            length = link_length(node, cluster.relay)
            lengths.append(length)
            planar.append(math.hypot(node.x - cluster.relay.x, node.y - cluster.relay.y))
            all_days.append(energy.lifetimes[node.id])
            if node.is_implant:
                implant_lengths.append(length)
                implant_days.append(energy.lifetimes[node.id])
        report.total_pt += _total_power(cluster.members, cluster.relay, context)

        baseline["extreme_center"] += _total_power(cluster.members, extreme_center_placement(cluster.members), context)
        if grid is not None:
            cx = float(np.mean([n.x for n in cluster.members]))
            cy = float(np.mean([n.y for n in cluster.members]))
            centre = grid.cell_center(grid.cell_of(cx, cy), context.stack)
            baseline["cell_center"] += _total_power(cluster.members, centre, context)

    report.network_lifetime = min(implant_days or all_days, default=math.inf)
    report.mean_planar_link = float(np.mean(planar)) if planar else 0.0
    report.mean_link = float(np.mean(lengths)) if lengths else 0.0
    report.mean_implant_link = float(np.mean(implant_lengths)) if implant_lengths else None
    report.baseline_pt = baseline
    return report
