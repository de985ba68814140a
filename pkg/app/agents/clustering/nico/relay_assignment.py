"""Nearest-relay assignment, reassignment with merging, and dedicated relays."""
import logging
import math
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import QhullError, Voronoi

from app.agents.clustering.interfaces import TopologyContext
from app.agents.clustering.nico.cluster_reformer import check_cluster
from app.agents.clustering.nico.relay_optimizer import RelayOptimizationResult, optimize_relay
from app.agents.utils.geometry import capacity_ok, link_length
from app.agents.utils.tissue_schema import Cluster, ClusterState, NodeSpec, RelayPlacement

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9
STRICT_MARGIN = 1e-12

RelayOptimizer = Callable[[Sequence[NodeSpec]], RelayOptimizationResult]


def _default_optimizer(context: TopologyContext) -> RelayOptimizer:
    return lambda members: optimize_relay(members, context)


def _load_key(cluster: Cluster) -> Tuple[int, float, int]:
    return len(cluster.members), float(sum(cluster.rates)), cluster.cluster_id


def _pick_nearest(candidates: List[Tuple[float, Cluster]]) -> Cluster:
    """Shortest link wins; near-ties go to the least loaded relay."""
    shortest = min(length for length, _ in candidates)
    tied = [c for length, c in candidates if length <= shortest + TIE_TOLERANCE]
    return min(tied, key=_load_key)


def _copy_state(state: ClusterState) -> ClusterState:
    return ClusterState(
        clusters=[Cluster(c.cluster_id, list(c.members), c.relay) for c in state.clusters],
        not_clustered=set(state.not_clustered),
    )


def assign_nearest_relay(state: ClusterState, context: TopologyContext) -> ClusterState:
    """
    Attach every not-clustered node to the nearest relay that can take it.

    Nodes are processed in id order. A relay is a candidate only when its
    cluster, with the node added, still meets every bound at the relay's
    current position. Nodes without a candidate stay not-clustered.

    Args:
        state: Current clusters and NL
        context: Run inputs

    Returns:
        ClusterState: New state; the input is left untouched
    """
    result = _copy_state(state)
    for node_id in sorted(state.not_clustered):
        node = context.node(node_id)
        candidates = []
        for cluster in result.clusters:
            if check_cluster(cluster.members + [node], cluster.relay, context).conformant:
                candidates.append((link_length(node, cluster.relay), cluster))
        if not candidates:
            logger.debug(f"Node {node_id} has no relay able to accept it")
            continue
        target = _pick_nearest(candidates)
        target.members.append(node)
        result.not_clustered.discard(node_id)
        logger.debug(f"Node {node_id} assigned to cluster {target.cluster_id}")
    return result


def _reassign(state: ClusterState, context: TopologyContext) -> bool:
    """Move nodes to strictly closer foreign relays; each node moves at most once."""
    moved_any = False
    moved = set()
    for node_id in sorted(state.assigned_ids()):
        if node_id in moved:
            continue
        source = next(c for c in state.clusters if any(n.id == node_id for n in c.members))
        node = next(n for n in source.members if n.id == node_id)
        current = link_length(node, source.relay)
        remaining = [n for n in source.members if n.id != node_id]
        if remaining and not check_cluster(remaining, source.relay, context).conformant:
            continue

        candidates = []
        for cluster in state.clusters:
            if cluster is source:
                continue
            length = link_length(node, cluster.relay)
            if length < current - STRICT_MARGIN and check_cluster(
                cluster.members + [node], cluster.relay, context
            ).conformant:
                candidates.append((length, cluster))
        if not candidates:
            continue
        target = _pick_nearest(candidates)
        source.members = remaining
        target.members.append(node)
        moved.add(node_id)
        moved_any = True
        logger.debug(f"Node {node_id} moved from cluster {source.cluster_id} to {target.cluster_id}")
    return moved_any


def _reach(node: NodeSpec, context: TopologyContext) -> float:
    """Largest in-plane offset at which the node can still reach a relay."""
    threshold = context.budgets[node.id].threshold
    return math.sqrt(max(threshold * threshold - node.z * node.z, 0.0))


def _could_share_relay(members: Sequence[NodeSpec], context: TopologyContext) -> bool:
    positions = np.array([[n.x, n.y] for n in members])
    reach = np.array([_reach(n, context) for n in members])
    gaps = np.hypot(*(positions[:, None, :] - positions[None, :, :]).transpose(2, 0, 1))
    return bool((gaps <= (reach[:, None] + reach[None, :]) * (1 + TIE_TOLERANCE)).all())


def _merge_once(state: ClusterState, context: TopologyContext, optimize: RelayOptimizer,
                rejected: set) -> bool:
    pairs = []
    for a, b in combinations(state.clusters, 2):
        distance = math.hypot(a.relay.x - b.relay.x, a.relay.y - b.relay.y)
        pairs.append((distance, min(a.cluster_id, b.cluster_id), max(a.cluster_id, b.cluster_id), a, b))
    pairs.sort(key=lambda p: p[:3])

    for _, _, _, a, b in pairs:
        signature = frozenset([a.key, b.key])
        if signature in rejected:
            continue
        union = a.sorted_members() + b.sorted_members()
        if not capacity_ok([n.data_rate for n in union], context.config.capacity) or not _could_share_relay(
            union, context
        ):
            rejected.add(signature)
            continue
        result = optimize(union)
        if not result.feasible or not check_cluster(union, result.relay, context).conformant:
            rejected.add(signature)
            continue
        keep, drop = (a, b) if a.cluster_id < b.cluster_id else (b, a)
        keep.members = sorted(union, key=lambda n: n.id)
        keep.relay = result.relay
        drop.members = []
        state.drop_empty()
        logger.debug(f"Merged cluster {drop.cluster_id} into {keep.cluster_id}")
        return True
    return False


def reassign_and_merge(
    state: ClusterState,
    context: TopologyContext,
    optimize: Optional[RelayOptimizer] = None,
) -> Tuple[ClusterState, bool]:
    """
    Move nodes to strictly closer relays, then merge clusters that one relay can serve.

    Args:
        state: Clusters with current relays
        context: Run inputs
        optimize: Relay optimizer for candidate unions (cached by the caller)

    Returns:
        Tuple[ClusterState, bool]: The new state and whether any node moved,
        any clusters merged or any cluster emptied
    """
    optimize = optimize or _default_optimizer(context)
    result = _copy_state(state)
    changed = _reassign(result, context)
    dropped = result.drop_empty()
    if dropped:
        logger.debug(f"Deleted {dropped} emptied cluster(s)")
    changed = changed or dropped > 0

    rejected: set = set()
    while _merge_once(result, context, optimize, rejected):
        changed = True
    return result, changed


def dedicate_relays(
    state: ClusterState,
    context: TopologyContext,
    optimize: Optional[RelayOptimizer] = None,
) -> ClusterState:
    """Give every not-clustered node its own cluster with a relay right above it."""
    optimize = optimize or _default_optimizer(context)
    result = _copy_state(state)
    for node_id in sorted(state.not_clustered):
        node = context.node(node_id)
        outcome = optimize([node])
        relay = outcome.relay if outcome.feasible else RelayPlacement(*context.stack.clamp(node.x, node.y))
        result.clusters.append(Cluster(cluster_id=result.next_cluster_id(), members=[node], relay=relay))
        logger.debug(f"Node {node_id} received a dedicated relay")
    result.not_clustered = set()
    return result


def voronoi_regions(state: ClusterState, context: TopologyContext) -> List[Dict]:
    """Voronoi cell of every relay as its finite vertices.

    With fewer than three relays, or relays on one line, every region is
    reported as unbounded with no vertices.
    """
    clusters = sorted(state.clusters, key=lambda c: c.cluster_id)
    regions = [
        {"cluster_id": c.cluster_id, "relay": [c.relay.x, c.relay.y], "vertices": [], "bounded": False}
        for c in clusters
    ]
    if len(clusters) < 3:
        return regions
    points = np.array([[c.relay.x, c.relay.y] for c in clusters])
    try:
        diagram = Voronoi(points)
    except QhullError:
        logger.warning("Relays are degenerate for a Voronoi diagram, no regions dumped")
        return regions
    for index, region in zip(range(len(clusters)), diagram.point_region):
        vertex_ids = diagram.regions[region]
        regions[index]["bounded"] = bool(vertex_ids) and -1 not in vertex_ids
        regions[index]["vertices"] = [
            [float(v) for v in diagram.vertices[i]] for i in vertex_ids if i != -1
        ]
    return regions
