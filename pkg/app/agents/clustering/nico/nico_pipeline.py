"""Phase II: iterative relay optimization, eviction, reassignment and merging."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from app.agents.channel.link_budget import link_power, node_lifetime
from app.agents.clustering.interfaces import ClusteringPhaseInterface, TopologyContext
from app.agents.clustering.nico.cluster_reformer import reform_cluster
from app.agents.clustering.nico.relay_assignment import assign_nearest_relay, dedicate_relays, reassign_and_merge
from app.agents.clustering.nico.relay_optimizer import (
    RelayOptimizationResult,
    build_relay_problem,
    optimize_relay,
    relay_objective,
)
from app.agents.utils.geometry import link_length
from app.agents.utils.tissue_schema import Cluster, ClusterState, NodeSpec, RelayPlacement


class NicoStep(Enum):
    RELAY_OPTIMIZATION = "relay_optimization"
    REFORMATION = "reformation"
    ASSIGNMENT = "assignment"
    REASSIGNMENT = "reassignment"
    DEDICATION = "dedication"
    FINALIZE = "finalize"


class NicoTermination(Enum):
    CONVERGED = "converged"
    OSCILLATION = "oscillation"
    MAX_ITERATIONS = "max_iterations"


@dataclass
class IterationRecord:
    iteration: int
    step: NicoStep
    K: int
    not_clustered: int
    objective: float

    def as_line(self) -> str:
        return (
            f"iteration={self.iteration} step={self.step.value} K={self.K} "
            f"nl={self.not_clustered} objective={self.objective:.9g}"
        )

    def to_dict(self) -> Dict:
        return {
            "iteration": self.iteration,
            "step": self.step.value,
            "K": self.K,
            "not_clustered": self.not_clustered,
            "objective": self.objective,
        }


@dataclass
class IterationFlag:
    """End-of-iteration status checked by the termination rule."""
    changed: bool
    iteration: int
    not_clustered: Tuple[str, ...] = ()


@dataclass
class NicoDiagnostics:
    iterations: int = 0
    termination: Optional[NicoTermination] = None
    trace: List[IterationRecord] = field(default_factory=list)
    flags: List[IterationFlag] = field(default_factory=list)
    message: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.termination in (NicoTermination.CONVERGED, NicoTermination.OSCILLATION)


@dataclass
class NodeLink:
    node_id: str
    cluster_id: int
    length: float
    pt: float
    lifetime_days: float


@dataclass
class NicoResult:
    state: ClusterState
    diagnostics: NicoDiagnostics
    links: List[NodeLink] = field(default_factory=list)


class NicoPhase(ClusteringPhaseInterface):
    """
    Iterates relay optimization, reformation, nearest-relay assignment,
    reassignment/merging and dedicated relays until memberships settle.

    The loop stops when an iteration changes nothing, leaves NL empty and
    keeps K <= n. A membership layout seen before ends the loop as an
    oscillation; running out of iterations ends it unconverged. Both of
    those finish with one last optimize-reform-dedicate pass so the final
    clusters still meet every bound.
    """

    def __init__(self, context: TopologyContext, trace: bool = False):
        super().__init__(context)
        self.logger = logging.getLogger(__name__)
        self.trace_level = logging.INFO if trace else logging.DEBUG
        self._relay_cache: Dict[FrozenSet[str], RelayOptimizationResult] = {}
        self.result: Optional[NicoResult] = None

    @property
    def name(self) -> str:
        return "nico"

    def optimize(self, members: Sequence[NodeSpec]) -> RelayOptimizationResult:
        key = frozenset(n.id for n in members)
        if key not in self._relay_cache:
            self._relay_cache[key] = optimize_relay(members, self.context)
        return self._relay_cache[key]

    def objective(self, state: ClusterState) -> float:
        total = 0.0
        for cluster in state.clusters:
            if cluster.relay is None:
                continue
            problem = build_relay_problem(cluster.members, self.context)
            total += float(relay_objective(problem, np.array([cluster.relay.x, cluster.relay.y]))[0])
        return total

    def _record(self, diagnostics: NicoDiagnostics, iteration: int, step: NicoStep, state: ClusterState):
        state.check_conservation(self.context.nodes)
        record = IterationRecord(
            iteration=iteration,
            step=step,
            K=state.K,
            not_clustered=len(state.not_clustered),
            objective=self.objective(state),
        )
        diagnostics.trace.append(record)
        self.logger.log(self.trace_level, record.as_line())

    def optimize_relays(self, state: ClusterState) -> Tuple[ClusterState, bool]:
        """Step 1: optimal relay per cluster; infeasible clusters shed certificate nodes."""
        result = ClusterState(not_clustered=set(state.not_clustered))
        changed = False
        for cluster in state.clusters:
            members = cluster.sorted_members()
            reference = cluster.relay or RelayPlacement(
                x=float(np.mean([n.x for n in members])), y=float(np.mean([n.y for n in members]))
            )
            outcome = None
            while members:
                outcome = self.optimize(members)
                if outcome.feasible:
                    break
                certificate = [n for n in members if n.id in outcome.violating_ids] or members
                victim = max(certificate, key=lambda n: (n.is_implant, link_length(n, reference), n.id))
                self.logger.debug(f"Cluster {cluster.cluster_id} infeasible, evicting {victim.id}")
                members = [n for n in members if n.id != victim.id]
                result.not_clustered.add(victim.id)
                changed = True
            if members:
                result.clusters.append(Cluster(cluster.cluster_id, members, outcome.relay))
        return result, changed

    def reform(self, state: ClusterState) -> Tuple[ClusterState, bool]:
        """Step 2: evict bound and capacity offenders at the optimized relays."""
        result = ClusterState(not_clustered=set(state.not_clustered))
        changed = False
        for cluster in state.clusters:
            reformed, evicted = reform_cluster(cluster, self.context)
            if evicted:
                changed = True
                result.not_clustered.update(n.id for n in evicted)
            if reformed.members:
                result.clusters.append(reformed)
        return result, changed

    def _finalize(self, state: ClusterState, diagnostics: NicoDiagnostics, iteration: int) -> ClusterState:
        state, _ = self.optimize_relays(state)
        state, _ = self.reform(state)
        state = dedicate_relays(state, self.context, self.optimize)
        self._record(diagnostics, iteration, NicoStep.FINALIZE, state)
        return state

    def iterate(self, state: ClusterState, iteration: int, diagnostics: NicoDiagnostics) -> Tuple[ClusterState, bool]:
        """One pass of steps 1 to 5."""
        start_signature = state.membership_signature()
        start_nl = set(state.not_clustered)

        state, evicted_infeasible = self.optimize_relays(state)
        self._record(diagnostics, iteration, NicoStep.RELAY_OPTIMIZATION, state)
        state, evicted = self.reform(state)
        self._record(diagnostics, iteration, NicoStep.REFORMATION, state)

        before = set(state.not_clustered)
        state = assign_nearest_relay(state, self.context)
        assigned = before != state.not_clustered
        self._record(diagnostics, iteration, NicoStep.ASSIGNMENT, state)

        state, moved = reassign_and_merge(state, self.context, self.optimize)
        self._record(diagnostics, iteration, NicoStep.REASSIGNMENT, state)

        dedicated = bool(state.not_clustered)
        state = dedicate_relays(state, self.context, self.optimize)
        self._record(diagnostics, iteration, NicoStep.DEDICATION, state)

        changed = (
            evicted_infeasible or evicted or assigned or moved or dedicated
            or bool(start_nl)
            or state.membership_signature() != start_signature
        )
        return state, changed

    def run(self, state: Optional[ClusterState] = None) -> ClusterState:
        if state is None:
            raise ValueError("NICO needs an initial cluster state")
        n = len(self.context.nodes)
        max_iterations = self.context.config.max_iterations
        diagnostics = NicoDiagnostics()
        seen: Set[FrozenSet[FrozenSet[str]]] = {state.membership_signature()}

        for iteration in range(1, max_iterations + 1):
            state, changed = self.iterate(state, iteration, diagnostics)
            flag = IterationFlag(changed=changed, iteration=iteration, not_clustered=tuple(sorted(state.not_clustered)))
            diagnostics.flags.append(flag)
            diagnostics.iterations = iteration

            if not changed and not state.not_clustered and state.K <= n:
                diagnostics.termination = NicoTermination.CONVERGED
                break
            signature = state.membership_signature()
            if signature in seen:
                self.logger.warning(f"NICO revisited a membership layout at iteration {iteration}, freezing")
                diagnostics.termination = NicoTermination.OSCILLATION
                state = self._finalize(state, diagnostics, iteration)
                break
            seen.add(signature)
        else:
            diagnostics.termination = NicoTermination.MAX_ITERATIONS
            diagnostics.message = f"no convergence within {max_iterations} iterations"
            self.logger.warning(f"NICO stopped after {max_iterations} iterations without converging")
            state = self._finalize(state, diagnostics, max_iterations)

        state.clusters.sort(key=lambda c: c.cluster_id)
        self.result = NicoResult(state=state, diagnostics=diagnostics, links=self.node_links(state))
        self.logger.info(
            f"NICO finished: K={state.K}, iterations={diagnostics.iterations}, "
            f"termination={diagnostics.termination.value}"
        )
        return state

    def node_links(self, state: ClusterState) -> List[NodeLink]:
        """Link length, transmit power and battery lifetime of every assigned node."""
        config = self.context.config
        links = []
        for cluster in state.clusters:
            for node in cluster.sorted_members():
                length = link_length(node, cluster.relay)
                pt = link_power(config, self.context.model, node, length)
                links.append(
                    NodeLink(
                        node_id=node.id,
                        cluster_id=cluster.cluster_id,
                        length=length,
                        pt=pt,
                        lifetime_days=node_lifetime(pt, config.lifetime),
                    )
                )
        return sorted(links, key=lambda link: link.node_id)


def run_nico(initial_state: ClusterState, context: TopologyContext, trace: bool = False) -> NicoResult:
    phase = NicoPhase(context, trace=trace)
    phase.run(initial_state)
    return phase.result
