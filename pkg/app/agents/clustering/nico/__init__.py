from .relay_optimizer import (
    RelayOptimizationResult,
    RelayProblem,
    RelayStatus,
    build_relay_problem,
    centroid_placement,
    extreme_center_placement,
    feasible_mask,
    optimize_relay,
    relay_objective,
    solve_relay_problem,
    weighted_link_sum,
)
from .cluster_reformer import ConformanceReport, check_cluster, reform_cluster
from .relay_assignment import assign_nearest_relay, dedicate_relays, reassign_and_merge, voronoi_regions
from .nico_pipeline import (
    IterationFlag,
    IterationRecord,
    NicoDiagnostics,
    NicoPhase,
    NicoResult,
    NicoStep,
    NicoTermination,
    NodeLink,
    run_nico,
)

__all__ = [
    "RelayOptimizationResult",
    "RelayProblem",
    "RelayStatus",
    "build_relay_problem",
    "centroid_placement",
    "extreme_center_placement",
    "feasible_mask",
    "optimize_relay",
    "relay_objective",
    "solve_relay_problem",
    "weighted_link_sum",
    "ConformanceReport",
    "check_cluster",
    "reform_cluster",
    "assign_nearest_relay",
    "dedicate_relays",
    "reassign_and_merge",
    "voronoi_regions",
    "IterationFlag",
    "IterationRecord",
    "NicoDiagnostics",
    "NicoPhase",
    "NicoResult",
    "NicoStep",
    "NicoTermination",
    "NodeLink",
    "run_nico",
]
