"""Relay placement: weighted link-length minimization under per-path thresholds.

The objective of a cluster is

    sum_i in A  w_i * (L_i + gamma * |x - x_i| + gamma * |y - y_i|)

subject to L_j <= threshold_j for every member, solved with a log-barrier
and damped Newton steps on the surface rectangle.

With no implant, or with exactly one, A holds every member and the L1
balance term is off. A lone implant then competes with the surface nodes
through its alpha-scaled weight instead of pinning the relay above itself,
so alpha still trades its link length against the surface links. With two
or more implants A holds the implants only and the L1 balance term is on.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from app.agents.clustering.interfaces import TopologyContext
from app.agents.utils.errors import EmptyClusterError
from app.agents.utils.geometry import node_weight
from app.agents.utils.tissue_schema import NodeSpec, PathType, RelayPlacement

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-9


class RelayStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class RelayProblem:
    node_ids: List[str]
    positions: np.ndarray
    depths: np.ndarray
    weights: np.ndarray
    implant_mask: np.ndarray
    thresholds: np.ndarray
    selected: np.ndarray
    u: int
    v: int
    gamma: float
    bounds: Tuple[float, float, float, float]
    centroid: RelayPlacement
    mu: float = 0.1
    mu_decay: float = 0.5
    tolerance: float = 1e-9
    eps: float = 1e-6

    @property
    def size(self) -> int:
        return len(self.node_ids)

    @property
    def implant_count(self) -> int:
        return int(self.implant_mask.sum())

    @property
    def A(self) -> int:
        return int(self.selected.sum())

    @property
    def threshold_ms(self) -> Optional[float]:
        values = self.thresholds[self.implant_mask]
        return float(values.min()) if values.size else None

    @property
    def threshold_ss(self) -> Optional[float]:
        values = self.thresholds[~self.implant_mask]
        return float(values.min()) if values.size else None

    def start_point(self) -> np.ndarray:
        return self.clip(np.array([self.centroid.x, self.centroid.y]))

    def clip(self, point: np.ndarray) -> np.ndarray:
        x1, x2, y1, y2 = self.bounds
        return np.array([min(max(point[0], x1), x2), min(max(point[1], y1), y2)])


@dataclass
class RelayOptimizationResult:
    status: RelayStatus
    relay: Optional[RelayPlacement]
    objective: float = math.inf
    violating_ids: List[str] = field(default_factory=list)
    barrier_rounds: int = 0
    newton_steps: int = 0
    error_message: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.status == RelayStatus.OPTIMAL


def build_relay_problem(members: Sequence[NodeSpec], context: TopologyContext) -> RelayProblem:
    """Assemble weights, selectors and per-path thresholds for one cluster."""
    if not members:
        raise EmptyClusterError()
    config = context.config
    members = sorted(members, key=lambda n: n.id)
    rates = [n.data_rate for n in members]
    implant_mask = np.array([n.is_implant for n in members], dtype=bool)
    implant_count = int(implant_mask.sum())
    u = 1 if implant_count == 0 else 0
    v = 1 if implant_count > 1 else 0
    gamma = (1 - u) * v * config.l1_penalty
    selected = implant_mask.copy() if v == 1 else np.ones(len(members), dtype=bool)

    # one threshold per path: the smallest over the cluster's nodes on that path
    own = np.array([context.budgets[n.id].threshold for n in members], dtype=float)
    thresholds = own.copy()
    for mask in (implant_mask, ~implant_mask):
        if mask.any():
            thresholds[mask] = own[mask].min()

    return RelayProblem(
        node_ids=[n.id for n in members],
        positions=np.array([[n.x, n.y] for n in members], dtype=float),
        depths=np.array([n.z for n in members], dtype=float),
        weights=np.array([node_weight(n, rates, config) for n in members], dtype=float),
        implant_mask=implant_mask,
        thresholds=thresholds,
        selected=selected,
        u=u,
        v=v,
        gamma=gamma,
        bounds=context.bounds,
        centroid=centroid_placement(members),
        mu=config.barrier_mu,
        mu_decay=config.barrier_decay,
        tolerance=config.barrier_tolerance,
        eps=config.smoothing_eps,
    )


def link_lengths_at(problem: RelayProblem, points: np.ndarray) -> np.ndarray:
    """Exact link lengths, shape (len(points), problem.size)."""
    points = np.atleast_2d(points)
    d = points[:, None, :] - problem.positions[None, :, :]
    return np.sqrt((d ** 2).sum(axis=2) + problem.depths[None, :] ** 2)


def relay_objective(problem: RelayProblem, points: np.ndarray) -> np.ndarray:
    """Exact (unsmoothed, barrier-free) objective at each point."""
    points = np.atleast_2d(points)
    lengths = link_lengths_at(problem, points)[:, problem.selected]
    d = np.abs(points[:, None, :] - problem.positions[None, problem.selected, :]).sum(axis=2)
    w = problem.weights[problem.selected]
    return (w[None, :] * (lengths + problem.gamma * d)).sum(axis=1)


def feasible_mask(problem: RelayProblem, points: np.ndarray, tolerance: float = FEASIBILITY_TOLERANCE) -> np.ndarray:
    lengths = link_lengths_at(problem, points)
    limit = problem.thresholds[None, :] * (1 + tolerance)
    return (lengths <= limit).all(axis=1)


class BarrierNewtonSolver:
    """Damped Newton on the smoothed, log-barrier augmented relay objective."""

    def __init__(self, problem: RelayProblem, slope_ratio: float = 0.25, shrink_ratio: float = 0.5,
                 max_newton_steps: int = 100, max_rounds: int = 200):
        if not 0 < slope_ratio < 0.5:
            raise ValueError("slope_ratio should be 0 < a < 0.5")
        if not 0 < shrink_ratio < 1:
            raise ValueError("shrink_ratio should be 0 < b < 1")
        self.problem = problem
        self.slope_ratio = slope_ratio
        self.shrink_ratio = shrink_ratio
        self.max_newton_steps = max_newton_steps
        self.max_rounds = max_rounds
        self.newton_steps = 0
        self.rounds = 0

    def _terms(self, point: np.ndarray, mu: float, order: int):
        p = self.problem
        eps2 = p.eps ** 2
        d = point[None, :] - p.positions
        radius = np.sqrt((d ** 2).sum(axis=1) + p.depths ** 2 + eps2)
        slack = p.thresholds - radius
        if np.any(slack <= 0):
            return math.inf, None, None

        sel = p.selected
        w = p.weights[sel]
        abs_xy = np.sqrt(d[sel] ** 2 + eps2)
        value = float((w * (radius[sel] + p.gamma * abs_xy.sum(axis=1))).sum() - mu * np.log(slack).sum())
        if order == 0:
            return value, None, None

        unit = d / radius[:, None]
        grad = (w[:, None] * (unit[sel] + p.gamma * d[sel] / abs_xy)).sum(axis=0)
        grad += mu * (unit / slack[:, None]).sum(axis=0)

        # Hessian of sqrt(|d|^2 + c): (I * r^2 - d d^T) / r^3
        outer = d[:, :, None] * d[:, None, :]
        eye = np.eye(2)[None, :, :]
        radial = (eye * (radius ** 2)[:, None, None] - outer) / (radius ** 3)[:, None, None]
        hess = (w[:, None, None] * radial[sel]).sum(axis=0)
        hess += p.gamma * np.diag((w[:, None] * eps2 / abs_xy ** 3).sum(axis=0))
        hess += mu * (radial / slack[:, None, None]).sum(axis=0)
        hess += mu * (unit[:, :, None] * unit[:, None, :] / (slack ** 2)[:, None, None]).sum(axis=0)
        return value, grad, hess

    def _newton(self, start: np.ndarray, mu: float) -> np.ndarray:
        point = start
        for _ in range(self.max_newton_steps):
            value, grad, hess = self._terms(point, mu, order=2)
            try:
                direction = np.linalg.solve(hess + 1e-12 * np.eye(2), -grad)
            except np.linalg.LinAlgError:
                direction = -grad
            decrement = float(-grad @ direction)
            if decrement / 2 <= 1e-14 * max(1.0, abs(value)):
                break
            step = 1.0
            accepted = False
            while step > 1e-16:
                candidate = self.problem.clip(point + step * direction)
                moved = candidate - point
                candidate_value, _, _ = self._terms(candidate, mu, order=0)
                if candidate_value < value and candidate_value <= value + self.slope_ratio * float(grad @ moved):
                    accepted = True
                    break
                step *= self.shrink_ratio
            self.newton_steps += 1
            if not accepted:
                break
            point = candidate
        return point

    def solve(self, start: np.ndarray) -> np.ndarray:
        p = self.problem
        mu = p.mu
        point = start
        for self.rounds in range(1, self.max_rounds + 1):
            point = self._newton(point, mu)
            objective = float(relay_objective(p, point)[0])
            if p.size * mu < p.tolerance * max(1.0, abs(objective)):
                break
            mu *= p.mu_decay
        return point


def _max_violation(problem: RelayProblem, point: np.ndarray) -> float:
    lengths = link_lengths_at(problem, problem.clip(point))[0]
    return float((lengths - problem.thresholds).max())


def find_interior_point(problem: RelayProblem) -> Tuple[np.ndarray, float]:
    """Point minimizing the largest threshold violation, searched from the centroid and every member."""
    starts = [problem.start_point()] + [p for p in problem.positions]
    best_point, best_value = starts[0], _max_violation(problem, starts[0])
    for start in starts:
        result = minimize(
            lambda q: _max_violation(problem, q),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
        )
        point = problem.clip(result.x)
        value = _max_violation(problem, point)
        if value < best_value:
            best_point, best_value = point, value
        if best_value < -1e-6:
            break
    return best_point, best_value


def _kink_candidates(problem: RelayProblem, point: np.ndarray) -> np.ndarray:
    """Points where the smoothed terms hide a kink of the exact objective."""
    sel_positions = problem.positions[problem.selected]
    flat = problem.depths[problem.selected] == 0
    candidates = [point[None, :], sel_positions[flat]]
    if problem.gamma > 0:
        xs = sel_positions[:, 0]
        ys = sel_positions[:, 1]
        candidates.append(np.column_stack([xs, np.full_like(xs, point[1])]))
        candidates.append(np.column_stack([np.full_like(ys, point[0]), ys]))
        grid_x, grid_y = np.meshgrid(xs, ys)
        candidates.append(np.column_stack([grid_x.ravel(), grid_y.ravel()]))
    return np.vstack([problem.clip(c) for c in np.vstack(candidates)])


def solve_relay_problem(problem: RelayProblem) -> RelayOptimizationResult:
    """
    Minimize the relay objective of a prepared problem.

    Args:
        problem: Cluster weights, selectors and thresholds

    Returns:
        RelayOptimizationResult: OPTIMAL with the relay, or INFEASIBLE with
        the ids of the nodes no surface point can serve together
    """
    if problem.size == 1:
        point = problem.clip(problem.positions[0])
        if not feasible_mask(problem, point)[0]:
            return RelayOptimizationResult(
                status=RelayStatus.INFEASIBLE, relay=None, violating_ids=list(problem.node_ids),
                error_message="single node beyond its own threshold",
            )
        return RelayOptimizationResult(
            status=RelayStatus.OPTIMAL,
            relay=RelayPlacement(x=float(point[0]), y=float(point[1])),
            objective=float(relay_objective(problem, point)[0]),
        )

    start = problem.start_point()
    if _max_violation(problem, start) > -problem.eps:
        start, violation = find_interior_point(problem)
        if violation > FEASIBILITY_TOLERANCE * max(1.0, float(problem.thresholds.max())):
            lengths = link_lengths_at(problem, start)[0]
            violators = [nid for nid, l, t in zip(problem.node_ids, lengths, problem.thresholds) if l > t]
            logger.debug(f"Relay problem infeasible, violators: {violators}")
            return RelayOptimizationResult(
                status=RelayStatus.INFEASIBLE, relay=None, violating_ids=violators,
                error_message=f"largest threshold violation {violation:.6g} cm",
            )
        if violation > -problem.eps:
            # the feasible set is (numerically) a single point
            return RelayOptimizationResult(
                status=RelayStatus.OPTIMAL,
                relay=RelayPlacement(x=float(start[0]), y=float(start[1])),
                objective=float(relay_objective(problem, start)[0]),
            )

    solver = BarrierNewtonSolver(problem)
    point = solver.solve(start)

    candidates = _kink_candidates(problem, point)
    values = relay_objective(problem, candidates)
    values[~feasible_mask(problem, candidates)] = math.inf
    best = int(np.argmin(values))
    if not values[best] < values[0]:
        best = 0
    chosen = candidates[best]
    return RelayOptimizationResult(
        status=RelayStatus.OPTIMAL,
        relay=RelayPlacement(x=float(chosen[0]), y=float(chosen[1])),
        objective=float(values[best]),
        barrier_rounds=solver.rounds,
        newton_steps=solver.newton_steps,
    )


def optimize_relay(members: Sequence[NodeSpec], context: TopologyContext) -> RelayOptimizationResult:
    return solve_relay_problem(build_relay_problem(members, context))


def extreme_center_placement(members: Sequence[NodeSpec]) -> RelayPlacement:
    """Centre of the members' bounding box."""
    xs = [n.x for n in members]
    ys = [n.y for n in members]
    return RelayPlacement(x=(min(xs) + max(xs)) / 2, y=(min(ys) + max(ys)) / 2)


def centroid_placement(members: Sequence[NodeSpec]) -> RelayPlacement:
    return RelayPlacement(x=float(np.mean([n.x for n in members])), y=float(np.mean([n.y for n in members])))


def weighted_link_sum(members: Sequence[NodeSpec], relay: RelayPlacement, context: TopologyContext) -> float:
    """Sum of w * L over every member, the plain weighted objective used for baselines."""
    rates = [n.data_rate for n in members]
    total = 0.0
    for node in members:
        dx, dy = node.x - relay.x, node.y - relay.y
        total += node_weight(node, rates, context.config) * math.sqrt(dx * dx + dy * dy + node.z * node.z)
    return total
