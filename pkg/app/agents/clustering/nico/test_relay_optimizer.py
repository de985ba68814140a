import math

import numpy as np
import pytest

from app.agents.clustering.nico import (
    RelayStatus,
    build_relay_problem,
    centroid_placement,
    extreme_center_placement,
    feasible_mask,
    optimize_relay,
    relay_objective,
    weighted_link_sum,
)
from app.agents.utils import RelayPlacement, ScenarioConfig, Tissue
from app.conftest import build_node

TIGHT = ScenarioConfig(threshold_override_ss=6.0, threshold_override_ms=7.0)


def random_cluster(rng, size, implant_fraction=0.4, origin=(10.0, 10.0), side=8.0, rates=(1, 5)):
    nodes = []
    for i in range(size):
        implant = rng.random() < implant_fraction
        nodes.append(
            build_node(
                f"m{i}",
                origin[0] + float(rng.uniform(0, side)),
                origin[1] + float(rng.uniform(0, side)),
                z=float(rng.uniform(0.2, 3.0)) if implant else 0.0,
                tissue=Tissue.MUSCLE if implant else Tissue.SKIN,
                rate=float(rng.integers(rates[0], rates[1] + 1)),
            )
        )
    return nodes


def grid_minimum(problem, x_range, y_range, step=0.05):
    xs = np.arange(x_range[0], x_range[1] + step / 2, step)
    ys = np.arange(y_range[0], y_range[1] + step / 2, step)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    values = relay_objective(problem, points)
    values[~feasible_mask(problem, points)] = np.inf
    return float(values.min())


def test_single_surface_node_gets_relay_on_top(make_context):
    node = build_node("a", 30.0, 40.0)
    result = optimize_relay([node], make_context([node]))
    assert result.status == RelayStatus.OPTIMAL
    assert (result.relay.x, result.relay.y) == (30.0, 40.0)
    assert result.objective == 0.0


def test_single_implant_gets_relay_directly_above(make_context):
    node = build_node("a", 30.0, 40.0, z=2.5)
    context = make_context([node])
    result = optimize_relay([node], context)
    assert (result.relay.x, result.relay.y) == (30.0, 40.0)
    problem = build_relay_problem([node], context)
    assert result.objective == pytest.approx(problem.weights[0] * 2.5)


def test_problem_selectors_follow_implant_count(make_context):
    surface = [build_node("a", 10, 10), build_node("b", 12, 10)]
    one = surface + [build_node("c", 11, 11, z=1.0)]
    two = one + [build_node("d", 11, 9, z=2.0)]
    context = make_context(two)
    p0, p1, p2 = (build_relay_problem(m, context) for m in (surface, one, two))
    assert (p0.u, p0.v, p0.A, p0.gamma) == (1, 0, 2, 0.0)
    assert (p1.u, p1.v, p1.A, p1.gamma) == (0, 0, 3, 0.0)
    assert (p2.u, p2.v, p2.A) == (0, 1, 2)
    assert p2.gamma == pytest.approx(context.config.l1_penalty)


def test_single_implant_cluster_weighs_every_member(make_context):
    nodes = [build_node("a", 10, 10), build_node("b", 12, 10), build_node("c", 11, 11, z=1.0)]
    context = make_context(nodes)
    problem = build_relay_problem(nodes, context)
    assert problem.selected.all()
    away = RelayPlacement(x=13.0, y=12.0)
    objective = relay_objective(problem, np.array([away.x, away.y]))[0]
    assert objective == pytest.approx(weighted_link_sum(nodes, away, context))


def test_solver_starts_from_member_centroid(make_context):
    nodes = [build_node("a", 10, 10), build_node("b", 14, 10), build_node("c", 12, 16)]
    problem = build_relay_problem(nodes, make_context(nodes))
    assert problem.centroid == centroid_placement(nodes)
    assert problem.start_point().tolist() == pytest.approx([12.0, 12.0])


def test_infeasible_cluster_returns_certificate(make_context):
    nodes = [build_node("a", 10.0, 10.0), build_node("b", 40.0, 10.0)]
    result = optimize_relay(nodes, make_context(nodes))
    assert result.status == RelayStatus.INFEASIBLE
    assert result.relay is None
    assert result.violating_ids == ["a", "b"]


def test_optimizer_matches_grid_oracle(make_context):
    rng = np.random.default_rng(7)
    for _ in range(100):
        nodes = random_cluster(rng, int(rng.integers(2, 9)))
        context = make_context(nodes, TIGHT)
        result = optimize_relay(nodes, context)
        assert result.status == RelayStatus.OPTIMAL
        problem = build_relay_problem(nodes, context)
        point = np.array([result.relay.x, result.relay.y])
        assert feasible_mask(problem, point)[0]
        oracle = grid_minimum(problem, (10.0, 18.0), (10.0, 18.0))
        assert result.objective <= oracle + 1e-6 * abs(oracle)


def test_optimizer_beats_random_feasible_perturbations(make_context):
    rng = np.random.default_rng(8)
    nodes = random_cluster(rng, 7, implant_fraction=0.6)
    context = make_context(nodes, TIGHT)
    result = optimize_relay(nodes, context)
    problem = build_relay_problem(nodes, context)
    points = np.array([result.relay.x, result.relay.y]) + rng.normal(0.0, 0.5, size=(1000, 2))
    values = relay_objective(problem, points)[feasible_mask(problem, points)]
    assert values.size > 0
    assert (values >= result.objective * (1 - 1e-7)).all()


def test_optimized_relay_dominates_baselines(make_context):
    rng = np.random.default_rng(9)
    lam = 11.4 / math.sqrt(2)
    cell = (lam, lam)
    for _ in range(50):
        nodes = random_cluster(rng, 6, implant_fraction=0.0, origin=cell, side=0.9 * lam)
        context = make_context(nodes)
        result = optimize_relay(nodes, context)
        cell_center = RelayPlacement(x=1.5 * lam, y=1.5 * lam)
        optimized = weighted_link_sum(nodes, result.relay, context)
        assert optimized == pytest.approx(result.objective)
        assert optimized <= weighted_link_sum(nodes, cell_center, context) + 1e-9
        assert optimized <= weighted_link_sum(nodes, extreme_center_placement(nodes), context) + 1e-9


def test_heavy_surface_implant_pulls_relay(make_context):
    nodes = [
        build_node("1", 10.0, 10.0, z=0.0, tissue=Tissue.MUSCLE),
        build_node("2", 7.0, 8.0),
        build_node("3", 13.0, 8.5),
        build_node("4", 12.5, 13.0),
        build_node("5", 7.5, 12.5),
        build_node("6", 10.5, 6.5),
    ]
    result = optimize_relay(nodes, make_context(nodes, ScenarioConfig(alpha=4.0)))
    implant = math.hypot(result.relay.x - 10.0, result.relay.y - 10.0)
    surface = np.mean([math.hypot(result.relay.x - n.x, result.relay.y - n.y) for n in nodes[1:]])
    assert implant / surface < 0.15


def implant_link(alpha, seed, make_context):
    rng = np.random.default_rng(seed)
    implant = build_node("1", 14.0 + float(rng.uniform(-3, 3)), 14.0 + float(rng.uniform(-3, 3)), z=0.0,
                         tissue=Tissue.MUSCLE)
    nodes = [implant] + random_cluster(rng, 5, implant_fraction=0.0, rates=(1, 1))
    result = optimize_relay(nodes, make_context(nodes, ScenarioConfig(alpha=alpha)))
    return math.hypot(result.relay.x - implant.x, result.relay.y - implant.y)


@pytest.mark.slow
def test_implant_link_shrinks_with_alpha(make_context):
    means = [np.mean([implant_link(alpha, seed, make_context) for seed in range(50)]) for alpha in (2.0, 4.0, 10.0)]
    assert means[0] >= means[1] - 1e-9 >= means[2] - 2e-9
    assert means[2] * 5 < means[0]


def node_one_link(rate_one, peer_rate, seed, make_context):
    rng = np.random.default_rng(seed)
    first = build_node("1", 2.0, 2.0, rate=rate_one)
    peers = [
        build_node(f"p{i}", float(rng.uniform(6, 9)), float(rng.uniform(6, 9)), rate=peer_rate)
        for i in range(5)
    ]
    nodes = [first] + peers
    result = optimize_relay(nodes, make_context(nodes))
    return math.hypot(result.relay.x - 2.0, result.relay.y - 2.0)


@pytest.mark.slow
def test_node_link_follows_its_data_rate(make_context):
    rising_own = [np.mean([node_one_link(r, 1.0, s, make_context) for s in range(50)]) for r in range(1, 6)]
    assert all(a > b for a, b in zip(rising_own, rising_own[1:]))
    rising_peers = [np.mean([node_one_link(5.0, r, s, make_context) for s in range(50)]) for r in range(1, 6)]
    assert all(a < b for a, b in zip(rising_peers, rising_peers[1:]))
