"""
tests for the search module
"""
import math
import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from RoadmapTools.lib.belief import BeliefModel
from RoadmapTools.lib.halton import HaltonSpec, halton_prefix
from RoadmapTools.lib.roadmap import GOAL, START, Edge, EdgeStatus, InfeasibleError, Roadmap, build_samples
from RoadmapTools.lib.search import (
    AlphaBlend,
    ExpectedLength,
    alpha_steps,
    beta_for_alpha,
    blended_weight,
    expected_weight,
    lazy_eval_path,
    lazy_sp_baseline,
    optimistic_search,
    plan,
    pomp,
)
from RoadmapTools.lib.world import Obstacle, ScenarioParams, World, generate_scenario, num_edge_configs
from .utils import DIRECT_LENGTH_2D, caged_world, empty_world, wall_world


def __edge(length, measure=None, status=EdgeStatus.UNKNOWN):
    return Edge(0, 1, length, status=status, measure=measure)


def __dijkstra_reference(roadmap, weight):
    graph = nx.Graph()
    for edge in roadmap.edges():
        if edge.status is not EdgeStatus.BLOCKED:
            graph.add_edge(edge.u, edge.v, weight=weight(edge))
    return nx.shortest_path_length(graph, START, GOAL, weight="weight")


def halton_roadmap(n, r, d=2):
    samples = build_samples(np.full(d, 0.25), np.full(d, 0.75), halton_prefix(n - 2, HaltonSpec(d)))
    return Roadmap(samples, n, r)


def test_blended_weight():
    edge = __edge(1.0, measure=2.0)
    assert blended_weight(edge, 0.5) == pytest.approx(1.5)
    assert blended_weight(edge, 0.0) == 2.0
    assert blended_weight(edge, 1.0) == 1.0
    assert blended_weight(__edge(1.0), 1.0) == 1.0
    assert blended_weight(__edge(1.0, status=EdgeStatus.BLOCKED), 0.3) == math.inf
    assert blended_weight(__edge(1.0, status=EdgeStatus.FREE), 0.0) == 0.0


def test_expected_weight():
    assert expected_weight(__edge(1.0), 2.0, 0.5) == pytest.approx(2.0)
    assert expected_weight(__edge(1.0), 0.0, 0.3) == 1.0
    assert expected_weight(__edge(1.0), 5.0, 1.0) == 1.0


def test_policies_validate():
    with pytest.raises(ValueError):
        AlphaBlend(1.5)
    with pytest.raises(ValueError):
        ExpectedLength(-1.0)


@pytest.mark.parametrize(
    "d_alpha, expected",
    [
        (0.3, [0.0, 0.3, 0.6, 0.9, 1.0]),
        (0.5, [0.0, 0.5, 1.0]),
        (1.0, [0.0, 1.0]),
    ],
)
def test_alpha_steps(d_alpha, expected):
    assert alpha_steps(d_alpha) == pytest.approx(expected)
    assert alpha_steps(d_alpha)[-1] == 1.0


def test_alpha_steps_default():
    steps = alpha_steps(0.1)
    assert len(steps) == 11
    assert steps[0] == 0.0 and steps[-1] == 1.0
    with pytest.raises(ValueError):
        alpha_steps(0.0)


@settings(max_examples=1000)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(1e-4, 1e-2))
def test_beta_for_alpha(alpha, rho, step):
    beta = beta_for_alpha(alpha, rho)
    assert 0 < beta < math.inf
    # both penalties charge the same for an unknown edge and fall as rho grows
    assert alpha * beta * (1 - rho) == pytest.approx((1 - alpha) * -math.log(rho))
    assert (1 - alpha) / alpha * -math.log(min(rho + step, 0.999)) < (1 - alpha) / alpha * -math.log(rho)
    assert beta * (1 - min(rho + step, 0.999)) < beta * (1 - rho)


def test_optimistic_search_direct_edge():
    roadmap = halton_roadmap(40, math.sqrt(2))
    assert optimistic_search(roadmap, AlphaBlend(1.0)) == (START, GOAL)


def test_optimistic_search_does_not_evaluate():
    world = wall_world()
    roadmap = halton_roadmap(60, 0.4)
    optimistic_search(roadmap, AlphaBlend(1.0))
    assert world.check_counter == 0
    assert all(e.status is EdgeStatus.UNKNOWN for e in roadmap.edges())


@pytest.mark.parametrize("r", [0.2, 0.3])
def test_optimistic_search_is_shortest(r):
    roadmap = halton_roadmap(300, r)
    path = optimistic_search(roadmap, AlphaBlend(1.0))
    assert roadmap.path_length(path) == pytest.approx(__dijkstra_reference(roadmap, lambda e: e.length))


def test_measure_search_minimizes_config_count():
    # start and goal too far apart for a direct edge, three detours of different shapes
    samples = np.array([[0.1, 0.5], [0.9, 0.5], [0.5, 0.9], [0.5, 0.3], [0.3, 0.4]])
    roadmap = Roadmap(samples, 5, 0.75)
    roadmap.ensure_measures(BeliefModel())
    path = optimistic_search(roadmap, AlphaBlend(0.0))

    def configs(edge):
        return num_edge_configs(edge.length, roadmap.resolution)

    assert sum(configs(e) for e in roadmap.path_edges(path)) == __dijkstra_reference(roadmap, configs)


def test_expected_length_search():
    roadmap = halton_roadmap(100, 0.3)
    roadmap.ensure_measures(BeliefModel())
    policy = ExpectedLength(0.5)
    path = optimistic_search(roadmap, policy)
    assert roadmap.path_length(path) + sum(
        (1 - math.exp(-e.w_m)) * 0.5 for e in roadmap.path_edges(path)
    ) == pytest.approx(__dijkstra_reference(roadmap, policy.weight))


def __evaluated_roadmap(seed, n=150, r=0.3):
    """
    roadmap with a random share of edges already known free or blocked and prior measures
    on the rest
    """
    roadmap = halton_roadmap(n, r)
    rng = np.random.default_rng(seed)
    for edge in roadmap.edges():
        draw = rng.uniform()
        if draw < 0.3:
            edge.status = EdgeStatus.FREE
        elif draw < 0.4:
            edge.status = EdgeStatus.BLOCKED
    roadmap.ensure_measures(BeliefModel(frozen=True))
    return roadmap


def __path_cost(roadmap, path, weight):
    return sum(weight(e) for e in roadmap.path_edges(path))


@pytest.mark.parametrize("seed", range(3))
def test_candidates_trade_measure_for_length(seed):
    roadmap = __evaluated_roadmap(seed)
    candidates = [optimistic_search(roadmap, AlphaBlend(alpha)) for alpha in alpha_steps(0.05)]
    measures = [__path_cost(roadmap, p, lambda e: e.w_m) for p in candidates]
    lengths = [roadmap.path_length(p) for p in candidates]
    assert all(a <= b + 1e-9 for a, b in zip(measures, measures[1:]))
    assert all(a >= b - 1e-9 for a, b in zip(lengths, lengths[1:]))
    assert len(set(candidates)) > 1


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7, 1.0])
def test_heuristic_keeps_search_exact(seed, alpha):
    roadmap = __evaluated_roadmap(seed)
    policy = AlphaBlend(alpha)
    guided = optimistic_search(roadmap, policy)
    blind = optimistic_search(roadmap, policy, heuristic_scale=0.0)
    assert __path_cost(roadmap, guided, policy.weight) == pytest.approx(
        __path_cost(roadmap, blind, policy.weight), abs=1e-9
    )


def test_optimistic_search_infeasible():
    roadmap = halton_roadmap(40, 0.5)
    for edge in roadmap.adjacency[GOAL].values():
        edge.status = EdgeStatus.BLOCKED
    with pytest.raises(InfeasibleError):
        optimistic_search(roadmap, AlphaBlend(1.0))


def test_lazy_eval_path_stops_at_first_blocked_edge():
    samples = np.array([[0.1, 0.3], [0.9, 0.3], [0.3, 0.3], [0.7, 0.3]])
    roadmap = Roadmap(samples, 4, 0.45)
    world = wall_world()
    path = (START, 2, 3, GOAL)
    assert lazy_eval_path(roadmap, world, None, path) is EdgeStatus.BLOCKED
    first, blocked, last = roadmap.path_edges(path)
    assert first.status is EdgeStatus.FREE
    assert blocked.status is EdgeStatus.BLOCKED
    assert last.status is EdgeStatus.UNKNOWN
    assert sum(e.evaluations for e in roadmap.edges()) == 2


def test_lazy_eval_path_cached():
    roadmap = halton_roadmap(30, math.sqrt(2))
    world = empty_world()
    assert lazy_eval_path(roadmap, world, None, (START, GOAL)) is EdgeStatus.FREE
    checks = world.check_counter
    assert lazy_eval_path(roadmap, world, None, (START, GOAL)) is EdgeStatus.FREE
    assert world.check_counter == checks


def test_pomp_empty_world():
    roadmap = halton_roadmap(60, math.sqrt(2))
    world = empty_world()
    events = []
    solutions = list(pomp(roadmap, world, BeliefModel(), on_event=events.append))
    assert [s.path for s in solutions] == [(START, GOAL)]
    assert solutions[0].length == pytest.approx(DIRECT_LENGTH_2D)
    assert solutions[0].alpha == 0.0
    assert world.check_counter == num_edge_configs(DIRECT_LENGTH_2D, roadmap.resolution)
    assert [e.kind for e in events if e.kind != "alpha_advanced"] == ["solution"]


def test_pomp_single_feasible_path():
    samples = np.array([[0.1, 0.3], [0.9, 0.3], [0.5, 0.8], [0.5, 0.1]])
    world = World(2, [Obstacle((0.45, 0.0), (0.55, 0.5))])
    roadmap = Roadmap(samples, 4, 0.9)
    solutions = list(pomp(roadmap, world, BeliefModel()))
    assert solutions[-1].path == (START, 2, GOAL)


def test_pomp_infeasible():
    roadmap = halton_roadmap(30, math.sqrt(2))
    events = []
    with pytest.raises(InfeasibleError):
        list(pomp(roadmap, caged_world(), BeliefModel(), on_event=events.append))
    assert events[-1].kind == "infeasible"


def test_lazy_sp_baseline_empty_world():
    roadmap = halton_roadmap(30, math.sqrt(2))
    world = empty_world()
    solution = lazy_sp_baseline(roadmap, world)
    assert solution.path == (START, GOAL)
    assert solution.checks == num_edge_configs(DIRECT_LENGTH_2D, roadmap.resolution)


def test_lazy_sp_baseline_evaluates_direct_edge_first():
    roadmap = halton_roadmap(60, math.sqrt(2))
    world = wall_world()
    events = []
    solution = lazy_sp_baseline(roadmap, world, on_event=events.append)
    assert events[0].kind == "path_rejected" and events[0].path == (START, GOAL)
    assert roadmap.edge(START, GOAL).status is EdgeStatus.BLOCKED
    assert solution.length > DIRECT_LENGTH_2D


def test_plan_rejects_unknown_planner():
    with pytest.raises(ValueError):
        list(plan("rrt", halton_roadmap(10, 1.0), empty_world()))
    with pytest.raises(ValueError):
        list(plan("pomp", halton_roadmap(10, 1.0), empty_world()))


def __scenario(seed):
    params = ScenarioParams(d=2, num_obstacles=40, xi_obs=0.4, seed=seed, samples=20_000)
    return generate_scenario(params)


def __check_optimality(seed, planner, belief):
    world = __scenario(seed)
    roadmap = halton_roadmap(200, 0.3)
    try:
        solutions = list(plan(planner, roadmap, world, belief))
    except InfeasibleError:
        with pytest.raises(InfeasibleError):
            roadmap.shortest_path_oracle(world)
        return
    lengths = [s.length for s in solutions]
    assert all(a > b for a, b in zip(lengths, lengths[1:]))
    assert all(e.status is EdgeStatus.FREE for s in solutions for e in roadmap.path_edges(s.path))
    # detector calls are attributable to single edge evaluations
    assert all(e.evaluations <= 1 for e in roadmap.cache.values())
    assert sum(e.checks for e in roadmap.cache.values()) == world.check_counter
    _, optimum = roadmap.shortest_path_oracle(world)
    assert lengths[-1] == pytest.approx(optimum, abs=1e-9)


@pytest.mark.parametrize("planner", ["pomp", "pomp-nomodel", "lazysp"])
def test_planners_reach_roadmap_optimum(planner):
    belief = None if planner == "lazysp" else BeliefModel(frozen=planner == "pomp-nomodel")
    __check_optimality(0, planner, belief)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(1, 30))
def test_pomp_reaches_roadmap_optimum_sweep(seed):
    __check_optimality(seed, "pomp", BeliefModel())


@pytest.mark.slow
def test_belief_model_saves_checks_on_hard_scenarios():
    found = {"pomp": [], "lazysp": []}
    failed = {"pomp": [], "lazysp": []}
    for seed in range(30):
        world = generate_scenario(ScenarioParams.from_preset("hard-2d", seed=seed, samples=20_000))
        pomp_world, lazy_world = world.fresh(), world.fresh()
        try:
            first = next(pomp(halton_roadmap(1000, 0.15), pomp_world, BeliefModel()))
            found["pomp"].append(first.checks)
        except InfeasibleError:
            failed["pomp"].append(pomp_world.check_counter)
        try:
            found["lazysp"].append(lazy_sp_baseline(halton_roadmap(1000, 0.15), lazy_world).checks)
        except InfeasibleError:
            failed["lazysp"].append(lazy_world.check_counter)
    # both searches are complete on the same roadmap
    assert len(found["pomp"]) == len(found["lazysp"])
    assert len(found["pomp"]) >= 5
    assert np.median(found["pomp"]) < np.median(found["lazysp"])
    if failed["pomp"]:
        assert np.median(failed["pomp"]) <= np.median(failed["lazysp"])
