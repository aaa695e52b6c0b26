"""
search module
optimistic A* over lazily evaluated roadmaps, Pareto-optimal candidate generation (POMP) and
the pure-length lazy baseline
"""
import heapq
import logging as log
import math
from dataclasses import dataclass
import numpy as np
from .. import DEFAULT_D_ALPHA
from .roadmap import START, GOAL, EdgeStatus, InfeasibleError
from .trace import Stopwatch


@dataclass(frozen=True)
class AlphaBlend:
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def weight(self, edge):
        return blended_weight(edge, self.alpha)

    @property
    def heuristic_scale(self):
        return self.alpha

    @property
    def needs_measures(self):
        return self.alpha < 1.0


@dataclass(frozen=True)
class ExpectedLength:
    beta: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    def weight(self, edge):
        if edge.status is EdgeStatus.BLOCKED:
            return math.inf
        return expected_weight(edge, self.beta, math.exp(-edge.w_m))

    @property
    def heuristic_scale(self):
        return 1.0

    @property
    def needs_measures(self):
        return self.beta > 0


@dataclass(frozen=True)
class AnytimeSolution:
    path: tuple
    length: float
    alpha: float
    checks: int
    elapsed: float


@dataclass(frozen=True)
class PlannerEvent:
    kind: str
    alpha: float
    checks: int
    path: tuple = None


def blended_weight(edge, alpha):
    """
    alpha * w_l + (1 - alpha) * w_m; the exact endpoints never touch the other weight
    """
    if getattr(edge, "status", None) is EdgeStatus.BLOCKED:
        return math.inf
    if alpha == 1.0:
        return edge.w_l
    if alpha == 0.0:
        return edge.w_m
    return alpha * edge.w_l + (1.0 - alpha) * edge.w_m


def expected_weight(edge, beta, rho):
    """
    expected length when a blocked edge costs an extra `beta`
    """
    return edge.w_l + (1.0 - rho) * beta


def beta_for_alpha(alpha, rho):
    """
    penalty beta under which the expected-length weight charges the same collision penalty as
    the blended weight at `alpha`
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    return (1.0 - alpha) / alpha * (-math.log(rho)) / (1.0 - rho)


def alpha_steps(d_alpha):
    """
    0, d_alpha, 2 d_alpha, ... up to and always including exactly 1
    """
    if not 0.0 < d_alpha <= 1.0:
        raise ValueError(f"d_alpha must lie in (0, 1], got {d_alpha}")
    count = int(math.floor(1.0 / d_alpha + 1e-9))
    alphas = [i * d_alpha for i in range(count + 1) if i * d_alpha < 1.0 - 1e-9]
    return alphas + [1.0]


def optimistic_search(roadmap, policy, heuristic_scale=None):
    """
    A* over all non-blocked edges under `policy`, heuristic scale * euclidean distance to goal;
    no collision checks happen here
    """
    if heuristic_scale is None:
        heuristic_scale = policy.heuristic_scale
    goal_q = roadmap.samples[GOAL]
    samples = roadmap.samples

    heuristics = {}

    def h(v):
        if v not in heuristics:
            heuristics[v] = heuristic_scale * float(np.linalg.norm(samples[v] - goal_q))
        return heuristics[v]

    cost = {START: 0.0}
    parent = {START: None}
    closed = set()
    fringe = [(h(START), h(START), START)]
    while fringe:
        _, _, v = heapq.heappop(fringe)
        if v in closed:
            continue
        if v == GOAL:
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return tuple(reversed(path))
        closed.add(v)
        for w, edge in roadmap.adjacency.get(v, {}).items():
            if w in closed or edge.status is EdgeStatus.BLOCKED:
                continue
            candidate = cost[v] + policy.weight(edge)
            if candidate < cost.get(w, math.inf):
                cost[w] = candidate
                parent[w] = v
                heapq.heappush(fringe, (candidate + h(w), h(w), w))
    raise InfeasibleError("goal unreachable through non-blocked edges")


def lazy_eval_path(roadmap, world, belief, path):
    """
    evaluates the edges of `path` in order and stops at the first blocked one
    """
    for edge in roadmap.path_edges(path):
        if roadmap.evaluate_edge(world, edge, belief) is EdgeStatus.BLOCKED:
            return EdgeStatus.BLOCKED
    return EdgeStatus.FREE


def pomp(roadmap, world, belief, d_alpha=DEFAULT_D_ALPHA, clock=None, on_event=None):
    """
    yields successively shorter collision-free paths; alpha sweeps from 0 (most likely free)
    to 1 (shortest), so the last solution is the shortest feasible path on `roadmap`
    """
    clock = clock or Stopwatch()
    alphas = alpha_steps(d_alpha)
    belief.follow(roadmap)

    def emit(kind, alpha, path=None):
        if on_event is not None:
            on_event(PlannerEvent(kind, alpha, world.check_counter, path))

    best = None
    step = 0
    while step < len(alphas):
        alpha = alphas[step]
        policy = AlphaBlend(alpha)
        if policy.needs_measures:
            roadmap.ensure_measures(belief)
        try:
            candidate = optimistic_search(roadmap, policy)
        except InfeasibleError:
            log.info(f"no candidate path at alpha={alpha:.2f} after {world.check_counter} checks")
            emit("infeasible", alpha)
            raise
        if best is not None and candidate == best.path:
            step += 1
            emit("alpha_advanced", alpha)
            log.debug(f"alpha {alpha:.2f} reproduced the current path, advancing")
            continue
        if lazy_eval_path(roadmap, world, belief, candidate) is EdgeStatus.BLOCKED:
            emit("path_rejected", alpha, candidate)
            log.debug(f"candidate of {len(candidate) - 1} edges blocked at alpha={alpha:.2f}")
            continue
        length = roadmap.path_length(candidate)
        if best is None or length < best.length:
            best = AnytimeSolution(candidate, length, alpha, world.check_counter, clock.elapsed())
            emit("solution", alpha, candidate)
            log.info(f"solution of length {length:.5f} at alpha={alpha:.2f}, {best.checks} checks")
            yield best
        step += 1
    if best is None:
        raise InfeasibleError()


def lazy_sp_baseline(roadmap, world, clock=None, on_event=None):
    """
    pure-length lazy search: the shortest candidate is evaluated until one is collision-free
    """
    clock = clock or Stopwatch()
    policy = AlphaBlend(1.0)
    while True:
        try:
            candidate = optimistic_search(roadmap, policy)
        except InfeasibleError:
            log.info(f"lazy search exhausted the roadmap after {world.check_counter} checks")
            if on_event is not None:
                on_event(PlannerEvent("infeasible", 1.0, world.check_counter))
            raise
        if lazy_eval_path(roadmap, world, None, candidate) is EdgeStatus.FREE:
            length = roadmap.path_length(candidate)
            log.info(f"lazy search found length {length:.5f} after {world.check_counter} checks")
            if on_event is not None:
                on_event(PlannerEvent("solution", 1.0, world.check_counter, candidate))
            return AnytimeSolution(candidate, length, 1.0, world.check_counter, clock.elapsed())
        if on_event is not None:
            on_event(PlannerEvent("path_rejected", 1.0, world.check_counter, candidate))


PLANNERS = ("pomp", "pomp-nomodel", "lazysp")


def plan(planner, roadmap, world, belief=None, d_alpha=DEFAULT_D_ALPHA, clock=None, on_event=None):
    """
    iterates over the solutions `planner` finds on `roadmap`
    """
    if planner in ("pomp", "pomp-nomodel"):
        if belief is None:
            raise ValueError(f"planner {planner} needs a belief model")
        yield from pomp(roadmap, world, belief, d_alpha, clock=clock, on_event=on_event)
    elif planner == "lazysp":
        yield lazy_sp_baseline(roadmap, world, clock=clock, on_event=on_event)
    else:
        raise ValueError(f"unknown planner {planner!r}, choose from {PLANNERS}")
