"""
densify module
batching schedules over a fixed roadmap, starvation bounds, informed-set pruning, the batch loop
and the worst-case effort/quality simulation
"""
import json
import logging as log
import math
from dataclasses import dataclass, field
from enum import Enum
import numpy as np
from scipy.special import gamma
from tqdm import tqdm
from .. import DEFAULT_D_ALPHA, INITIAL_BATCH_VERTICES, PRUNE_THRESHOLD, RADIUS_CONSTANT
from .belief import BeliefModel
from .halton import DispersionError, nth_prime, suboptimality_factor
from .roadmap import GOAL, START, InfeasibleError, Roadmap
from .search import plan
from .trace import BATCH_DONE, INFEASIBLE, SOLUTION, AnytimeTrace, Stopwatch, TraceEvent


PATH_LENGTH_SLACK = 1e-9


class Strategy(Enum):
    VERTEX = "vertex"
    EDGE = "edge"
    HYBRID = "hybrid"
    NONE = "none"


@dataclass
class BatchSchedule:
    strategy: Strategy
    batches: list = field(default_factory=list)

    def __len__(self):
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)

    def to_json(self):
        return json.dumps({"strategy": self.strategy.value, "batches": self.batches})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(Strategy(data["strategy"]), [tuple(b) for b in data["batches"]])


def _edge_phase(N, d, r0):
    r_max = math.sqrt(d)
    eta = 2.0 ** (1.0 / d)
    radii = []
    r = min(r0, r_max)
    while r < r_max:
        radii.append(r)
        r *= eta
    return [(N, r) for r in radii] + [(N, r_max)]


def make_schedule(strategy, N, d):
    """
    sequence of (n, r) subgraphs ending with the complete roadmap (N, sqrt(d))
    """
    strategy = Strategy(strategy)
    r_max = math.sqrt(d)
    if N < INITIAL_BATCH_VERTICES or strategy is Strategy.NONE:
        return BatchSchedule(strategy, [(N, r_max)])

    if strategy is Strategy.VERTEX:
        batches = []
        n = INITIAL_BATCH_VERTICES
        while n < N:
            batches.append((n, r_max))
            n *= 2
        batches.append((N, r_max))
    elif strategy is Strategy.EDGE:
        batches = _edge_phase(N, d, RADIUS_CONSTANT * N ** (-1.0 / d))
    else:
        batches = []
        n = INITIAL_BATCH_VERTICES
        while n < N:
            batches.append((n, min(RADIUS_CONSTANT * n ** (-1.0 / d), r_max)))
            n *= 2
        batches.extend(_edge_phase(N, d, RADIUS_CONSTANT * N ** (-1.0 / d)))
    return BatchSchedule(strategy, batches)


def n_min(delta_star, d):
    """
    fewest vertices for which a first solution with bounded suboptimality is guaranteed
    """
    if delta_star <= 0:
        raise ValueError(f"clearance must be positive, got {delta_star}")
    return (2 * nth_prime(d) / delta_star) ** d


def r_min(n_vertices, d):
    """
    smallest connection radius avoiding edge starvation on n vertices
    """
    if n_vertices < 1:
        raise ValueError(f"need at least one vertex, got {n_vertices}")
    return 2 * nth_prime(d) * n_vertices ** (-1.0 / d)


@dataclass
class InformedSet:
    s1: np.ndarray
    s2: np.ndarray
    c_best: float = math.inf

    @property
    def c_min(self):
        return float(np.linalg.norm(np.asarray(self.s2) - np.asarray(self.s1)))

    def contains(self, q):
        if math.isinf(self.c_best):
            return True
        q = np.asarray(q, dtype=np.float64)
        return bool(np.linalg.norm(q - self.s1) + np.linalg.norm(q - self.s2) <= self.c_best)

    def contains_many(self, points):
        points = np.atleast_2d(points)
        if math.isinf(self.c_best):
            return np.ones(points.shape[0], dtype=bool)
        total = np.linalg.norm(points - self.s1, axis=1) + np.linalg.norm(points - self.s2, axis=1)
        return total <= self.c_best

    __call__ = contains


def informed_contains(informed, q):
    return informed.contains(q)


def unit_ball_volume(d):
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


def ellipsoid_volume(c_best, c_min, d):
    """
    volume of the prolate hyperspheroid of points whose summed distance to the foci is <= c_best
    """
    if c_min <= 0:
        raise ValueError(f"focal distance must be positive, got {c_min}")
    if c_best < c_min:
        raise ValueError(f"c_best {c_best} is shorter than the focal distance {c_min}")
    return c_best * (c_best**2 - c_min**2) ** ((d - 1) / 2) * unit_ball_volume(d) / 2**d


def run_densification(
    world,
    samples,
    schedule,
    planner="pomp",
    belief=None,
    d_alpha=DEFAULT_D_ALPHA,
    prune=True,
    prune_threshold=PRUNE_THRESHOLD,
    clock=None,
    progress=False,
    first_only=False,
):
    """
    searches the subgraphs of `schedule` in turn, carrying edge evaluations and the belief model
    across batches; returns the trace of improving solutions and the final roadmap

    `first_only` stops at the first solution found
    """
    clock = clock or Stopwatch()
    if belief is None and planner != "lazysp":
        belief = BeliefModel(frozen=planner == "pomp-nomodel")
    informed = InformedSet(samples[START], samples[GOAL])
    trace = AnytimeTrace(
        metadata={"strategy": schedule.strategy.value, "planner": planner, "N": len(samples)}
    )
    roadmap = None
    pruned_at = math.inf

    batches = list(schedule)
    for index, (n, r) in enumerate(tqdm(batches, desc="batches", disable=not progress)):
        admit = informed.contains if prune else None
        if roadmap is None:
            roadmap = Roadmap(samples, n, r, resolution=world.resolution, admit=admit)
        else:
            roadmap.rescale(n, r, admit=admit)

        try:
            for solution in plan(planner, roadmap, world, belief, d_alpha, clock=clock):
                best = trace.best_length
                if best is not None and not solution.length < best:
                    continue
                trace.record(
                    TraceEvent(
                        SOLUTION,
                        clock.elapsed(),
                        world.check_counter,
                        solution.length,
                        index,
                        solution.alpha,
                        path=solution.path,
                    )
                )
                if prune:
                    informed.c_best = solution.length * (1 + PATH_LENGTH_SLACK)
                if first_only:
                    break
        except InfeasibleError:
            if index == len(batches) - 1 and trace.best_length is None:
                trace.record(TraceEvent(INFEASIBLE, clock.elapsed(), world.check_counter, batch=index))
                raise InfeasibleError("complete roadmap admits no feasible path", trace=trace)
            log.debug(f"batch {index} (n={n}, r={r:.4f}) has no feasible path yet")

        best = trace.best_length
        if prune and best is not None and (
            math.isinf(pruned_at) or pruned_at - best > prune_threshold * pruned_at
        ):
            removed = roadmap.prune_outside(informed)
            pruned_at = best
            log.debug(f"pruned {removed} vertices outside the informed set of {best:.5f}")
        trace.record(TraceEvent(BATCH_DONE, clock.elapsed(), world.check_counter, best, index))
        log.info(
            f"batch {index + 1}/{len(batches)} (n={n}, r={r:.4f}) done: best "
            f"{'none' if best is None else f'{best:.5f}'}, {world.check_counter} checks"
        )
        if first_only and best is not None:
            break
    trace.metadata["considered_edges"] = roadmap.considered
    return trace, roadmap


@dataclass(frozen=True)
class SimulationPoint:
    strategy: str
    batch_index: int
    n: int
    r: float
    cum_edges: float
    bound: float
    cum_evaluations: float = 0.0


def worst_case_edges(n, r, d):
    """
    worst-case edge count of the r-disk graph on n vertices
    """
    return 0.5 * n * n * min(1.0, r**d)


def distinct_edges(batches, d):
    """
    worst-case count of distinct edges over the union of the (n, r) subgraphs in `batches`,
    i.e. the edges a run evaluates at most once each through the shared roadmap cache.
    Vertex pairs are grouped by the batch size in which their later vertex enters; a group
    reaches the largest radius of any batch containing it
    """
    sizes = sorted({n for n, _ in batches})
    total, previous = 0.0, 0
    for n_b in sizes:
        reach = max(r for n, r in batches if n >= n_b)
        pairs = math.comb(n_b, 2) - math.comb(previous, 2)
        total += pairs * min(1.0, reach**d)
        previous = n_b
    return total


def simulated_bound(n, r, d, delta_star, dispersion_constant=1.0):
    dispersion = dispersion_constant * n ** (-1.0 / d)
    try:
        return suboptimality_factor(dispersion, min(r, delta_star))
    except DispersionError:
        return math.inf


def simulate_effort_quality(n, d, delta_star, strategy, dispersion_constant=1.0):
    """
    cumulative worst-case work and the suboptimality bound after each batch of the schedule;
    batches in a starvation region have an infinite bound. `cum_edges` sums the edges searched
    per batch, `cum_evaluations` counts each edge of the roadmap once
    """
    if n < 1 or d < 1 or delta_star <= 0:
        raise ValueError(f"parameters must be positive, got n={n}, d={d}, delta*={delta_star}")
    schedule = make_schedule(strategy, n, d)
    points = []
    work = 0.0
    batches = list(schedule)
    for i, (n_i, r_i) in enumerate(batches):
        work += worst_case_edges(n_i, r_i, d)
        bound = simulated_bound(n_i, r_i, d, delta_star, dispersion_constant)
        evaluations = distinct_edges(batches[: i + 1], d)
        points.append(SimulationPoint(schedule.strategy.value, i, n_i, r_i, work, bound, evaluations))
    return points
