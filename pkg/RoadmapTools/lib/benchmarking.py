"""
benchmarking module
experiment orchestration on top of the planners: single planning runs with summaries, roadmap
dumps, edge-length histograms, effort/quality curves and seeded benchmark suites
"""
import csv
import hashlib
import json
import logging as log
import math
import os
from dataclasses import asdict, dataclass
from multiprocessing import Pool
import numpy as np
from tqdm import tqdm
from .. import DEFAULT_D_ALPHA, THREADS_ENV_VAR
from .belief import BeliefModel
from .densify import Strategy, make_schedule, run_densification, simulate_effort_quality
from .halton import HaltonSpec, halton_prefix
from .roadmap import InfeasibleError, build_samples
from .search import PLANNERS, lazy_sp_baseline
from .trace import Stopwatch
from .world import ScenarioError, ScenarioParams, generate_scenario


DEFAULT_N = {2: 10_000, 4: 30_000}
DIFFICULTIES = ("easy", "hard")
HARD_CLEARANCE_FACTOR = 5.0
SIMULATION_COLUMNS = ("strategy", "batch", "n", "r", "cum_edges", "bound", "cum_evaluations")
HISTOGRAM_COLUMNS = ("solution", "path_length", "bin_lo", "bin_hi", "count")
REPORT_METRICS = ("first_solution_checks", "first_solution_time", "checks_to_final", "time_to_final")


def default_n(d):
    return DEFAULT_N.get(d, DEFAULT_N[4])


def scenario_hash(world):
    """
    short digest identifying the obstacle set, start, goal and resolution of a scenario
    """
    text = json.dumps(world.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def roadmap_samples(world, n, offset_seed=None):
    """
    start, goal and the first n - 2 Halton points of the scenario's dimension
    """
    if n < 2:
        raise ValueError(f"a roadmap needs at least start and goal, got n={n}")
    if n == 2:
        points = np.zeros((0, world.d))
    else:
        points = halton_prefix(n - 2, HaltonSpec(world.d), offset_seed=offset_seed)
    return build_samples(world.start, world.goal, points)


@dataclass
class PlanSummary:
    scenario: str
    strategy: str
    planner: str
    n: int
    d: int
    seed: int = None
    infeasible: bool = False
    num_solutions: int = 0
    first_solution_checks: int = None
    first_solution_time: float = None
    first_solution_length: float = None
    final_length: float = None
    checks_to_final: int = None
    time_to_final: float = None
    total_checks: int = 0
    considered_edges: int = None
    oracle_length: float = None
    suboptimality_ratio: float = None
    first_suboptimality_ratio: float = None

    def to_dict(self):
        return asdict(self)


@dataclass
class PlanResult:
    summary: PlanSummary
    trace: object
    roadmap: object = None
    belief: object = None


def plan_scenario(
    world,
    strategy="hybrid",
    planner="pomp",
    n=None,
    d_alpha=DEFAULT_D_ALPHA,
    seed=None,
    prune=True,
    wall_clock=False,
    oracle=True,
    progress=False,
    first_only=False,
):
    """
    densified planning run on a fresh copy of `world`; `seed` offsets the Halton samples

    with `oracle` the shortest collision-free path on the final roadmap is found afterwards by a
    lazy search on a fresh counter, reusing the run's edge evaluations, and serves as reference
    for the suboptimality ratios
    """
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}, choose from {PLANNERS}")
    world = world.fresh()
    n = default_n(world.d) if n is None else n
    samples = roadmap_samples(world, n, offset_seed=seed)
    schedule = make_schedule(Strategy(strategy), n, world.d)
    clock = Stopwatch(enabled=wall_clock)
    log.info(
        f"planning with {planner} on {n} samples in d={world.d}, "
        f"{schedule.strategy.value} batching over {len(schedule)} batches"
    )

    summary = PlanSummary(scenario_hash(world), schedule.strategy.value, planner, n, world.d, seed)
    belief = None if planner == "lazysp" else BeliefModel(frozen=planner == "pomp-nomodel")
    roadmap = None
    try:
        trace, roadmap = run_densification(
            world,
            samples,
            schedule,
            planner,
            belief=belief,
            d_alpha=d_alpha,
            prune=prune,
            clock=clock,
            progress=progress,
            first_only=first_only,
        )
    except InfeasibleError as e:
        trace = e.trace
        summary.infeasible = True
        log.warning(f"no feasible path on the complete roadmap after {world.check_counter} checks")
    trace.metadata.update(scenario=summary.scenario, seed=seed)

    solutions = trace.solutions
    summary.num_solutions = len(solutions)
    summary.total_checks = world.check_counter
    if solutions:
        first, final = solutions[0], solutions[-1]
        summary.first_solution_checks = first.checks
        summary.first_solution_time = first.elapsed_s
        summary.first_solution_length = first.length
        summary.final_length = final.length
        summary.checks_to_final = final.checks
        summary.time_to_final = final.elapsed_s
    if roadmap is not None:
        summary.considered_edges = roadmap.considered

    if oracle and roadmap is not None and solutions:
        reference_world = world.fresh()
        summary.oracle_length = lazy_sp_baseline(roadmap, reference_world).length
        summary.suboptimality_ratio = summary.final_length / summary.oracle_length
        summary.first_suboptimality_ratio = summary.first_solution_length / summary.oracle_length
        log.info(
            f"oracle length {summary.oracle_length:.5f} after {reference_world.check_counter} further "
            f"checks, ratio {summary.suboptimality_ratio:.6f}"
        )
    return PlanResult(summary, trace, roadmap, belief)


def write_summary(summary, filename):
    with open(filename, "w", encoding="utf-8") as f:
        json.dump(summary.to_dict(), f, indent=1)
        f.write("\n")


def roadmap_dump(result):
    """
    sample coordinates, evaluated edge statuses and the solution paths of a planning run
    """
    data = result.roadmap.to_dict()
    data["solutions"] = [
        {"length": e.length, "batch": e.batch, "alpha": e.alpha, "path": [int(v) for v in e.path]}
        for e in result.trace.solutions
    ]
    return data


def write_roadmap_dump(result, filename):
    with open(filename, "w", encoding="utf-8") as f:
        json.dump(roadmap_dump(result), f)
        f.write("\n")


def write_belief_dump(belief, filename):
    """
    evaluated configurations and their outcomes as stored by the belief model
    """
    with open(filename, "w", encoding="utf-8") as f:
        json.dump(belief.to_dict(), f)
        f.write("\n")


def load_roadmap_dump(filename):
    with open(filename, "r", encoding="utf-8") as f:
        data = json.load(f)
    for key in ("d", "samples", "solutions"):
        if key not in data:
            raise ValueError(f"{filename} is not a roadmap dump, missing {key!r}")
    return data


def path_edge_lengths(samples, path):
    points = np.asarray(samples, dtype=np.float64)[list(path)]
    return np.linalg.norm(np.diff(points, axis=0), axis=1)


def edge_length_histograms(dump, bins=20):
    """
    per solution path: counts of its edge lengths in `bins` equal bins over [0, sqrt(d)]
    """
    if bins < 1:
        raise ValueError(f"need at least one bin, got {bins}")
    if not dump["solutions"]:
        raise ValueError("roadmap dump holds no feasible path")
    edges = np.linspace(0.0, math.sqrt(dump["d"]), bins + 1)
    rows = []
    for i, solution in enumerate(dump["solutions"]):
        counts, _ = np.histogram(path_edge_lengths(dump["samples"], solution["path"]), bins=edges)
        rows.extend(
            (i, solution["length"], float(lo), float(hi), int(c))
            for lo, hi, c in zip(edges[:-1], edges[1:], counts)
        )
    return rows


def write_rows(filename, columns, rows):
    with open(filename, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def simulation_clearance(n, d, difficulty, dispersion_constant=1.0):
    """
    clearance of the easy (sqrt(d) / 2) or hard (5 D_n) simulated world
    """
    if difficulty == "easy":
        return math.sqrt(d) / 2
    if difficulty == "hard":
        return HARD_CLEARANCE_FACTOR * dispersion_constant * n ** (-1.0 / d)
    raise ValueError(f"unknown difficulty {difficulty!r}, choose from {DIFFICULTIES}")


def simulate_all(n, d, delta_star, dispersion_constant=1.0):
    """
    effort/quality points of vertex, edge and hybrid batching
    """
    points = []
    for strategy in (Strategy.VERTEX, Strategy.EDGE, Strategy.HYBRID):
        points.extend(simulate_effort_quality(n, d, delta_star, strategy, dispersion_constant))
    return points


def simulation_rows(points):
    return [
        (
            p.strategy,
            p.batch_index,
            p.n,
            repr(p.r),
            repr(p.cum_edges),
            repr(p.bound),
            repr(p.cum_evaluations),
        )
        for p in points
    ]


def suite_threads():
    value = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        threads = int(value)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {value!r}")
    return max(1, min(threads, os.cpu_count() or 1))


def load_suite_config(filename):
    with open(filename, "r", encoding="utf-8") as f:
        config = json.load(f)
    if not config.get("settings"):
        raise ValueError(f"{filename} lists no settings")
    return config


def suite_cells(config):
    """
    one cell per (setting, strategy, planner, seed), in config order
    """
    cells = []
    for i, setting in enumerate(config["settings"]):
        preset = setting["preset"]
        d = setting.get("d", 4 if preset.endswith("4d") else 2)
        seeds = setting.get("seeds", list(range(setting.get("num_seeds", 1))))
        for strategy in setting.get("strategies", ["hybrid"]):
            for planner in setting.get("planners", ["pomp"]):
                for seed in seeds:
                    cells.append(
                        {
                            "setting": setting.get("name", f"{preset}-{i}"),
                            "preset": preset,
                            "d": d,
                            "n": setting.get("n", default_n(d)),
                            "strategy": strategy,
                            "planner": planner,
                            "seed": seed,
                            "d_alpha": setting.get("d_alpha", DEFAULT_D_ALPHA),
                            "prune": setting.get("prune", True),
                            "oracle": setting.get("oracle", True),
                            "wall_clock": config.get("wall_clock", False),
                        }
                    )
    return cells


def run_cell(cell):
    """
    generates the cell's scenario and plans on it; failures are reported, not raised
    """
    outcome = dict(cell)
    try:
        world = generate_scenario(ScenarioParams.from_preset(cell["preset"], cell["seed"], d=cell["d"]))
        result = plan_scenario(
            world,
            strategy=cell["strategy"],
            planner=cell["planner"],
            n=cell["n"],
            d_alpha=cell["d_alpha"],
            prune=cell["prune"],
            wall_clock=cell["wall_clock"],
            oracle=cell.get("oracle", True),
        )
        outcome["summary"] = result.summary.to_dict()
        outcome["error"] = None
    except (ScenarioError, ValueError, RuntimeError) as e:
        outcome["summary"] = None
        outcome["error"] = f"{type(e).__name__}: {e}"
    return outcome


def quartiles(values):
    if not values:
        return {"median": None, "q1": None, "q3": None}
    q1, median, q3 = np.percentile(np.asarray(values, dtype=np.float64), [25, 50, 75])
    return {"median": float(median), "q1": float(q1), "q3": float(q3)}


def aggregate(outcomes):
    """
    medians and quartiles per (setting, strategy, planner) over the seeds that found a solution
    """
    groups = {}
    for outcome in outcomes:
        key = (outcome["setting"], outcome["strategy"], outcome["planner"])
        groups.setdefault(key, []).append(outcome)

    report = []
    for (setting, strategy, planner), group in groups.items():
        summaries = [o["summary"] for o in group if o["summary"] is not None]
        solved = [s for s in summaries if not s["infeasible"]]
        row = {
            "setting": setting,
            "strategy": strategy,
            "planner": planner,
            "runs": len(group),
            "failures": len(group) - len(summaries),
            "infeasible": len(summaries) - len(solved),
        }
        for metric in REPORT_METRICS:
            stats = quartiles([s[metric] for s in solved])
            row.update({f"{metric}_{k}": v for k, v in stats.items()})
        report.append(row)
    return report


def run_suite(config, threads=None, progress=True):
    """
    runs every cell of `config`, in parallel when more than one thread is allowed;
    results keep config order
    """
    cells = suite_cells(config)
    threads = suite_threads() if threads is None else threads
    log.info(f"benchmark suite: {len(cells)} runs on {threads} process(es)")
    if threads > 1:
        with Pool(threads) as pool:
            outcomes = list(tqdm(pool.imap(run_cell, cells), total=len(cells), disable=not progress))
    else:
        outcomes = [run_cell(c) for c in tqdm(cells, disable=not progress)]
    for outcome in outcomes:
        if outcome["error"] is not None:
            log.warning(
                f"{outcome['setting']} {outcome['strategy']}/{outcome['planner']} "
                f"seed {outcome['seed']} failed: {outcome['error']}"
            )
    return outcomes, aggregate(outcomes)


def write_suite_report(outcomes, report, prefix):
    with open(f"{prefix}.json", "w", encoding="utf-8") as f:
        json.dump({"runs": outcomes, "report": report}, f, indent=1)
        f.write("\n")
    columns = list(report[0]) if report else []
    write_rows(f"{prefix}.csv", columns, [[row[c] for c in columns] for row in report])
