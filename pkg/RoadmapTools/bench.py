"""
bench module
command line entry point for scenario generation, planning runs, bound simulations, edge-length
histograms and benchmark suites
"""
import logging as log
import math
import sys
from argparse import ArgumentParser
from .lib.benchmarking import (
    DIFFICULTIES,
    HISTOGRAM_COLUMNS,
    SIMULATION_COLUMNS,
    edge_length_histograms,
    load_roadmap_dump,
    load_suite_config,
    plan_scenario,
    run_suite,
    simulate_all,
    simulation_clearance,
    simulation_rows,
    write_belief_dump,
    write_roadmap_dump,
    write_rows,
    write_suite_report,
    write_summary,
)
from .lib.densify import Strategy
from .lib.halton import HaltonSpec, halton_prefix
from .lib.search import PLANNERS
from .lib.world import PRESETS, ScenarioParams, World, generate_scenario
from . import DEFAULT_D_ALPHA, DEFAULT_RESOLUTION


EXIT_INFEASIBLE = 2


def parse_args(argv=None):
    parser = ArgumentParser(description="densified lazy roadmap planning benchmarks")
    parser.add_argument("--verbose", action="store_true", help="enable verbose logging")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-scenario", help="generate a seeded box-obstacle scenario")
    gen.add_argument("--preset", type=str, choices=sorted(PRESETS), default="easy-2d")
    gen.add_argument("--d", type=int, help="dimension, overrides the preset's")
    gen.add_argument("--obstacles", type=int, help="obstacle budget, overrides the preset's")
    gen.add_argument("--xi-obs", type=float, help="coverage target, overrides the preset's")
    gen.add_argument("--seed", type=int, default=0, help="scenario seed")
    gen.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION, help="collision checking resolution")
    gen.add_argument("--out", type=str, required=True, help="scenario JSON file")

    plan = commands.add_parser("plan", help="densified planning run on a scenario")
    plan.add_argument("--scenario", type=str, required=True, help="scenario JSON file")
    plan.add_argument(
        "--strategy", type=str, choices=[s.value for s in Strategy], default="hybrid", help="batching strategy"
    )
    plan.add_argument("--planner", type=str, choices=PLANNERS, default="pomp")
    plan.add_argument("--n", type=int, help="roadmap size including start and goal")
    plan.add_argument("--d-alpha", type=float, default=DEFAULT_D_ALPHA, help="alpha increment")
    plan.add_argument("--seed", type=int, help="seed of a random Halton offset, none by default")
    plan.add_argument("--resolution", type=float, help="collision checking resolution, overrides the scenario's")
    plan.add_argument("--out", type=str, required=True, help="output prefix for trace CSV and summary JSON")
    plan.add_argument("--wall-clock", action="store_true", help="record elapsed time in traces")
    plan.add_argument("--no-prune", action="store_true", help="disable informed-set pruning")
    plan.add_argument("--no-oracle", action="store_true", help="skip the reference path and the ratios")
    plan.add_argument("--first-only", action="store_true", help="stop at the first solution")
    plan.add_argument("--dump", action="store_true", help="also write the roadmap and belief dump JSON")

    simulate = commands.add_parser("simulate", help="worst-case effort vs. suboptimality bound")
    simulate.add_argument("--n", type=int, default=1_000_000)
    simulate.add_argument("--d", type=int, default=4)
    simulate.add_argument("--difficulty", type=str, choices=DIFFICULTIES, default="easy")
    simulate.add_argument("--delta-star", type=float, help="clearance, overrides --difficulty")
    simulate.add_argument("--dispersion-constant", type=float, default=1.0, help="c in D_n = c n^(-1/d)")
    simulate.add_argument("--out", type=str, required=True, help="CSV file")

    histogram = commands.add_parser("histogram", help="edge-length histograms of the solution paths")
    histogram.add_argument("--dump", type=str, required=True, help="roadmap dump JSON")
    histogram.add_argument("--bins", type=int, default=20)
    histogram.add_argument("--out", type=str, required=True, help="CSV file")

    suite = commands.add_parser("bench-suite", help="seeded sweeps from a JSON config")
    suite.add_argument("--config", type=str, required=True, help="suite config JSON")
    suite.add_argument("--out", type=str, required=True, help="output prefix for report JSON and CSV")

    halton = commands.add_parser("halton", help="dump a Halton sequence prefix")
    halton.add_argument("--n", type=int, required=True)
    halton.add_argument("--d", type=int, default=2)
    halton.add_argument("--seed", type=int, help="seed of a random offset, none by default")
    halton.add_argument("--out", type=str, required=True, help="CSV file")

    args = parser.parse_args(argv)

    if args.verbose:
        log.basicConfig(
            format="[%(asctime)s] %(levelname)-8s | %(message)s",
            level="DEBUG",
            datefmt="%H:%M:%S",
        )
    else:
        log.basicConfig(
            format="[%(asctime)s] %(levelname)-8s | %(message)s",
            level="INFO",
            datefmt="%H:%M:%S",
        )

    return args


def gen_scenario(args):
    params = ScenarioParams.from_preset(args.preset, args.seed, d=args.d, resolution=args.resolution)
    if args.obstacles is not None:
        params.num_obstacles = args.obstacles
    if args.xi_obs is not None:
        params.xi_obs = args.xi_obs
    generate_scenario(params).save(args.out)
    log.info(f"scenario written to {args.out}")
    return 0


def plan(args):
    world = World.load(args.scenario)
    if args.resolution is not None:
        world.resolution = args.resolution
    result = plan_scenario(
        world,
        strategy=args.strategy,
        planner=args.planner,
        n=args.n,
        d_alpha=args.d_alpha,
        seed=args.seed,
        prune=not args.no_prune,
        wall_clock=args.wall_clock,
        oracle=not args.no_oracle,
        progress=True,
        first_only=args.first_only,
    )
    result.trace.write_csv(f"{args.out}.csv")
    write_summary(result.summary, f"{args.out}.json")
    if args.dump:
        if result.roadmap is None:
            log.warning("no roadmap dump for an infeasible run")
        else:
            write_roadmap_dump(result, f"{args.out}.roadmap.json")
        if result.belief is not None:
            write_belief_dump(result.belief, f"{args.out}.belief.json")
    if result.summary.infeasible:
        return EXIT_INFEASIBLE
    log.info(f"best length {result.summary.final_length:.5f} after {result.summary.checks_to_final} checks")
    return 0


def simulate(args):
    delta_star = args.delta_star
    if delta_star is None:
        delta_star = simulation_clearance(args.n, args.d, args.difficulty, args.dispersion_constant)
    points = simulate_all(args.n, args.d, delta_star, args.dispersion_constant)
    write_rows(args.out, SIMULATION_COLUMNS, simulation_rows(points))
    finite = sum(math.isfinite(p.bound) for p in points)
    log.info(f"{len(points)} batches simulated for delta*={delta_star:.5f}, {finite} with a finite bound")
    return 0


def histogram(args):
    rows = edge_length_histograms(load_roadmap_dump(args.dump), bins=args.bins)
    write_rows(args.out, HISTOGRAM_COLUMNS, rows)
    return 0


def bench_suite(args):
    outcomes, report = run_suite(load_suite_config(args.config))
    write_suite_report(outcomes, report, args.out)
    log.info(f"report with {len(report)} rows written to {args.out}.json and {args.out}.csv")
    return 0


def halton(args):
    points = halton_prefix(args.n, HaltonSpec(args.d), offset_seed=args.seed)
    write_rows(args.out, [f"x{i}" for i in range(args.d)], [[repr(float(x)) for x in p] for p in points])
    return 0


COMMANDS = {
    "gen-scenario": gen_scenario,
    "plan": plan,
    "simulate": simulate,
    "histogram": histogram,
    "bench-suite": bench_suite,
    "halton": halton,
}


def run(argv=None):
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as e:
        log.error(f"missing input file: {e.filename}")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
