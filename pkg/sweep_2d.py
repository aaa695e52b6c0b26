"""
example file for an easy/hard 2D sweep
this script compares the batching strategies on a handful of seeded scenarios and prints the checks
needed for the first solution, run it with something like `python3 sweep_2d.py | tee sweep.log`
"""
from datetime import datetime
from RoadmapTools.lib.benchmarking import plan_scenario
from RoadmapTools.lib.world import ScenarioParams, generate_scenario
from RoadmapTools import TIMESTAMP_FORMAT


N = 2_000
SEEDS = range(5)
STRATEGIES = ("vertex", "edge", "hybrid")

for preset in ("easy-2d", "hard-2d"):
    for seed in SEEDS:
        world = generate_scenario(ScenarioParams.from_preset(preset, seed))
        for strategy in STRATEGIES:
            summary = plan_scenario(world, strategy=strategy, planner="pomp", n=N).summary
            if summary.infeasible:
                result = "infeasible"
            else:
                result = f"first solution after {summary.first_solution_checks} checks, final length {summary.final_length:.4f}"
            print(f"{datetime.strftime(datetime.now(), TIMESTAMP_FORMAT)}: {preset} seed {seed} {strategy:>6s} | {result}")
