"""Compare the compiled kernels against the pure-NumPy fallback.

Times one Monte-Carlo repetition of each strategy/algorithm pair at the
standard benchmark scenario and prints per-backend wall times plus the
speedup.  Run from the repository root:

    python benchmarks/benchmark_backends.py            # full scenario
    python benchmarks/benchmark_backends.py --quick    # reduced instants
"""

import argparse
import time

import numpy as np

from dcgnet import backend
from dcgnet.config import ALGORITHMS, make_config
from dcgnet.diffusion import metropolis_combiner, random_topology, run_diffusion
from dcgnet.incremental import run_incremental
from dcgnet.simulate import Scenario, draw_scenario


def time_run(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="run 200 instants instead of 1000")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not backend.HAVE_COMPILED:
        parser.error("compiled extension is not built; install with `pip install -e .`")

    scenario = Scenario(instants=200 if args.quick else 1000)
    rng = np.random.default_rng(args.seed)
    _, x, d = draw_scenario(scenario, rng)
    C = metropolis_combiner(random_topology(scenario.nodes, 4.0 / (scenario.nodes - 1), args.seed))

    print(f"scenario: taps={scenario.taps} nodes={scenario.nodes} instants={scenario.instants}")
    print(f"{'run':16s} {'python (s)':>12s} {'compiled (s)':>13s} {'speedup':>9s}")
    for strategy in ("incremental", "diffusion"):
        for algorithm in ALGORITHMS:
            cfg = make_config(strategy, algorithm)
            if strategy == "incremental":
                runner = lambda which: run_incremental(x, d, cfg, backend=which)
            else:
                runner = lambda which: run_diffusion(x, d, C, cfg, backend=which)
            t_py = time_run(lambda: runner("python"), repeats=1)
            t_cy = time_run(lambda: runner("compiled"))
            name = f"{strategy[:4]}-{algorithm}"
            print(f"{name:16s} {t_py:12.3f} {t_cy:13.4f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
