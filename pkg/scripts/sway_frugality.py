"""Count SWAY evaluations against the 2*ceil(log2(enough)) + enough bound.

Usage: python scripts/sway_frugality.py [--seeds N] [--initial N] [--enough N]
"""

import argparse

import numpy as np

from dsekit.problems.synthetic import ramp, sphere
from dsekit.sway import SwayParams, sway


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=30)
    parser.add_argument("--initial", type=int, default=10_000)
    parser.add_argument("--enough", type=int, default=100)
    args = parser.parse_args()
    params = SwayParams(initial_size=args.initial, enough=args.enough)
    print(f"bound with every split decisive: {params.min_budget()}")
    for problem in (sphere(10), ramp(10)):
        used = np.array([sway(problem, params, budget=args.initial, seed=s).evals_used for s in range(args.seeds)])
        print(f"{problem.name:8s} median {np.median(used):6.1f}  max {used.max():4d}  "
              f"over bound {int((used > params.min_budget()).sum())}/{args.seeds}")


if __name__ == "__main__":
    main()
