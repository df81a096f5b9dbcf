"""Compare the indicator-based GA with random search on ZDT1 by IGD.

Usage: python scripts/ga_vs_random.py [--seeds N] [--budget N] [--n N]
"""

import argparse

import numpy as np

from dsekit.core import normalize_points
from dsekit.harness.stats import cliffs_delta, scott_knott
from dsekit.indicators import inverted_generational_distance
from dsekit.optimizers import GaParams, ga_multiobjective, random_search
from dsekit.problems import zdt


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--budget", type=int, default=10_000)
    parser.add_argument("--n", type=int, default=30)
    args = parser.parse_args()
    problem = zdt(1, args.n)
    ref = problem.reference_front(500)
    bounds = (ref.min(axis=0), ref.max(axis=0))
    ref_n = normalize_points(ref, bounds)

    def igd(result):
        return inverted_generational_distance(ref_n, normalize_points(result.front(), bounds))

    scores = {
        "ga": [igd(ga_multiobjective(problem, args.budget, GaParams(), s)) for s in range(args.seeds)],
        "random_search": [igd(random_search(problem, args.budget, s)) for s in range(args.seeds)],
    }
    ranks = scott_knott(scores)
    for name, values in scores.items():
        print(f"{name:14s} rank {ranks[name]}  median IGD {np.median(values):.4g}")
    print(f"Cliff's delta (ga vs random_search): {cliffs_delta(scores['ga'], scores['random_search']):+.3f}")


if __name__ == "__main__":
    main()
