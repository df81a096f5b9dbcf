"""Meta-tuning: differential evolution over an algorithm's tunable parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dsekit.core import MAX_SEED, DecisionSpace, Direction, Kind, normalize_points
from dsekit.harness.algorithms import REGISTRY, UnknownAlgorithmError, run_algorithm
from dsekit.indicators import HIGHER_IS_BETTER, compute
from dsekit.optimizers import DeParams, differential_evolution
from dsekit.problems.base import Problem

DEFAULT_INNER_BUDGET = 2000


@dataclass(frozen=True)
class TuneResult:
    target: str
    params: dict
    score: float
    default_params: dict
    default_score: float
    indicator: str
    inner_seeds: tuple[int, ...]
    meta_evals: int


def _as_params(space: DecisionSpace, values) -> dict:
    out = {}
    for d, v in zip(space.decisions, values):
        out[d.name] = int(v) if d.kind is Kind.INTEGER else float(v)
    return out


def tune(target: str, problem: Problem, meta_budget: int, inner_repeats: int = 3, seed: int = 0,
         inner_budget: int = DEFAULT_INNER_BUDGET, indicator: str = "igd",
         space: DecisionSpace | None = None) -> TuneResult:
    """Tune ``target`` on ``problem`` and return the best parameter block.

    Every meta-evaluation runs the target ``inner_repeats`` times on the
    same inner seeds and scores the median indicator against the problem's
    known front (both min-max scaled to that front's bounds). The default
    parameters are scored on the same seeds and kept if DE finds nothing
    better, so the result never scores worse than the defaults.
    """
    if target not in REGISTRY:
        raise UnknownAlgorithmError(f"unknown algorithm {target!r}")
    spec = REGISTRY[target]
    space = space or spec.tunable
    if space is None:
        raise ValueError(f"{target} declares no tunable parameters")
    if inner_repeats < 3:
        raise ValueError("inner_repeats must be >= 3")
    if not space.kinds <= {Kind.CONTINUOUS, Kind.INTEGER}:
        raise ValueError("tunable parameters must be continuous or integer")
    np_ = DeParams().population(len(space), meta_budget)
    if meta_budget < np_:
        raise ValueError(f"meta budget {meta_budget} is below the DE population of {np_}")
    ref = problem.reference_front()
    if ref is None:
        raise ValueError(f"{problem.name} has no known front to score against")
    bounds = (ref.min(axis=0), ref.max(axis=0))
    ref_n = normalize_points(ref, bounds)
    inner_seeds = tuple((seed + 1 + j) % (MAX_SEED + 1) for j in range(inner_repeats))
    sign = -1.0 if indicator in HIGHER_IS_BETTER else 1.0

    def score(params: dict) -> float:
        values = []
        for s in inner_seeds:
            front = run_algorithm(target, problem, inner_budget, params, s).front()
            values.append(compute(indicator, normalize_points(front, bounds), ref_n)[0])
        return float(np.median(values))

    meta = Problem(f"tune:{target}", space, (Direction.MINIMIZE,),
                   lambda sol: (sign * score(_as_params(space, sol.values)),))
    result = differential_evolution(meta, meta_budget, DeParams(), seed)
    best = result.archive.members[0]
    params, best_score = _as_params(space, best.solution.values), sign * float(best.f[0])

    defaults = dict(spec.defaults or {})
    default_score = score(defaults) if defaults else float("nan")
    if defaults and sign * default_score < sign * best_score:
        params, best_score = defaults, default_score
    return TuneResult(target, params, best_score, defaults, default_score, indicator, inner_seeds, result.evals_used)

