"""Algorithm registry: names used in plans mapped to runners and tunable spaces."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Callable

from dsekit.core import Decision, DecisionSpace, RunResult
from dsekit.flash import FlashParams, flash
from dsekit.optimizers import (
    DeParams,
    GaParams,
    SaParams,
    differential_evolution,
    ga_multiobjective,
    random_search,
    simulated_annealing,
)
from dsekit.sway import SwayParams, sway


class UnknownAlgorithmError(KeyError):
    pass


def _split(params: dict, cls) -> tuple[dict, dict]:
    names = {f.name for f in fields(cls)}
    own = {k: v for k, v in params.items() if k in names}
    rest = {k: v for k, v in params.items() if k not in names}
    return own, rest


def _reject(extra: dict, algo: str) -> None:
    if extra:
        raise ValueError(f"{algo}: unknown parameter(s) {', '.join(sorted(extra))}")


def _run_random(problem, budget, params, seed):
    params = dict(params)
    without = bool(params.pop("without_replacement", False))
    _reject(params, "random_search")
    return random_search(problem, budget, seed, without_replacement=without)


def _run_sa(problem, budget, params, seed):
    own, rest = _split(params, SaParams)
    idx = int(rest.pop("objective_index", 0))
    _reject(rest, "sa")
    return simulated_annealing(problem, budget, SaParams(**own), seed, idx)


def _run_de(problem, budget, params, seed):
    own, rest = _split(params, DeParams)
    idx = int(rest.pop("objective_index", 0))
    _reject(rest, "de")
    return differential_evolution(problem, budget, DeParams(**own), seed, idx)


def _run_ga(problem, budget, params, seed):
    own, rest = _split(params, GaParams)
    _reject(rest, "ga")
    if "pop_size" in own:
        own["pop_size"] = max(4, int(own["pop_size"]) + int(own["pop_size"]) % 2)
    return ga_multiobjective(problem, budget, GaParams(**own), seed)


def _run_sway(problem, budget, params, seed):
    own, rest = _split(params, SwayParams)
    _reject(rest, "sway")
    return sway(problem, SwayParams(**own), budget, seed)


def _run_flash(problem, budget, params, seed):
    own, rest = _split(params, FlashParams)
    _reject(rest, "flash")
    pool = problem.candidates()
    own["budget"] = min(budget, len(pool)) if pool is not None else budget
    return flash(problem, FlashParams(**own), seed)


@dataclass(frozen=True)
class AlgorithmSpec:
    run: Callable[[Any, int, dict, int], RunResult]
    tunable: DecisionSpace | None = None
    defaults: dict | None = None


REGISTRY: dict[str, AlgorithmSpec] = {
    "random_search": AlgorithmSpec(_run_random),
    "sa": AlgorithmSpec(
        _run_sa,
        DecisionSpace((Decision.continuous("t0", 0.01, 10.0), Decision.continuous("alpha", 0.9, 0.999))),
        {"t0": 1.0, "alpha": 0.99},
    ),
    "de": AlgorithmSpec(
        _run_de,
        DecisionSpace((Decision.continuous("f", 0.1, 2.0), Decision.continuous("cr", 0.0, 1.0))),
        {"f": 0.75, "cr": 0.3},
    ),
    "ga": AlgorithmSpec(
        _run_ga,
        DecisionSpace((Decision.integer("pop_size", 10, 200),)),
        {"pop_size": 100},
    ),
    "sway": AlgorithmSpec(_run_sway),
    "flash": AlgorithmSpec(_run_flash),
}


def run_algorithm(kind: str, problem, budget: int, params: dict, seed: int) -> RunResult:
    try:
        spec = REGISTRY[kind]
    except KeyError:
        raise UnknownAlgorithmError(f"unknown algorithm {kind!r}; known: {', '.join(REGISTRY)}") from None
    return spec.run(problem, budget, dict(params), seed)
