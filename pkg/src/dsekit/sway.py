"""SWAY: oversample, cluster by decision distance, evaluate only representatives.

Clustering is recursive FastMap bisection. Each split projects the cluster
onto the axis between two far-apart members (the poles) and cuts it at the
median projection. Only the poles get evaluated; when one pole dominates the
other the losing half is dropped, otherwise both halves are explored.
Pruning assumes that nearby decisions have similar objectives; nothing here
checks that assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dsekit.core import (
    Budget,
    BudgetExhausted,
    DecisionSpace,
    EvaluatedSolution,
    Evaluator,
    Kind,
    RunResult,
    SeededRng,
    Solution,
    TraceEntry,
    dominates,
)
from dsekit.optimizers import ArchiveTracker

EUCLIDEAN, HAMMING = "euclidean", "hamming"
POLES, RANDOM = "poles", "random"


@dataclass(frozen=True)
class SwayParams:
    initial_size: int = 10_000
    enough: int | None = None  # None: ceil(sqrt(initial_size))
    distance: str | None = None  # None: hamming for all-boolean spaces, else euclidean
    representatives: str = POLES

    def __post_init__(self) -> None:
        if self.enough is not None and self.enough < 2:
            raise ValueError("enough must be >= 2")
        if self.initial_size <= self.resolved_enough:
            raise ValueError("initial_size must exceed enough")
        if self.distance not in (None, EUCLIDEAN, HAMMING):
            raise ValueError(f"distance must be {EUCLIDEAN} or {HAMMING}")
        if self.representatives not in (POLES, RANDOM):
            raise ValueError(f"representatives must be {POLES} or {RANDOM}")

    @property
    def resolved_enough(self) -> int:
        return self.enough if self.enough is not None else math.ceil(math.sqrt(self.initial_size))

    def depth(self) -> int:
        return math.ceil(math.log2(self.initial_size / self.resolved_enough))

    def min_budget(self) -> int:
        return 2 * self.depth() + self.resolved_enough


def auto_distance(space: DecisionSpace) -> str:
    return HAMMING if space.kinds == {Kind.BOOLEAN} else EUCLIDEAN


class DistanceFn:
    """Distances between encoded rows of one decision space.

    ``hamming`` counts differing decisions. ``euclidean`` min-max scales the
    numeric decisions and scores each categorical decision 0 (same) or 1.
    """

    def __init__(self, space: DecisionSpace, kind: str) -> None:
        self.kind = kind
        self.categorical = np.array([d.kind is Kind.CATEGORICAL for d in space.decisions])
        span = space.upper - space.lower
        self.lower = space.lower
        self.span = np.where(span > 0, span, 1.0)

    def prepare(self, X: np.ndarray) -> np.ndarray:
        if self.kind == HAMMING:
            return X
        Z = X.copy()
        num = ~self.categorical
        Z[:, num] = (X[:, num] - self.lower[num]) / self.span[num]
        return Z

    def to_all(self, Z: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Distance from the single prepared row ``z`` to every row of ``Z``."""
        if self.kind == HAMMING:
            return np.count_nonzero(Z != z, axis=1).astype(float)
        diff = Z - z
        diff[:, self.categorical] = (diff[:, self.categorical] != 0).astype(float)
        return np.sqrt((diff**2).sum(axis=1))


@dataclass(frozen=True)
class Split:
    west: int
    east: int
    west_half: np.ndarray
    east_half: np.ndarray
    degenerate: bool = False


def _farthest(d: np.ndarray, rng: SeededRng) -> int:
    return rng.argmax_random_tie(d)


def split_indices(Z: np.ndarray, members: np.ndarray, dist: DistanceFn, rng: SeededRng) -> Split:
    """FastMap bisection of ``members`` (row indices into prepared ``Z``)."""
    n = len(members)
    if n < 2:
        raise ValueError("cannot split fewer than two members")
    sub = Z[members]
    pivot = int(rng.integers(n))
    east = _farthest(dist.to_all(sub, sub[pivot]), rng)
    to_east = dist.to_all(sub, sub[east])
    west = _farthest(to_east, rng)
    to_west = dist.to_all(sub, sub[west])
    c = to_east[west]
    if c == 0:
        order = rng.permutation(n)
        half = n // 2
        return Split(int(members[order[0]]), int(members[order[-1]]),
                     members[np.sort(order[:half])], members[np.sort(order[half:])], True)
    # cosine rule: position along the west -> east axis
    x = (to_west**2 + c**2 - to_east**2) / (2 * c)
    order = np.lexsort((rng.random(n), x))
    half = n // 2
    return Split(int(members[west]), int(members[east]), members[order[:half]], members[order[half:]])


def fastmap_split(pop: Sequence[Solution], space: DecisionSpace, distance: str | None = None, rng: SeededRng | None = None):
    """Split solutions into two halves around two distant poles.

    Returns ``(west_pole, east_pole, west_half, east_half)``; the halves
    differ in size by at most one. All-identical input is halved at random
    (see :func:`split_indices` for the degenerate flag).
    """
    rng = rng or SeededRng(0)
    dist = DistanceFn(space, distance or auto_distance(space))
    Z = dist.prepare(space.encode_many(list(pop)))
    s = split_indices(Z, np.arange(len(pop)), dist, rng)
    return pop[s.west], pop[s.east], [pop[i] for i in s.west_half], [pop[i] for i in s.east_half]


def sway(problem, params: SwayParams | None = None, budget: int | None = None, seed: int = 0, candidates: Sequence[Solution] | None = None) -> RunResult:
    """Run SWAY and return the non-dominated set of everything it evaluated.

    ``candidates`` overrides the sampled initial population (a finite-pool
    problem supplies its own pool otherwise). If the budget runs out the
    result is flagged ``truncated``.
    """
    params = params or SwayParams()
    rng = SeededRng(seed)
    space = problem.space
    enough = params.resolved_enough
    if candidates is None:
        pool = problem.candidates()
        if pool is not None:
            take = min(params.initial_size, len(pool))
            candidates = [pool[int(i)] for i in rng.permutation(len(pool))[:take]]
        else:
            candidates = [space.sample(rng) for _ in range(params.initial_size)]
    candidates = list(candidates)
    budget = params.min_budget() if budget is None else int(budget)
    if budget < params.min_budget():
        raise ValueError(f"SWAY needs a budget of at least {params.min_budget()}")

    dist = DistanceFn(space, params.distance or auto_distance(space))
    Z = dist.prepare(space.encode_many(candidates))
    evaluator = Evaluator(problem, Budget(budget))
    tracker = ArchiveTracker()
    evaluated: dict[int, EvaluatedSolution] = {}
    trace: list[TraceEntry] = []
    stats = {"splits": 0, "decisive": 0, "degenerate": 0}

    def evaluate(i: int) -> EvaluatedSolution:
        if i not in evaluated:
            evaluated[i] = ev = evaluator(candidates[i])
            tracker.add([ev])
        return evaluated[i]

    def recurse(members: np.ndarray) -> None:
        if len(members) < enough:
            for i in members:
                evaluate(int(i))
            if evaluator.used and (not trace or trace[-1].eval_index < evaluator.used):
                trace.append(TraceEntry(evaluator.used, tracker.snapshot()))
            return
        s = split_indices(Z, members, dist, rng)
        stats["splits"] += 1
        stats["degenerate"] += s.degenerate
        if params.representatives == POLES:
            west_rep, east_rep = s.west, s.east
        else:
            west_rep = int(s.west_half[rng.integers(len(s.west_half))])
            east_rep = int(s.east_half[rng.integers(len(s.east_half))])
        w, e = evaluate(west_rep), evaluate(east_rep)
        if dominates(w.objectives, e.objectives):
            stats["decisive"] += 1
            recurse(s.west_half)
        elif dominates(e.objectives, w.objectives):
            stats["decisive"] += 1
            recurse(s.east_half)
        else:
            recurse(s.west_half)
            recurse(s.east_half)

    truncated = False
    try:
        recurse(np.arange(len(candidates)))
    except BudgetExhausted:
        truncated = True
    if evaluator.used and (not trace or trace[-1].eval_index < evaluator.used):
        trace.append(TraceEntry(evaluator.used, tracker.snapshot()))
    return RunResult(
        archive=tracker.archive(),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "sway", "budget": budget, "initial_size": len(candidates),
                     "enough": enough, "distance": dist.kind,
                     "representatives": params.representatives, **stats},
        seed=seed,
        truncated=truncated,
    )
