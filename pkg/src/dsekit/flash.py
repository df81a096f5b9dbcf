"""FLASH: sequential model-based optimization over a finite candidate pool.

After a small random start, every step fits one regression tree per
objective on the evaluated rows, predicts every unevaluated candidate and
lets an acquisition function choose the single next candidate to measure.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from dsekit.core import Budget, Evaluator, Kind, RunResult, SeededRng, TraceEntry
from dsekit.optimizers import ArchiveTracker
from dsekit.tree import fit_tree

DOMINANCE_COUNT, SINGLE_OBJECTIVE_MIN = "dominance_count", "single_objective_min"


@dataclass(frozen=True)
class FlashParams:
    init_samples: int = 20
    budget: int = 50
    acquisition: str = DOMINANCE_COUNT
    min_leaf: int = 4
    objective_index: int = 0  # used by single_objective_min
    explore: float = 0.05  # single_objective_min: chance of a uniform random pick

    def __post_init__(self) -> None:
        if self.acquisition not in (DOMINANCE_COUNT, SINGLE_OBJECTIVE_MIN):
            raise ValueError(f"acquisition must be {DOMINANCE_COUNT} or {SINGLE_OBJECTIVE_MIN}")
        if not 1 <= self.init_samples < self.budget:
            raise ValueError("need 1 <= init_samples < budget")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")


def dominance_counts(pred: np.ndarray) -> np.ndarray:
    """For each predicted row, how many other rows it dominates."""
    n, m = pred.shape
    le = np.ones((n, n), dtype=bool)
    lt = np.zeros((n, n), dtype=bool)
    for k in range(m):
        col = pred[:, k]
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return (le & lt).sum(axis=1)


def acquire(pred: np.ndarray, params: FlashParams, rng: SeededRng) -> int:
    """Index (into ``pred``) of the candidate to evaluate next."""
    if params.acquisition == SINGLE_OBJECTIVE_MIN:
        if rng.random() < params.explore:
            return int(rng.integers(len(pred)))
        return rng.argmax_random_tie(-pred[:, params.objective_index])
    return rng.argmax_random_tie(dominance_counts(pred))


def flash(pool, params: FlashParams | None = None, seed: int = 0) -> RunResult:
    """Run FLASH on a problem that exposes ``candidates()``."""
    params = params or FlashParams()
    candidates = pool.candidates()
    if candidates is None:
        raise ValueError("FLASH needs a finite candidate pool")
    if len(candidates) < params.init_samples:
        raise ValueError(f"pool of {len(candidates)} is smaller than init_samples={params.init_samples}")
    if params.budget > len(candidates):
        raise ValueError(f"budget {params.budget} exceeds the pool size {len(candidates)}")
    if params.acquisition == SINGLE_OBJECTIVE_MIN and not 0 <= params.objective_index < pool.num_objectives:
        raise IndexError("objective_index out of range")
    rng = SeededRng(seed)
    space = pool.space
    X = space.encode_many(candidates)
    cats = [j for j, d in enumerate(space.decisions) if d.kind is Kind.CATEGORICAL]
    evaluator = Evaluator(pool, Budget(params.budget))
    tracker = ArchiveTracker()

    start = rng.choice(len(candidates), size=params.init_samples, replace=False)
    evaluated = [int(i) for i in start]
    unevaluated = np.setdiff1d(np.arange(len(candidates)), evaluated)
    evs = [evaluator(candidates[i]) for i in evaluated]
    tracker.add(evs)
    Y = [ev.f for ev in evs]
    trace = [TraceEntry(evaluator.used, tracker.snapshot())]
    while not evaluator.budget.exhausted and len(unevaluated):
        train, targets = X[evaluated], np.vstack(Y)
        pred = np.column_stack([
            fit_tree(train, targets[:, k], params.min_leaf, cats).predict_many(X[unevaluated])
            for k in range(targets.shape[1])
        ])
        pick = acquire(pred, params, rng)
        chosen = int(unevaluated[pick])
        ev = evaluator(candidates[chosen])
        evaluated.append(chosen)
        unevaluated = np.delete(unevaluated, pick)
        Y.append(ev.f)
        tracker.add([ev])
        trace.append(TraceEntry(evaluator.used, tracker.snapshot()))
    return RunResult(
        archive=tracker.archive(),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "flash", **asdict(params), "evaluated": list(evaluated)},
        seed=seed,
    )
