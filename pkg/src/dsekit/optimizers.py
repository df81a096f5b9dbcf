"""Baseline and classic optimizers.

Every optimizer takes a problem, an evaluation budget and a seed, and
returns a :class:`~dsekit.core.RunResult`. Single-objective optimizers
(simulated annealing, differential evolution) minimize one chosen
objective in canonical form and return a one-member archive.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from dsekit.core import (
    Budget,
    BudgetExhausted,
    EvaluatedSolution,
    Evaluator,
    Kind,
    ParetoArchive,
    RunResult,
    SeededRng,
    Solution,
    TraceEntry,
    dominates,
    indicator_fitness_matrix,
    nondominated_mask,
    normalize_points,
    pairwise_epsilon,
)


class ArchiveTracker:
    """Incrementally maintained non-dominated set of a run's evaluations."""

    def __init__(self) -> None:
        self.members: list[EvaluatedSolution] = []
        self._seen: set[tuple] = set()

    def add(self, evs: Sequence[EvaluatedSolution]) -> None:
        fresh = []
        for ev in evs:
            if ev.solution.values not in self._seen:
                self._seen.add(ev.solution.values)
                fresh.append(ev)
        if not fresh:
            return
        pool = self.members + fresh
        mask = nondominated_mask(np.vstack([e.f for e in pool]))
        self.members = [e for e, k in zip(pool, mask) if k]

    def archive(self) -> ParetoArchive:
        return ParetoArchive(tuple(self.members))

    def snapshot(self) -> np.ndarray:
        return np.vstack([e.f for e in self.members])


def _pool(problem) -> list[Solution] | None:
    cands = problem.candidates()
    return list(cands) if cands is not None else None


def _check_budget(budget: int) -> None:
    if int(budget) < 1:
        raise ValueError("budget must be >= 1")


# ---------------------------------------------------------------------------
# Random search
# ---------------------------------------------------------------------------


def random_search(problem, budget: int, seed: int, without_replacement: bool = False) -> RunResult:
    """Evaluate ``budget`` uniform random solutions.

    Finite-pool problems are sampled from their pool; ``without_replacement``
    draws distinct pool members (and caps the budget at the pool size).
    """
    _check_budget(budget)
    rng = SeededRng(seed)
    pool = _pool(problem)
    if without_replacement:
        if pool is None:
            raise ValueError("sampling without replacement needs a finite pool")
        budget = min(budget, len(pool))
        order = rng.permutation(len(pool))[:budget]
        draws = [pool[i] for i in order]
    elif pool is not None:
        draws = [pool[int(i)] for i in rng.integers(len(pool), size=budget)]
    else:
        draws = [problem.space.sample(rng) for _ in range(budget)]

    evaluator = Evaluator(problem, Budget(budget))
    tracker = ArchiveTracker()
    trace = []
    every = max(1, budget // 20)
    batch = []
    for k, sol in enumerate(draws, start=1):
        batch.append(evaluator(sol))
        if k % every == 0 or k == budget:
            tracker.add(batch)
            batch = []
            trace.append(TraceEntry(evaluator.used, tracker.snapshot()))
    return RunResult(
        archive=tracker.archive(),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "random_search", "budget": budget, "without_replacement": without_replacement},
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Simulated annealing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SaParams:
    t0: float = 1.0
    alpha: float = 0.99
    neighbor_scale: float = 0.1

    def __post_init__(self) -> None:
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.neighbor_scale <= 0:
            raise ValueError("neighbor_scale must be > 0")


def acceptance_probability(delta: float, temperature: float) -> float:
    """Chance of moving to a candidate that is ``delta`` worse."""
    if delta <= 0:
        return 1.0
    if temperature <= 0:
        return 0.0
    return math.exp(-delta / temperature)


def _neighbor(space, sol: Solution, scale: float, rng: SeededRng) -> Solution:
    values = list(sol.values)
    i = int(rng.integers(len(space)))
    d = space.decisions[i]
    if d.kind is Kind.CONTINUOUS:
        values[i] = d.decode(values[i] + rng.normal(0.0, scale * (d.hi - d.lo)))
    elif d.kind is Kind.INTEGER:
        step = rng.normal(0.0, max(1.0, scale * (d.hi - d.lo)))
        values[i] = d.decode(values[i] + step)
    elif d.kind is Kind.BOOLEAN:
        values[i] = not values[i]
    else:
        others = [lvl for lvl in d.levels if lvl != values[i]]
        values[i] = others[int(rng.integers(len(others)))]
    return Solution(tuple(values))


def _check_objective(problem, objective_index: int) -> None:
    if not 0 <= objective_index < problem.num_objectives:
        raise IndexError(f"objective_index {objective_index} out of range for m={problem.num_objectives}")


def simulated_annealing(problem, budget: int, params: SaParams | None = None, seed: int = 0, objective_index: int = 0) -> RunResult:
    """Classic annealer with geometric cooling on one canonical objective.

    The energy difference is divided by the range of energies seen so far,
    so ``t0`` is on a normalized scale.
    """
    _check_budget(budget)
    _check_objective(problem, objective_index)
    params = params or SaParams()
    rng = SeededRng(seed)
    evaluator = Evaluator(problem, Budget(budget))
    pool = _pool(problem)

    def fresh() -> Solution:
        return pool[int(rng.integers(len(pool)))] if pool else problem.space.sample(rng)

    current = evaluator(fresh())
    best = current
    lo = hi = current.f[objective_index]
    temperature = params.t0
    trace = [TraceEntry(current.eval_index, best.f[None, :])]
    while not evaluator.budget.exhausted:
        cand_sol = _neighbor(problem.space, current.solution, params.neighbor_scale, rng)
        try:
            cand = evaluator(cand_sol)
        except KeyError:  # finite pools: neighbour outside the measured rows
            cand = evaluator(fresh())
        e = cand.f[objective_index]
        lo, hi = min(lo, e), max(hi, e)
        delta = e - current.f[objective_index]
        scaled = delta / (hi - lo) if hi > lo else delta
        if delta <= 0 or rng.random() < acceptance_probability(scaled, temperature):
            current = cand
        if e < best.f[objective_index]:
            best = cand
            trace.append(TraceEntry(cand.eval_index, best.f[None, :]))
        temperature *= params.alpha
    return RunResult(
        archive=ParetoArchive((best,)),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "sa", "budget": budget, "objective_index": objective_index, **asdict(params)},
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Differential evolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeParams:
    np: int | None = None  # None: min(10 * dims, budget // 10), at least 4
    f: float = 0.75
    cr: float = 0.3

    def __post_init__(self) -> None:
        if self.np is not None and self.np < 4:
            raise ValueError("DE population must be >= 4")
        if not 0 < self.f <= 2:
            raise ValueError("f must lie in (0, 2]")
        if not 0 <= self.cr <= 1:
            raise ValueError("cr must lie in [0, 1]")

    def population(self, dims: int, budget: int) -> int:
        return self.np if self.np is not None else max(4, min(10 * dims, budget // 10))


def de_trial(pop: np.ndarray, i: int, f: float, cr: float, lower: np.ndarray, upper: np.ndarray, rng: SeededRng) -> np.ndarray:
    """DE/rand/1/bin trial vector for member ``i``, clamped into bounds."""
    n, d = pop.shape
    peers = [j for j in range(n) if j != i]
    a, b, c = (pop[j] for j in rng.choice(peers, size=3, replace=False))
    mutant = a + f * (b - c)
    cross = rng.random(d) < cr
    cross[int(rng.integers(d))] = True
    trial = np.where(cross, mutant, pop[i])
    return np.clip(trial, lower, upper)


def differential_evolution(problem, budget: int, params: DeParams | None = None, seed: int = 0, objective_index: int = 0) -> RunResult:
    """DE/rand/1/bin with greedy replacement on one canonical objective.

    Integer decisions are rounded and clamped after every trial.
    """
    _check_budget(budget)
    _check_objective(problem, objective_index)
    space = problem.space
    if not space.kinds <= {Kind.CONTINUOUS, Kind.INTEGER}:
        raise ValueError("differential evolution needs continuous or integer decisions")
    params = params or DeParams()
    np_ = params.population(len(space), budget)
    if np_ > budget:
        raise ValueError(f"population of {np_} exceeds the budget of {budget}")
    rng = SeededRng(seed)
    evaluator = Evaluator(problem, Budget(budget))
    lower, upper = space.lower, space.upper

    members = [evaluator(space.sample(rng)) for _ in range(np_)]
    pop = space.encode_many([m.solution for m in members])
    fit = np.array([m.f[objective_index] for m in members])
    best = members[int(np.argmin(fit))]
    trace = [TraceEntry(evaluator.used, best.f[None, :])]
    while not evaluator.budget.exhausted:
        new_pop, new_fit, new_members = pop.copy(), fit.copy(), list(members)
        for i in range(np_):
            if evaluator.budget.exhausted:
                break
            trial = space.decode(de_trial(pop, i, params.f, params.cr, lower, upper, rng))
            ev = evaluator(trial)
            e = ev.f[objective_index]
            if e <= fit[i]:
                new_pop[i], new_fit[i], new_members[i] = space.encode(trial), e, ev
            if e < best.f[objective_index]:
                best = ev
                trace.append(TraceEntry(ev.eval_index, best.f[None, :]))
        pop, fit, members = new_pop, new_fit, new_members
    return RunResult(
        archive=ParetoArchive((best,)),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "de", "budget": budget, "objective_index": objective_index,
                     "np": np_, "f": params.f, "cr": params.cr},
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Multi-objective GA
# ---------------------------------------------------------------------------


BINARY_DOM, INDICATOR_DOM = "binary_dom", "indicator_dom"


@dataclass(frozen=True)
class GaParams:
    pop_size: int = 100
    selection: str = INDICATOR_DOM
    crossover_prob: float = 0.9
    mutation_prob: float | None = None  # None: 1 / dims
    sbx_eta: float = 20.0
    pm_eta: float = 20.0
    kappa: float = 0.05

    def __post_init__(self) -> None:
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError("pop_size must be even and >= 4")
        if self.selection not in (BINARY_DOM, INDICATOR_DOM):
            raise ValueError(f"selection must be {BINARY_DOM} or {INDICATOR_DOM}")
        if not 0 <= self.crossover_prob <= 1:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if self.mutation_prob is not None and not 0 <= self.mutation_prob <= 1:
            raise ValueError("mutation_prob must lie in [0, 1]")


def tournament(i: int, j: int, objectives: np.ndarray, fitness: np.ndarray | None, selection: str, rng: SeededRng) -> int:
    """Binary tournament between population members ``i`` and ``j``."""
    if selection == BINARY_DOM:
        if dominates(objectives[i], objectives[j]):
            return i
        if dominates(objectives[j], objectives[i]):
            return j
    elif fitness[i] != fitness[j]:
        return i if fitness[i] > fitness[j] else j
    return i if rng.random() < 0.5 else j


def sbx(p1: np.ndarray, p2: np.ndarray, lower: np.ndarray, upper: np.ndarray, eta: float, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    """Bounded simulated binary crossover; each variable crosses with prob 0.5."""
    n = len(p1)
    draw_cross, u, draw_swap = rng.random(n), rng.random(n), rng.random(n)
    c1, c2 = p1.astype(float).copy(), p2.astype(float).copy()
    k = (draw_cross <= 0.5) & (np.abs(p1 - p2) > 1e-14)
    if not k.any():
        return c1, c2
    y1, y2 = np.minimum(p1[k], p2[k]), np.maximum(p1[k], p2[k])
    lo, hi, u = lower[k], upper[k], u[k]
    gap = y2 - y1
    expo = 1.0 / (eta + 1.0)

    def spread_factor(beta: np.ndarray) -> np.ndarray:
        alpha = 2.0 - beta ** -(eta + 1.0)
        inner = np.where(u <= 1.0 / alpha, u * alpha, 1.0 / (2.0 - u * alpha))
        return inner**expo

    v1 = 0.5 * ((y1 + y2) - spread_factor(1.0 + 2.0 * (y1 - lo) / gap) * gap)
    v2 = 0.5 * ((y1 + y2) + spread_factor(1.0 + 2.0 * (hi - y2) / gap) * gap)
    v1, v2 = np.clip(v1, lo, hi), np.clip(v2, lo, hi)
    swap = draw_swap[k] < 0.5
    v1, v2 = np.where(swap, v2, v1), np.where(swap, v1, v2)
    c1[k], c2[k] = v1, v2
    return c1, c2


def polynomial_mutation(x: np.ndarray, lower: np.ndarray, upper: np.ndarray, eta: float, prob: float, rng: SeededRng) -> np.ndarray:
    n = len(x)
    hit, u = rng.random(n) < prob, rng.random(n)
    y = x.astype(float).copy()
    if not hit.any():
        return y
    lo, hi, u, v = lower[hit], upper[hit], u[hit], y[hit]
    span = hi - lo
    d1, d2 = (v - lo) / span, (hi - v) / span
    power = 1.0 / (eta + 1.0)
    low_branch = u < 0.5
    val_lo = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
    val_hi = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
    dq = np.where(low_branch, np.abs(val_lo) ** power - 1.0, 1.0 - np.abs(val_hi) ** power)
    y[hit] = np.clip(v + dq * span, lo, hi)
    return y


class _Variation:
    """Kind-aware crossover and mutation on encoded vectors."""

    def __init__(self, space, params: GaParams) -> None:
        kinds = [d.kind for d in space.decisions]
        self.space = space
        self.cont = np.array([k is Kind.CONTINUOUS for k in kinds])
        self.boolean = np.array([k is Kind.BOOLEAN for k in kinds])
        self.reset = ~self.cont & ~self.boolean  # integer and categorical
        self.lower, self.upper = space.lower, space.upper
        self.params = params
        self.pm = params.mutation_prob if params.mutation_prob is not None else 1.0 / len(space)

    def __call__(self, x1: np.ndarray, x2: np.ndarray, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        c1, c2 = x1.copy(), x2.copy()
        if rng.random() < p.crossover_prob:
            if self.cont.any():
                idx = self.cont
                a, b = sbx(x1[idx], x2[idx], self.lower[idx], self.upper[idx], p.sbx_eta, rng)
                c1[idx], c2[idx] = a, b
            other = ~self.cont
            if other.any():
                swap = other & (rng.random(len(x1)) < 0.5)
                c1[swap], c2[swap] = x2[swap], x1[swap]
        return self._mutate(c1, rng), self._mutate(c2, rng)

    def _mutate(self, x: np.ndarray, rng: SeededRng) -> np.ndarray:
        if self.pm == 0:
            return x
        idx = self.cont
        if idx.any():
            x[idx] = polynomial_mutation(x[idx], self.lower[idx], self.upper[idx], self.params.pm_eta, self.pm, rng)
        hit = rng.random(len(x)) < self.pm
        flip = hit & self.boolean
        x[flip] = 1.0 - x[flip]
        for k in np.flatnonzero(hit & self.reset):
            x[k] = float(rng.integers(int(self.lower[k]), int(self.upper[k]), endpoint=True))
        return x


def truncate_by_fitness(points: np.ndarray, keep: int, kappa: float, rng: SeededRng) -> np.ndarray:
    """Indices of ``keep`` rows left after repeatedly removing the least fit.

    Fitness is recomputed incrementally after each removal. Ties for the
    worst fitness are broken at random.
    """
    n = len(points)
    if keep >= n:
        return np.arange(n)
    norm = normalize_points(points)
    eps = pairwise_epsilon(norm)
    contrib = -np.exp(-eps / kappa)
    np.fill_diagonal(contrib, 0.0)
    fitness = contrib.sum(axis=0)
    alive = np.ones(n, dtype=bool)
    for _ in range(n - keep):
        masked = np.where(alive, fitness, np.inf)
        worst = int(np.argmin(masked))
        ties = np.flatnonzero(masked == masked[worst])
        if len(ties) > 1:
            worst = int(rng.choice(ties))
        alive[worst] = False
        fitness -= contrib[worst]
    return np.flatnonzero(alive)


def _environmental_selection(objs: np.ndarray, pop_size: int, kappa: float, rng: SeededRng) -> np.ndarray:
    nd = np.flatnonzero(nondominated_mask(objs))
    if len(nd) >= pop_size:
        return nd[truncate_by_fitness(objs[nd], pop_size, kappa, rng)]
    rest = np.setdiff1d(np.arange(len(objs)), nd)
    fitness = indicator_fitness_matrix(normalize_points(objs), kappa)
    # random key breaks fitness ties
    order = np.lexsort((rng.random(len(rest)), -fitness[rest]))
    return np.concatenate([nd, rest[order][: pop_size - len(nd)]])


def ga_multiobjective(problem, budget: int, params: GaParams | None = None, seed: int = 0) -> RunResult:
    """Generational elitist GA with binary or indicator domination.

    Survivors are the non-dominated members of parents plus offspring,
    topped up (or truncated) by additive-epsilon indicator fitness.
    """
    _check_budget(budget)
    params = params or GaParams()
    if params.pop_size > budget:
        raise ValueError(f"pop_size {params.pop_size} exceeds budget {budget}")
    rng = SeededRng(seed)
    space = problem.space
    evaluator = Evaluator(problem, Budget(budget))
    variation = _Variation(space, params)
    tracker = ArchiveTracker()

    members = [evaluator(space.sample(rng)) for _ in range(params.pop_size)]
    tracker.add(members)
    trace = [TraceEntry(evaluator.used, tracker.snapshot())]
    while not evaluator.budget.exhausted:
        objs = np.vstack([m.f for m in members])
        fitness = None
        if params.selection == INDICATOR_DOM:
            fitness = indicator_fitness_matrix(normalize_points(objs), params.kappa)
        encoded = space.encode_many([m.solution for m in members])
        offspring: list[EvaluatedSolution] = []
        try:
            while len(offspring) < params.pop_size:
                parents = []
                for _ in range(2):
                    i, j = rng.choice(len(members), size=2, replace=False)
                    parents.append(tournament(int(i), int(j), objs, fitness, params.selection, rng))
                c1, c2 = variation(encoded[parents[0]], encoded[parents[1]], rng)
                for child in (c1, c2):
                    offspring.append(evaluator(space.decode(child)))
        except BudgetExhausted:
            pass
        tracker.add(offspring)
        combined = members + offspring
        keep = _environmental_selection(np.vstack([m.f for m in combined]), params.pop_size, params.kappa, rng)
        members = [combined[k] for k in keep]
        if evaluator.used > trace[-1].eval_index:
            trace.append(TraceEntry(evaluator.used, tracker.snapshot()))
    return RunResult(
        archive=tracker.archive(),
        evals_used=evaluator.used,
        trace=trace,
        config_echo={"algorithm": "ga", "budget": budget, **asdict(params)},
        seed=seed,
    )
