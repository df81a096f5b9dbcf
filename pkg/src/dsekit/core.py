"""Decision/objective data model, dominance, seeded randomness and budgets.

Every optimizer in the package works on the canonical *all-minimize* form:
objectives declared as ``maximize`` are negated when an
:class:`ObjectiveVector` is built and negated back when read through
:attr:`ObjectiveVector.raw`.

Randomness comes from a single generator family, numpy's ``PCG64`` (a
128-bit-state permuted congruential generator, seeded with a 64-bit unsigned
integer). :class:`SeededRng` is the only way the package creates randomness.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

MAX_SEED = 2**64 - 1


class IncompatibleObjectivesError(ValueError):
    """Two objective vectors (or fronts) do not share the same arity."""


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation is requested after the budget is spent."""


# ---------------------------------------------------------------------------
# Decision space
# ---------------------------------------------------------------------------


class Kind(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BOOLEAN = "boolean"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Decision:
    """One named decision and its domain."""

    name: str
    kind: Kind
    lo: float | None = None
    hi: float | None = None
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in (Kind.CONTINUOUS, Kind.INTEGER):
            if self.lo is None or self.hi is None:
                raise ValueError(f"decision {self.name!r} needs lo and hi")
            if not self.lo < self.hi:
                raise ValueError(f"decision {self.name!r}: lo must be < hi")
            if self.kind is Kind.INTEGER:
                if int(self.lo) != self.lo or int(self.hi) != self.hi:
                    raise ValueError(f"decision {self.name!r}: integer bounds")
                object.__setattr__(self, "lo", int(self.lo))
                object.__setattr__(self, "hi", int(self.hi))
        if self.kind is Kind.CATEGORICAL:
            levels = tuple(self.levels)
            if len(set(levels)) < 2 or len(set(levels)) != len(levels):
                raise ValueError(
                    f"decision {self.name!r}: need >= 2 distinct levels"
                )
            object.__setattr__(self, "levels", levels)

    @classmethod
    def continuous(cls, name: str, lo: float, hi: float) -> Decision:
        return cls(name, Kind.CONTINUOUS, float(lo), float(hi))

    @classmethod
    def integer(cls, name: str, lo: int, hi: int) -> Decision:
        return cls(name, Kind.INTEGER, lo, hi)

    @classmethod
    def boolean(cls, name: str) -> Decision:
        return cls(name, Kind.BOOLEAN)

    @classmethod
    def categorical(cls, name: str, levels: Sequence[str]) -> Decision:
        return cls(name, Kind.CATEGORICAL, levels=tuple(levels))

    @property
    def is_numeric(self) -> bool:
        return self.kind in (Kind.CONTINUOUS, Kind.INTEGER)

    def contains(self, value: Any) -> bool:
        if self.kind is Kind.CONTINUOUS:
            return (
                isinstance(value, (int, float, np.floating, np.integer))
                and not isinstance(value, bool)
                and math.isfinite(value)
                and self.lo <= value <= self.hi
            )
        if self.kind is Kind.INTEGER:
            return (
                isinstance(value, (int, np.integer))
                and not isinstance(value, bool)
                and self.lo <= value <= self.hi
            )
        if self.kind is Kind.BOOLEAN:
            return isinstance(value, (bool, np.bool_))
        return value in self.levels

    def encode(self, value: Any) -> float:
        if self.kind is Kind.CATEGORICAL:
            return float(self.levels.index(value))
        return float(value)

    def decode(self, x: float) -> Any:
        """Map an encoded real back into the domain (round and clamp)."""
        if self.kind is Kind.CONTINUOUS:
            return float(min(max(x, self.lo), self.hi))
        if self.kind is Kind.INTEGER:
            return int(min(max(round(x), self.lo), self.hi))
        if self.kind is Kind.BOOLEAN:
            return bool(x >= 0.5)
        idx = int(min(max(round(x), 0), len(self.levels) - 1))
        return self.levels[idx]

    def describe(self) -> str:
        if self.is_numeric:
            return f"{self.kind.value}[{self.lo},{self.hi}]"
        if self.kind is Kind.CATEGORICAL:
            return f"categorical{{{'|'.join(self.levels)}}}"
        return "boolean"


@dataclass(frozen=True)
class Solution:
    """A point in a decision space; ``values`` follows the space's order."""

    values: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Any:
        return self.values[i]


@dataclass(frozen=True)
class DecisionSpace:
    decisions: tuple[Decision, ...]

    def __post_init__(self) -> None:
        decisions = tuple(self.decisions)
        if not decisions:
            raise ValueError("a decision space needs at least one decision")
        names = [d.name for d in decisions]
        if len(set(names)) != len(names):
            raise ValueError("decision names must be unique")
        object.__setattr__(self, "decisions", decisions)

    @classmethod
    def box(cls, n: int, lo: float = 0.0, hi: float = 1.0, prefix: str = "x") -> DecisionSpace:
        return cls(tuple(Decision.continuous(f"{prefix}{i + 1}", lo, hi) for i in range(n)))

    @classmethod
    def bits(cls, names: Sequence[str]) -> DecisionSpace:
        return cls(tuple(Decision.boolean(name) for name in names))

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self):
        return iter(self.decisions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.decisions]

    @property
    def kinds(self) -> set[Kind]:
        return {d.kind for d in self.decisions}

    @cached_property
    def lower(self) -> np.ndarray:
        """Encoded lower bounds (0 for boolean and categorical)."""
        return np.array([d.lo if d.is_numeric else 0.0 for d in self.decisions], dtype=float)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array(
            [
                d.hi if d.is_numeric
                else (1.0 if d.kind is Kind.BOOLEAN else len(d.levels) - 1.0)
                for d in self.decisions
            ],
            dtype=float,
        )

    @cached_property
    def all_continuous(self) -> bool:
        return self.kinds == {Kind.CONTINUOUS}

    def contains(self, solution: Solution) -> bool:
        try:
            self.check(solution)
        except ValueError:
            return False
        return True

    def check(self, solution: Solution) -> Solution:
        if len(solution) != len(self):
            raise ValueError(
                f"solution has {len(solution)} values, space has {len(self)} decisions"
            )
        if self.all_continuous:
            try:
                x = np.asarray(solution.values, dtype=float)
            except (TypeError, ValueError):
                x = None
            if (
                x is not None
                and not any(isinstance(v, (bool, np.bool_, str)) for v in solution.values)
                and np.all(x >= self.lower) and np.all(x <= self.upper)
            ):
                return solution
        for d, v in zip(self.decisions, solution.values):
            if not d.contains(v):
                raise ValueError(f"value {v!r} outside domain of {d.name} ({d.describe()})")
        return solution

    def sample(self, rng: SeededRng) -> Solution:
        """Uniform random solution (one uniform draw per decision)."""
        return self.decode_unit(rng.random(len(self)))

    def decode_unit(self, u: np.ndarray) -> Solution:
        """Map a vector in ``[0, 1)^d`` onto the space, uniformly per decision."""
        if self.all_continuous:
            return Solution(tuple((self.lower + u * (self.upper - self.lower)).tolist()))
        values = []
        for d, x in zip(self.decisions, u):
            if d.kind is Kind.CONTINUOUS:
                values.append(float(d.lo + x * (d.hi - d.lo)))
            elif d.kind is Kind.INTEGER:
                values.append(int(min(d.lo + math.floor(x * (d.hi - d.lo + 1)), d.hi)))
            elif d.kind is Kind.BOOLEAN:
                values.append(bool(x < 0.5))
            else:
                values.append(d.levels[min(int(x * len(d.levels)), len(d.levels) - 1)])
        return Solution(tuple(values))

    def encode(self, solution: Solution) -> np.ndarray:
        return np.array([d.encode(v) for d, v in zip(self.decisions, solution.values)], dtype=float)

    def encode_many(self, solutions: Sequence[Solution]) -> np.ndarray:
        if not solutions:
            return np.empty((0, len(self)))
        if self.all_continuous:
            return np.array([s.values for s in solutions], dtype=float)
        return np.vstack([self.encode(s) for s in solutions])

    def decode(self, x: Sequence[float]) -> Solution:
        """Round-and-clamp an encoded vector into a valid :class:`Solution`."""
        if self.all_continuous:
            return Solution(tuple(np.clip(np.asarray(x, dtype=float), self.lower, self.upper).tolist()))
        return Solution(tuple(d.decode(float(v)) for d, v in zip(self.decisions, x)))


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class ObjectiveVector:
    """Objective values stored in canonical all-minimize form.

    Build from raw problem outputs with :meth:`from_raw`; ``values`` always
    holds the canonical (maximize-negated) numbers.
    """

    values: tuple[float, ...]
    directions: tuple[Direction, ...] = ()

    def __post_init__(self) -> None:
        values = tuple(map(float, self.values))
        directions = self.directions
        if not all(isinstance(d, Direction) for d in directions):
            directions = tuple(Direction(d) for d in directions)
        directions = directions or (Direction.MINIMIZE,) * len(values)
        if len(directions) != len(values):
            raise ValueError("one direction per objective required")
        if not math.isfinite(sum(values)) and not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite objective value in {values}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "directions", directions)

    @classmethod
    def from_raw(cls, raw: Iterable[float], directions: Sequence[Direction | str] | None = None) -> ObjectiveVector:
        raw = [float(v) for v in raw]
        if not directions:
            dirs = (Direction.MINIMIZE,) * len(raw)
        elif all(isinstance(d, Direction) for d in directions):
            dirs = tuple(directions)
        else:
            dirs = tuple(Direction(d) for d in directions)
        if len(dirs) != len(raw):
            raise ValueError("one direction per objective required")
        canon = tuple(-v if d is Direction.MAXIMIZE else v for v, d in zip(raw, dirs))
        return cls(canon, dirs)

    @property
    def raw(self) -> tuple[float, ...]:
        return tuple(
            -v if d is Direction.MAXIMIZE else v for v, d in zip(self.values, self.directions)
        )

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype or float)


@dataclass(frozen=True)
class EvaluatedSolution:
    solution: Solution
    objectives: ObjectiveVector
    eval_index: int

    @property
    def f(self) -> np.ndarray:
        return np.asarray(self.objectives.values)


def _vec(u: ObjectiveVector | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(u, ObjectiveVector):
        return np.asarray(u.values, dtype=float)
    if isinstance(u, EvaluatedSolution):
        return np.asarray(u.objectives.values, dtype=float)
    return np.asarray(u, dtype=float)


def _same_arity(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[-1] != v.shape[-1]:
        raise IncompatibleObjectivesError(
            f"objective arity mismatch: {u.shape[-1]} vs {v.shape[-1]}"
        )


def dominates(u, v) -> bool:
    """True iff ``u`` is no worse than ``v`` everywhere and better somewhere.

    Comparison is exact; callers that need a tolerance must round first.
    """
    a, b = _vec(u), _vec(v)
    _same_arity(a, b)
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(points: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Boolean mask of rows of ``points`` dominated by no other row."""
    pts = np.asarray(points, dtype=float)
    n, m = pts.shape if pts.ndim == 2 else (len(pts), 1)
    pts = pts.reshape(n, m)
    keep = np.ones(n, dtype=bool)
    # loop over objectives: reductions along a tiny trailing axis are slow
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]
        le = np.ones((n, len(block)), dtype=bool)
        lt = np.zeros((n, len(block)), dtype=bool)
        for k in range(m):
            col, other = pts[:, k, None], block[None, :, k]
            le &= col <= other
            lt |= col < other
        keep[start:start + chunk] = ~np.any(le & lt, axis=0)
    return keep


def pairwise_epsilon(points: np.ndarray) -> np.ndarray:
    """``eps[y, x] = max_i (points[y, i] - points[x, i])``."""
    pts = np.asarray(points, dtype=float)
    eps = pts[:, None, 0] - pts[None, :, 0]
    for k in range(1, pts.shape[1]):
        np.maximum(eps, pts[:, None, k] - pts[None, :, k], out=eps)
    return eps


@dataclass(frozen=True)
class ParetoArchive:
    """Mutually non-dominated evaluated solutions."""

    members: tuple[EvaluatedSolution, ...] = ()

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if members:
            arity = {len(m.objectives) for m in members}
            if len(arity) != 1:
                raise IncompatibleObjectivesError("archive members differ in arity")
            if not nondominated_mask(np.vstack([m.f for m in members])).all():
                raise ValueError("archive members must be mutually non-dominated")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def objectives(self) -> np.ndarray:
        """Canonical objective matrix, one row per member."""
        if not self.members:
            return np.empty((0, 0))
        return np.vstack([m.f for m in self.members])


def nondominated_filter(members: Sequence[EvaluatedSolution]) -> ParetoArchive:
    """Keep the members no other member dominates, in input order."""
    members = list(members)
    if not members:
        return ParetoArchive()
    arity = {len(m.objectives) for m in members}
    if len(arity) != 1:
        raise IncompatibleObjectivesError("members differ in objective arity")
    mask = nondominated_mask(np.vstack([m.f for m in members]))
    return ParetoArchive(tuple(m for m, k in zip(members, mask) if k))


def epsilon_indicator(u, v) -> float:
    """Additive epsilon: the smallest shift making ``u`` weakly dominate ``v``."""
    a, b = _vec(u), _vec(v)
    _same_arity(a, b)
    return float(np.max(a - b))


def indicator_fitness_matrix(points: np.ndarray, kappa: float = 0.05) -> np.ndarray:
    """Vectorized indicator fitness for every row of a normalized matrix."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ValueError("indicator fitness needs a population of at least 2")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    eps = pairwise_epsilon(pts)
    contrib = -np.exp(-eps / kappa)
    np.fill_diagonal(contrib, 0.0)
    return contrib.sum(axis=0)


def indicator_fitness(x: EvaluatedSolution, population: Sequence[EvaluatedSolution], kappa: float = 0.05) -> float:
    """Fitness of ``x`` relative to its peers; larger is better.

    ``population`` may or may not contain ``x`` itself (matched by identity);
    it is skipped either way.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    peers = [y for y in population if y is not x]
    if len(peers) + 1 < 2:
        raise ValueError("indicator fitness needs a population of at least 2")
    return float(sum(-math.exp(-epsilon_indicator(y.objectives, x.objectives) / kappa) for y in peers))


def normalize_points(points: np.ndarray, bounds: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("cannot normalize an empty front")
    if bounds is None:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    span = hi - lo
    out = np.zeros_like(pts)
    ok = span > 0
    out[:, ok] = (pts[:, ok] - lo[ok]) / span[ok]
    return out


def normalize_front(front: Sequence[ObjectiveVector], bounds: Sequence[tuple[float, float]] | None = None) -> list[ObjectiveVector]:
    """Min-max scale each objective; constant objectives map to 0.

    ``bounds`` is an optional per-objective ``(min, max)`` list.
    """
    front = list(front)
    if not front:
        raise ValueError("cannot normalize an empty front")
    pts = np.vstack([_vec(v) for v in front])
    b = None
    if bounds is not None:
        arr = np.asarray(bounds, dtype=float)
        b = (arr[:, 0], arr[:, 1])
    scaled = normalize_points(pts, b)
    return [ObjectiveVector(tuple(row)) for row in scaled]


def minkowski_distance(x: Sequence[float], y: Sequence[float], n: float = 2.0) -> float:
    if n < 1:
        raise ValueError("Minkowski order must be >= 1")
    a, b = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if a.shape != b.shape:
        raise ValueError("vectors differ in arity")
    return float(np.sum(np.abs(a - b) ** n) ** (1.0 / n))


# ---------------------------------------------------------------------------
# Randomness and budgets
# ---------------------------------------------------------------------------


class SeededRng:
    """Deterministic PCG64 stream owned by a single run.

    Delegates the usual ``numpy.random.Generator`` methods (``random``,
    ``integers``, ``uniform``, ``normal``, ``choice``, ``permutation`` ...).
    """

    def __init__(self, seed: int) -> None:
        seed = int(seed)
        if not 0 <= seed <= MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.generator = g = np.random.Generator(np.random.PCG64(seed))
        # bound once; these are the hot paths
        self.random, self.integers, self.uniform = g.random, g.integers, g.uniform
        self.normal, self.choice, self.permutation = g.normal, g.choice, g.permutation

    def __getattr__(self, name: str):
        return getattr(self.generator, name)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed})"

    def child(self) -> SeededRng:
        """Independent generator whose seed is drawn from this stream."""
        return SeededRng(int(self.generator.integers(0, 2**63)))

    def argmax_random_tie(self, values: np.ndarray) -> int:
        values = np.asarray(values)
        best = np.flatnonzero(values == values.max())
        return int(best[0]) if len(best) == 1 else int(self.generator.choice(best))


@dataclass
class Budget:
    max_evals: int
    used: int = 0

    def __post_init__(self) -> None:
        if self.max_evals <= 0:
            raise ValueError("budget must be positive")
        if not 0 <= self.used <= self.max_evals:
            raise ValueError("used must lie in [0, max_evals]")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evals

    def consume(self, n: int = 1) -> None:
        if self.used + n > self.max_evals:
            raise BudgetExhausted(f"budget of {self.max_evals} evaluations exhausted")
        self.used += n


@dataclass
class Evaluator:
    """Budget-counted access to a problem; numbers evaluations from 1."""

    problem: Any
    budget: Budget
    history: list[EvaluatedSolution] = field(default_factory=list)

    def __call__(self, solution: Solution) -> EvaluatedSolution:
        self.problem.space.check(solution)
        if self.budget.exhausted:
            raise BudgetExhausted(f"budget of {self.budget.max_evals} evaluations exhausted")
        objectives = self.problem.evaluate(solution)
        self.budget.consume()
        ev = EvaluatedSolution(solution, objectives, self.budget.used)
        self.history.append(ev)
        return ev

    @property
    def used(self) -> int:
        return self.budget.used


# ---------------------------------------------------------------------------
# Front CSV
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    return repr(float(x))


def front_to_csv(points: np.ndarray) -> str:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"o{i + 1}" for i in range(m)])
    for row in pts:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def write_front_csv(path: str | Path, points: np.ndarray) -> None:
    Path(path).write_text(front_to_csv(points), encoding="utf-8", newline="\n")


def read_front_csv(path: str | Path) -> np.ndarray:
    """Parse an ``o1,...,om`` front file into an ``(n, m)`` float array."""
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError(f"{path}: empty front file")
    header = [h.strip() for h in rows[0]]
    if header != [f"o{i + 1}" for i in range(len(header))]:
        raise ValueError(f"{path}: header must be o1,...,om")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} values")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"{path}:{lineno}: non-finite value")
        data.append(vals)
    if not data:
        raise ValueError(f"{path}: front has no points")
    return np.array(data, dtype=float)


# ---------------------------------------------------------------------------
# Run results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    eval_index: int
    front: np.ndarray  # canonical objectives of the archive (or best) at that point


@dataclass(frozen=True)
class RunResult:
    archive: ParetoArchive
    evals_used: int
    trace: tuple[TraceEntry, ...]
    config_echo: dict
    seed: int
    truncated: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "trace", tuple(self.trace))
        idx = [t.eval_index for t in self.trace]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("trace eval indices must be strictly increasing")

    def front(self) -> np.ndarray:
        return self.archive.objectives()


def archive_of(history: Sequence[EvaluatedSolution]) -> ParetoArchive:
    """Non-dominated set of a run's evaluations, one member per decision tuple."""
    seen, unique = set(), []
    for ev in history:
        if ev.solution.values not in seen:
            seen.add(ev.solution.values)
            unique.append(ev)
    return nondominated_filter(unique)
