"""Pre-measured configuration spaces loaded from CSV.

Header ``d1,...,dk,o1,...,om``. Decision columns whose cells all parse as
numbers become integer or continuous decisions; any other column is
categorical. Objective cells must be numeric.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from dsekit.core import Decision, DecisionSpace, Direction, Solution
from dsekit.indicators import build_reference_front
from dsekit.problems.base import Problem


class TabularFormatError(ValueError):
    pass


class NotMeasuredError(KeyError):
    """A decision tuple that is not a row of the measured space."""

    def __str__(self) -> str:
        return f"not in measured space: {self.args[0]!r}"


def _as_number(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _column_decision(name: str, cells: list[str]) -> tuple[Decision, list]:
    nums = [_as_number(c) for c in cells]
    if all(v is not None for v in nums):
        integral = all(float(v).is_integer() and "." not in c and "e" not in c.lower() for v, c in zip(nums, cells))
        lo, hi = min(nums), max(nums)
        if integral:
            values = [int(v) for v in nums]
            # constant columns still need lo < hi
            return Decision.integer(name, int(lo), int(hi) if hi > lo else int(lo) + 1), values
        return Decision.continuous(name, lo, hi if hi > lo else lo + 1.0), [float(v) for v in nums]
    levels = sorted(set(cells))
    if len(levels) == 1:
        levels.append(levels[0] + "_")
    return Decision.categorical(name, levels), list(cells)


class TabularSpace(Problem):
    """Exact-lookup problem over a finite pool of measured rows."""

    def __init__(self, name: str, space: DecisionSpace, rows: Sequence[tuple[Solution, tuple[float, ...]]], directions: Sequence[Direction] | None = None, source: str = "file") -> None:
        rows = list(rows)
        if not rows:
            raise TabularFormatError("a tabular space needs at least one row")
        m = len(rows[0][1])
        if any(len(r[1]) != m for r in rows):
            raise TabularFormatError("rows differ in objective count")
        table: dict[tuple, tuple[float, ...]] = {}
        for sol, obj in rows:
            if sol.values in table:
                raise TabularFormatError(f"duplicate decision row {sol.values}")
            table[sol.values] = tuple(float(v) for v in obj)
        directions = tuple(directions) if directions else (Direction.MINIMIZE,) * m
        super().__init__(name=name, space=space, directions=directions, fn=self._lookup, source=source)
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_pool", [sol for sol, _ in rows])

    def _lookup(self, solution: Solution) -> tuple[float, ...]:
        try:
            return self._table[solution.values]
        except KeyError:
            raise NotMeasuredError(solution.values) from None

    def __len__(self) -> int:
        return len(self._pool)

    def candidates(self) -> list[Solution]:
        return list(self._pool)

    def scan(self) -> np.ndarray:
        """Canonical objective matrix of every row, in pool order (no budget)."""
        return np.vstack([self.evaluate(s).values for s in self._pool])

    def reference_front(self, n_points: int = 500) -> np.ndarray:
        return build_reference_front([self.scan()])

    def describe(self) -> str:
        return super().describe() + f"\trows={len(self)}"


def parse_tabular(text: str, num_objectives: int, name: str = "tabular", directions: Sequence[Direction] | None = None) -> TabularSpace:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise TabularFormatError("need a header and at least one row")
    header = [h.strip() for h in rows[0]]
    k = len(header) - num_objectives
    if num_objectives < 1 or k < 1:
        raise TabularFormatError(f"header has {len(header)} columns; cannot split off {num_objectives} objectives")
    body = rows[1:]
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise TabularFormatError(f"line {lineno}: ragged row ({len(r)} cells, header has {len(header)})")
    decisions, columns = [], []
    for j in range(k):
        d, vals = _column_decision(header[j], [r[j].strip() for r in body])
        decisions.append(d)
        columns.append(vals)
    space = DecisionSpace(tuple(decisions))
    out = []
    for i, r in enumerate(body):
        objs = []
        for j in range(k, len(header)):
            v = _as_number(r[j].strip())
            if v is None:
                raise TabularFormatError(f"line {i + 2}: non-numeric objective cell {r[j]!r}")
            objs.append(v)
        out.append((Solution(tuple(col[i] for col in columns)), tuple(objs)))
    return TabularSpace(name, space, out, directions)


def load_tabular(path: str | Path, num_objectives: int, directions: Sequence[Direction] | None = None) -> TabularSpace:
    path = Path(path)
    return parse_tabular(path.read_text(encoding="utf-8"), num_objectives, f"tabular:{path.name}", directions)


def tabular_to_csv(space: DecisionSpace, rows: Sequence[tuple[Sequence, Sequence[float]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    m = len(rows[0][1])
    w.writerow(space.names + [f"o{i + 1}" for i in range(m)])
    for dec, obj in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in dec] + [repr(float(o)) for o in obj])
    return buf.getvalue()
