"""The :class:`Problem` contract shared by every benchmark."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from dsekit.core import DecisionSpace, Direction, ObjectiveVector, Solution


@dataclass(frozen=True, eq=False)
class Problem:
    """A deterministic mapping from solutions to objective vectors.

    ``fn`` returns raw objective values in the order of ``directions``.
    Budget accounting is not done here but by :class:`dsekit.core.Evaluator`.
    """

    name: str
    space: DecisionSpace
    directions: tuple[Direction, ...]
    fn: Callable[[Solution], Sequence[float]]
    source: str = "builtin"
    front_fn: Callable[[int], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "directions", tuple(Direction(d) for d in self.directions))

    @property
    def num_objectives(self) -> int:
        return len(self.directions)

    def evaluate(self, solution: Solution) -> ObjectiveVector:
        raw = self.fn(solution)
        if len(raw) != self.num_objectives:
            raise ValueError(f"{self.name}: expected {self.num_objectives} objectives, got {len(raw)}")
        return ObjectiveVector.from_raw(raw, self.directions)

    def candidates(self) -> list[Solution] | None:
        """The finite candidate pool, or ``None`` for open spaces."""
        return None

    def reference_front(self, n_points: int = 500) -> np.ndarray | None:
        """Known canonical Pareto front, when one is available."""
        return None if self.front_fn is None else self.front_fn(n_points)

    def describe(self) -> str:
        kinds = ",".join(sorted(k.value for k in self.space.kinds))
        return f"{self.name}\t{kinds}\tm={self.num_objectives}\t{self.source}"
