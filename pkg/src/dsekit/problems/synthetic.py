"""Synthetic debugging problems: ZDT1, ZDT3, DTLZ2 and a couple of probes."""

from __future__ import annotations

import math

import numpy as np

from dsekit.core import DecisionSpace, Direction
from dsekit.problems.base import Problem

_MIN2 = (Direction.MINIMIZE, Direction.MINIMIZE)


def _zdt1(x: np.ndarray) -> tuple[float, float]:
    f1 = x[0]
    g = 1.0 + 9.0 * x[1:].sum() / (len(x) - 1)
    return f1, g * (1.0 - math.sqrt(f1 / g))


def _zdt3(x: np.ndarray) -> tuple[float, float]:
    f1 = x[0]
    g = 1.0 + 9.0 * x[1:].sum() / (len(x) - 1)
    h = 1.0 - math.sqrt(f1 / g) - (f1 / g) * math.sin(10.0 * math.pi * f1)
    return f1, g * h


def _zdt1_front(n_points: int) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, n_points)
    return np.column_stack([f1, 1.0 - np.sqrt(f1)])


# Disconnected pieces of the ZDT3 front (ranges of f1).
_ZDT3_REGIONS = (
    (0.0, 0.0830015349),
    (0.182228780, 0.2577623634),
    (0.4093136748, 0.4538821041),
    (0.6183967944, 0.6525117038),
    (0.8233317983, 0.8518328654),
)


def _zdt3_front(n_points: int) -> np.ndarray:
    grid = np.linspace(0.0, _ZDT3_REGIONS[-1][1], 20 * n_points)
    inside = np.zeros_like(grid, dtype=bool)
    for lo, hi in _ZDT3_REGIONS:
        inside |= (grid >= lo) & (grid <= hi)
    grid = grid[inside]
    f1 = grid[np.linspace(0, len(grid) - 1, n_points).astype(int)]
    return np.column_stack([f1, 1.0 - np.sqrt(f1) - f1 * np.sin(10.0 * np.pi * f1)])


def zdt(variant: int, n: int = 30) -> Problem:
    """ZDT1 (convex front) or ZDT3 (disconnected front) on ``[0, 1]^n``."""
    if n < 2:
        raise ValueError("ZDT needs n >= 2")
    if variant == 1:
        fn, front = _zdt1, _zdt1_front
    elif variant == 3:
        fn, front = _zdt3, _zdt3_front
    else:
        raise ValueError("only ZDT1 and ZDT3 are provided")
    return Problem(
        name=f"zdt{variant}",
        space=DecisionSpace.box(n),
        directions=_MIN2,
        fn=lambda s: fn(np.asarray(s.values, dtype=float)),
        front_fn=front,
    )


def dtlz2_objectives(x: np.ndarray, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.sum((x[m - 1:] - 0.5) ** 2)
    angles = x[: m - 1] * (math.pi / 2)
    f = np.full(m, 1.0 + g)
    for j in range(m):
        f[j] *= np.prod(np.cos(angles[: m - 1 - j]))
        if j > 0:
            f[j] *= math.sin(angles[m - 1 - j])
    return f


def _dtlz2_front(m: int):
    def front(n_points: int) -> np.ndarray:
        rng = np.random.default_rng(0)
        pts = np.abs(rng.normal(size=(n_points, m)))
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)

    return front


def dtlz2(n: int = 12, m: int = 3) -> Problem:
    """DTLZ2: spherical front, ``sum(f_j^2) = 1`` when ``x_m..x_n = 0.5``."""
    if m < 2 or n < m:
        raise ValueError("DTLZ2 needs n >= m >= 2")
    return Problem(
        name="dtlz2",
        space=DecisionSpace.box(n),
        directions=(Direction.MINIMIZE,) * m,
        fn=lambda s: dtlz2_objectives(np.asarray(s.values), m),
        front_fn=_dtlz2_front(m),
    )


def sphere(n: int = 5, lo: float = -5.0, hi: float = 5.0) -> Problem:
    """Single-objective sum of squares; optimum 0 at the origin."""
    return Problem(
        name="sphere",
        space=DecisionSpace.box(n, lo, hi),
        directions=(Direction.MINIMIZE,),
        fn=lambda s: (float(np.sum(np.square(s.values))),),
    )


def ramp(n: int = 10) -> Problem:
    """Two co-increasing objectives on ``[0, 1]^n``: mean and mean square.

    Nearly every pair of distant points is ordered by dominance, which makes
    this the probe for evaluation-frugal samplers.
    """
    def fn(s):
        x = np.asarray(s.values, dtype=float)
        return float(x.mean()), float(np.mean(x**2))

    return Problem(name="ramp", space=DecisionSpace.box(n), directions=_MIN2, fn=fn)
