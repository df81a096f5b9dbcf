"""Quality indicators comparing a predicted front against a reference front.

All functions take canonical (minimize) objective matrices of shape
``(n, m)``; :class:`Front` objects and lists of :class:`ObjectiveVector`
are accepted as well.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from dsekit.core import (
    IncompatibleObjectivesError,
    ObjectiveVector,
    SeededRng,
    nondominated_mask,
)

DEFAULT_MC_SAMPLES = 100_000
DEFAULT_REF_MARGIN = 1.1


class DegenerateFrontWarning(UserWarning):
    """Spread was asked of a front whose points all coincide."""


@dataclass(frozen=True)
class Front:
    points: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("a front needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("front values must be finite")
        if self.normalized and (pts.min() < 0 or pts.max() > 1):
            raise ValueError("normalized front has values outside [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Hypervolume:
    value: float
    exact: bool
    samples: int | None = None

    def __float__(self) -> float:
        return self.value


def as_points(front) -> np.ndarray:
    if isinstance(front, Front):
        return front.points
    if isinstance(front, (list, tuple)) and front and isinstance(front[0], ObjectiveVector):
        return np.vstack([np.asarray(v.values) for v in front])
    pts = np.atleast_2d(np.asarray(front, dtype=float))
    if pts.size == 0:
        raise ValueError("front is empty")
    return pts


def _pair(p, a) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Front) and isinstance(a, Front) and p.normalized != a.normalized:
        raise ValueError("fronts differ in normalization status")
    P, A = as_points(p), as_points(a)
    if P.shape[1] != A.shape[1]:
        raise IncompatibleObjectivesError(f"arity mismatch: {P.shape[1]} vs {A.shape[1]}")
    return P, A


def _min_distances(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    d = np.sqrt(((src[:, None, :] - dst[None, :, :]) ** 2).sum(axis=2))
    return d.min(axis=1)


def generational_distance(P, A) -> float:
    """Mean Euclidean distance from each predicted point to its nearest actual point."""
    P, A = _pair(P, A)
    return float(_min_distances(P, A).mean())


def inverted_generational_distance(A, P) -> float:
    """Mean Euclidean distance from each actual point to its nearest predicted point."""
    A, P = _pair(A, P)
    return float(_min_distances(A, P).mean())


def spread(P, extremes: Sequence[Sequence[float]] | None = None) -> float:
    """Deb's Delta diversity measure; lower is better, 0 for uniform spacing.

    Two-objective fronts use consecutive gaps after sorting on the first
    objective. Fronts with more objectives use nearest-neighbour gaps.
    ``extremes`` optionally supplies the true extreme points; by default the
    front's own boundary points are used, so the boundary terms vanish.
    Input is expected to be normalized.
    """
    pts = as_points(P)
    n, m = pts.shape
    if n < 2:
        raise ValueError("spread needs at least two points")
    if m == 2:
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        s = pts[order]
        gaps = np.sqrt(((s[1:] - s[:-1]) ** 2).sum(axis=1))
        d_f = d_l = 0.0
        if extremes is not None:
            ext = np.asarray(extremes, dtype=float)
            d_f = float(np.sqrt(((s[0] - ext[0]) ** 2).sum()))
            d_l = float(np.sqrt(((s[-1] - ext[1]) ** 2).sum()))
        mean_gap = gaps.mean()
        num = d_f + d_l + np.abs(gaps - mean_gap).sum()
        den = d_f + d_l + (n - 1) * mean_gap
    else:
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        np.fill_diagonal(d, np.inf)
        gaps = d.min(axis=1)
        d_e = 0.0
        if extremes is not None:
            ext = np.asarray(extremes, dtype=float)
            d_e = float(_min_distances(ext, pts).sum())
        mean_gap = gaps.mean()
        num = d_e + np.abs(gaps - mean_gap).sum()
        den = d_e + n * mean_gap
    if den == 0:
        warnings.warn("spread of a front with coincident points; returning 0", DegenerateFrontWarning, stacklevel=2)
        return 0.0
    return float(num / den)


def default_reference_point(m: int) -> np.ndarray:
    return np.full(m, DEFAULT_REF_MARGIN)


def _check_ref(pts: np.ndarray, ref: np.ndarray) -> None:
    if ref.shape != (pts.shape[1],):
        raise IncompatibleObjectivesError("reference point arity differs from the front")
    bad = np.any(pts > ref, axis=1)
    if bad.any():
        raise ValueError(
            f"point {pts[bad][0].tolist()} lies outside the reference box {ref.tolist()}"
        )


def _hv2(pts: np.ndarray, ref: np.ndarray) -> float:
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    volume, best_y = 0.0, ref[1]
    for x, y in pts:
        if y < best_y:
            volume += (ref[0] - x) * (best_y - y)
            best_y = y
    return volume


def _hv3(pts: np.ndarray, ref: np.ndarray) -> float:
    pts = pts[np.argsort(pts[:, 2], kind="stable")]
    levels = np.append(np.unique(pts[:, 2]), ref[2])
    volume = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        active = pts[pts[:, 2] <= lo]
        volume += _hv2(active[:, :2], ref[:2]) * (hi - lo)
    return volume


def hypervolume_monte_carlo(P, ref, samples: int = DEFAULT_MC_SAMPLES, rng: SeededRng | None = None) -> float:
    """Estimate the dominated volume by uniform sampling in the bounding box."""
    pts = as_points(P)
    ref = np.asarray(ref, dtype=float)
    _check_ref(pts, ref)
    rng = rng or SeededRng(0)
    lo = pts.min(axis=0)
    box = float(np.prod(ref - lo))
    if box == 0:
        return 0.0
    hits, chunk = 0, 10_000
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        left = rng.uniform(lo, ref, size=(k, len(ref)))
        for p in pts:
            hit = left[:, 0] >= p[0]
            for j in range(1, len(p)):
                hit &= left[:, j] >= p[j]
            left = left[~hit]
        hits += k - len(left)
    return box * hits / samples


def hypervolume(P, ref=None, samples: int = DEFAULT_MC_SAMPLES, rng: SeededRng | None = None) -> Hypervolume:
    """Volume of the union of boxes spanned by each point and ``ref``.

    Exact for up to three objectives; a Monte Carlo estimate (flagged
    ``exact=False``) beyond that.
    """
    pts = as_points(P)
    ref = default_reference_point(pts.shape[1]) if ref is None else np.asarray(ref, dtype=float)
    _check_ref(pts, ref)
    m = pts.shape[1]
    if m == 1:
        return Hypervolume(float(ref[0] - pts[:, 0].min()), True)
    pts = pts[nondominated_mask(pts)]
    if m == 2:
        return Hypervolume(_hv2(pts, ref), True)
    if m == 3:
        return Hypervolume(_hv3(pts, ref), True)
    return Hypervolume(hypervolume_monte_carlo(pts, ref, samples, rng), False, samples)


def additive_approximation(A, P) -> float:
    """Smallest shift that lets ``P`` weakly dominate every point of ``A``."""
    A, P = _pair(A, P)
    # diff[a, p] = max_i (p_i - a_i)
    diff = np.max(P[None, :, :] - A[:, None, :], axis=2)
    return float(diff.min(axis=1).max())


def build_reference_front(outcomes: Sequence) -> np.ndarray:
    """Non-dominated, de-duplicated union of several fronts."""
    outcomes = [as_points(o) for o in outcomes]
    if not outcomes:
        raise ValueError("no outcomes to merge")
    if len({o.shape[1] for o in outcomes}) != 1:
        raise IncompatibleObjectivesError("outcomes differ in arity")
    union = np.unique(np.vstack(outcomes), axis=0)
    return union[nondominated_mask(union)]


INDICATORS = ("gd", "igd", "spread", "hv", "approx")
HIGHER_IS_BETTER = {"hv"}


def compute(name: str, predicted: np.ndarray, actual: np.ndarray, ref=None, samples: int = DEFAULT_MC_SAMPLES, rng: SeededRng | None = None) -> tuple[float, bool]:
    """Evaluate one named indicator; returns ``(value, exact)``.

    For ``hv``, predicted points that do not weakly dominate the reference
    point are dropped first (their boxes are empty).
    """
    if name == "gd":
        return generational_distance(predicted, actual), True
    if name == "igd":
        return inverted_generational_distance(actual, predicted), True
    if name == "spread":
        return spread(predicted), True
    if name == "approx":
        return additive_approximation(actual, predicted), True
    if name == "hv":
        pts = as_points(predicted)
        ref = default_reference_point(pts.shape[1]) if ref is None else np.asarray(ref, dtype=float)
        if ref.shape != (pts.shape[1],):
            raise IncompatibleObjectivesError("reference point arity differs from the front")
        inside = pts[np.all(pts <= ref, axis=1)]
        if len(inside) == 0:
            return 0.0, True
        hv = hypervolume(inside, ref, samples, rng)
        return hv.value, hv.exact
    raise ValueError(f"unknown indicator {name!r}; choose from {', '.join(INDICATORS)}")
