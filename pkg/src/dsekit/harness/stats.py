"""Non-parametric ranking statistics: Cliff's delta, bootstrap, Scott-Knott."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from dsekit.core import SeededRng

SMALL_EFFECT = 0.147
DEFAULT_BOOTSTRAP = 512
ALPHA = 0.05


def cliffs_delta(xs: Sequence[float], ys: Sequence[float]) -> float:
    """``(#{x > y} - #{x < y}) / (|xs| |ys|)`` over all pairs."""
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("cliffs_delta needs two non-empty samples")
    # counting via sorted positions: O((n + m) log m)
    ys_sorted = np.sort(y)
    below = np.searchsorted(ys_sorted, x, side="left")  # ys strictly less than each x
    not_above = np.searchsorted(ys_sorted, x, side="right")
    more = int(below.sum())
    less = int((len(y) - not_above).sum())
    return (more - less) / (len(x) * len(y))


def bootstrap_different(xs: Sequence[float], ys: Sequence[float], n_boot: int = DEFAULT_BOOTSTRAP, seed: int = 0, alpha: float = ALPHA) -> bool:
    """Two-sided bootstrap test on the difference of means.

    Both samples are resampled from the pooled data (the null hypothesis of
    one common distribution). The samples differ when the observed absolute
    difference of means exceeds the ``1 - alpha`` quantile of the resampled
    differences.
    """
    if n_boot < 100:
        raise ValueError("n_boot must be >= 100")
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("bootstrap needs two non-empty samples")
    pooled = np.concatenate([x, y])
    if np.all(pooled == pooled[0]):
        return False
    rng = SeededRng(seed)
    observed = abs(x.mean() - y.mean())
    bx = rng.choice(pooled, size=(n_boot, x.size), replace=True).mean(axis=1)
    by = rng.choice(pooled, size=(n_boot, y.size), replace=True).mean(axis=1)
    critical = np.quantile(np.abs(bx - by), 1.0 - alpha)
    return bool(observed > critical)


def _split_score(parts: list[np.ndarray]) -> float:
    allv = np.concatenate(parts)
    mu = allv.mean()
    return sum(len(p) * (p.mean() - mu) ** 2 for p in parts)


def scott_knott(groups: Mapping[str, Sequence[float]], seed: int = 0, n_boot: int = DEFAULT_BOOTSTRAP, higher_is_better: bool = False) -> dict[str, int]:
    """Rank groups of samples; rank 1 is best (smallest median by default).

    Groups are sorted by median and split recursively where the
    between-group sum of squares peaks. A split is kept only when the two
    sides differ under :func:`bootstrap_different` and their Cliff's delta
    is at least small (0.147). Ties in median order are broken by name.
    """
    if not groups:
        raise ValueError("scott_knott needs at least one group")
    data = {}
    for name, samples in groups.items():
        arr = np.asarray(samples, dtype=float)
        if arr.size < 2:
            raise ValueError(f"group {name!r} needs at least 2 samples")
        data[name] = -arr if higher_is_better else arr
    names = sorted(data, key=lambda k: (float(np.median(data[k])), k))
    ranks: dict[str, int] = {}
    boot_seed = [seed]

    def recurse(seq: list[str], rank: int) -> int:
        if len(seq) > 1:
            parts = [data[k] for k in seq]
            best, cut = -1.0, None
            for i in range(1, len(seq)):
                score = _split_score([np.concatenate(parts[:i]), np.concatenate(parts[i:])])
                if score > best:
                    best, cut = score, i
            left, right = np.concatenate(parts[:cut]), np.concatenate(parts[cut:])
            boot_seed[0] += 1
            if (abs(cliffs_delta(left, right)) >= SMALL_EFFECT
                    and bootstrap_different(left, right, n_boot, boot_seed[0])):
                rank = recurse(seq[:cut], rank)
                return recurse(seq[cut:], rank + 1)
        for k in seq:
            ranks[k] = rank
        return rank

    recurse(names, 1)
    return {k: ranks[k] for k in groups}


@dataclass(frozen=True)
class Reproducibility:
    """Coefficient of variation and its reciprocal.

    ``None`` marks an undefined value (zero mean); a constant sample has
    ``cv == 0`` and ``reproducibility == math.inf``.
    """

    cv: float | None
    reproducibility: float | None


def reproducibility(samples: Sequence[float]) -> Reproducibility:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("reproducibility needs at least one sample")
    mean = float(x.mean())
    if mean == 0:
        return Reproducibility(None, None)
    sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
    cv = sd / mean
    return Reproducibility(cv, math.inf if cv == 0 else 1.0 / cv)


def median_iqr(samples: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    q25, q50, q75 = np.percentile(x, [25, 50, 75])
    return float(q50), float(q75 - q25)
