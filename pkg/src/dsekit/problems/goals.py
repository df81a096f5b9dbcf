"""Defect-predictor goals computed from a confusion matrix.

Undefined metrics (zero denominators) are reported as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass

METRICS = ("pd", "pf", "prec", "acc", "support", "effort", "reward")


@dataclass(frozen=True)
class ConfusionCounts:
    """``a`` true negatives, ``b`` false negatives, ``c`` false positives,
    ``d`` true positives; ``loc_*`` are the lines of code in each cell."""

    a: int
    b: int
    c: int
    d: int
    loc_a: float = 1.0
    loc_b: float = 1.0
    loc_c: float = 1.0
    loc_d: float = 1.0

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("confusion counts must be non-negative")
        if min(self.loc_a, self.loc_b, self.loc_c, self.loc_d) < 0:
            raise ValueError("lines of code must be non-negative")


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


def goal_metrics(cm: ConfusionCounts) -> dict[str, float | None]:
    total = cm.a + cm.b + cm.c + cm.d
    if total == 0:
        return dict.fromkeys(METRICS)
    pd = _ratio(cm.d, cm.b + cm.d)
    effort = _ratio(cm.loc_c + cm.loc_d, cm.loc_a + cm.loc_b + cm.loc_c + cm.loc_d)
    return {
        "pd": pd,
        "pf": _ratio(cm.c, cm.a + cm.c),
        "prec": _ratio(cm.d, cm.d + cm.c),
        "acc": _ratio(cm.a + cm.d, total),
        "support": _ratio(cm.c + cm.d, total),
        "effort": effort,
        "reward": None if pd is None or not effort else pd / effort,
    }
