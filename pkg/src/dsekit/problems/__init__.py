"""Benchmark problems and the name registry used by plans and the CLI.

Names: ``zdt1``, ``zdt3``, ``dtlz2``, ``sphere``, ``ramp``,
``spl:<model.fm>`` (optionally with an ``attributes`` CSV and ``seed``)
and ``tabular:<file.csv>`` (with ``objectives``, default 2).
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from dsekit.problems.base import Problem
from dsekit.problems.goals import ConfusionCounts, goal_metrics
from dsekit.problems.spl import (
    FeatureModel,
    count_violations,
    generate_attributes,
    load_feature_model,
    mobile_phone_model,
    parse_attributes,
    parse_feature_model,
    spl_problem,
)
from dsekit.problems.synthetic import dtlz2, ramp, sphere, zdt
from dsekit.problems.tabular import TabularSpace, load_tabular, parse_tabular

BUILTIN = {
    "zdt1": lambda n=30: zdt(1, n),
    "zdt3": lambda n=30: zdt(3, n),
    "dtlz2": lambda n=12, m=3: dtlz2(n, m),
    "sphere": lambda n=5: sphere(n),
    "ramp": lambda n=10: ramp(n),
}

TEMPLATES = ("spl:<model.fm>", "tabular:<file.csv>")


def make_problem(name: str, base_dir: str | Path | None = None, **options: Any) -> Problem:
    """Build a problem from its registry name and options.

    Relative file paths in ``spl:`` and ``tabular:`` names resolve against
    ``base_dir`` (the plan file's directory) when given.
    """
    def resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() or base_dir is None else Path(base_dir) / path

    if name in BUILTIN:
        return BUILTIN[name](**options)
    if name.startswith("spl:"):
        target = name[4:]
        model = mobile_phone_model() if target == "mobile_phone" else load_feature_model(resolve(target))
        if "attributes" in options:
            attrs = parse_attributes(resolve(options["attributes"]).read_text(encoding="utf-8"))
        else:
            attrs = generate_attributes(model, int(options.get("seed", 0)))
        return spl_problem(model, attrs, name=name)
    if name.startswith("tabular:"):
        space = load_tabular(resolve(name[8:]), int(options.get("objectives", 2)))
        object.__setattr__(space, "name", name)
        return space
    raise KeyError(f"unknown problem {name!r}")


__all__ = [
    "BUILTIN",
    "ConfusionCounts",
    "FeatureModel",
    "Problem",
    "TEMPLATES",
    "TabularSpace",
    "count_violations",
    "dtlz2",
    "generate_attributes",
    "goal_metrics",
    "load_feature_model",
    "load_tabular",
    "make_problem",
    "mobile_phone_model",
    "parse_feature_model",
    "parse_tabular",
    "ramp",
    "sphere",
    "spl_problem",
    "zdt",
]
