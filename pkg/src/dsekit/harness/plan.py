"""Experiment plan files (YAML) and the parameter blocks that tuning emits.

Schema::

    budget: 2000            # evaluations per run (required)
    repeats: 30             # runs per (problem, algorithm); < 30 is flagged
    base_seed: 1            # run i of the plan uses seed base_seed + i
    indicators: [igd, hv]   # subset of gd, igd, spread, hv, approx
    timing: false           # true fills the wall_ms column (breaks byte-identity)
    problems:
      - name: zdt1          # registry name; other keys are problem options
        n: 10
    algorithms:
      - name: ga_ind        # label used in reports
        type: ga            # registry name; defaults to the label
        selection: indicator_dom

Tuning output is an ``algorithms:`` list in the same syntax, so it can be
pasted into (or merged with) a plan.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from dsekit.core import MAX_SEED
from dsekit.harness.algorithms import REGISTRY
from dsekit.indicators import INDICATORS

log = logging.getLogger(__name__)

RECOMMENDED_REPEATS = 30
PLAN_KEYS = {"budget", "repeats", "base_seed", "indicators", "timing", "problems", "algorithms"}


class PlanError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None) -> None:
        self.line = line
        where = f"{path or '<plan>'}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(where + message)


class _LineDict(dict):
    line: int = 0
    key_lines: dict


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _LineDict()
    out.line = node.start_mark.line + 1
    out.key_lines = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        out[key] = loader.construct_object(value_node, deep=True)
        out.key_lines[key] = key_node.start_mark.line + 1
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _line(d: Any, key: str | None = None) -> int | None:
    if isinstance(d, _LineDict):
        return d.key_lines.get(key, d.line) if key is not None else d.line
    return None


@dataclass(frozen=True)
class ProblemEntry:
    name: str
    options: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.options:
            return self.name
        opts = ",".join(f"{k}={v}" for k, v in sorted(self.options.items()))
        return f"{self.name}[{opts}]"


@dataclass(frozen=True)
class AlgorithmEntry:
    label: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentPlan:
    problems: tuple[ProblemEntry, ...]
    algorithms: tuple[AlgorithmEntry, ...]
    budget: int
    repeats: int = RECOMMENDED_REPEATS
    base_seed: int = 0
    indicators: tuple[str, ...] = ("igd", "hv")
    timing: bool = False
    base_dir: str | None = None

    def __post_init__(self) -> None:
        if self.repeats < 1:
            raise PlanError("repeats must be >= 1")
        if self.budget < 1:
            raise PlanError("budget must be >= 1")
        if not 0 <= self.base_seed <= MAX_SEED:
            raise PlanError("base_seed must be a 64-bit unsigned integer")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise PlanError("algorithm names must be unique")
        self.run_seeds()  # collision check

    @property
    def warnings(self) -> list[str]:
        if self.repeats < RECOMMENDED_REPEATS:
            return [f"WARNING: scaled-down plan: repeats={self.repeats} < {RECOMMENDED_REPEATS}"]
        return []

    def runs(self) -> list[tuple[int, ProblemEntry, AlgorithmEntry, int]]:
        """``(run_index, problem, algorithm, repeat)`` in execution order."""
        out = []
        for p in self.problems:
            for a in self.algorithms:
                for r in range(self.repeats):
                    out.append((len(out), p, a, r))
        return out

    def run_seeds(self) -> list[int]:
        n = len(self.problems) * len(self.algorithms) * self.repeats
        seeds = [(self.base_seed + i) % (MAX_SEED + 1) for i in range(n)]
        if len(set(seeds)) != len(seeds):
            raise PlanError("derived run seeds collide")
        return seeds

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "repeats": self.repeats,
            "base_seed": self.base_seed,
            "indicators": list(self.indicators),
            "timing": self.timing,
            "problems": [{"name": p.name, **p.options} for p in self.problems],
            "algorithms": [algorithm_block(a) for a in self.algorithms],
        }


def algorithm_block(a: AlgorithmEntry) -> dict:
    block = {"name": a.label}
    if a.kind != a.label:
        block["type"] = a.kind
    block.update(a.params)
    return block


def _parse_algorithms(items: Any, path: str | None, parent: Any = None) -> tuple[AlgorithmEntry, ...]:
    if not isinstance(items, list) or not items:
        raise PlanError("algorithms must be a non-empty list", _line(parent, "algorithms"), path)
    out = []
    fallback = _line(parent, "algorithms")
    for item in items:
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict) or "name" not in item:
            raise PlanError("each algorithm needs a name", _line(item) or fallback, path)
        params = {k: v for k, v in item.items() if k not in ("name", "type")}
        kind = item.get("type", item["name"])
        if kind not in REGISTRY:
            key = "type" if "type" in item else "name"
            raise PlanError(f"unknown algorithm {kind!r}; known: {', '.join(REGISTRY)}", _line(item, key) or fallback, path)
        out.append(AlgorithmEntry(str(item["name"]), str(kind), dict(params)))
    return tuple(out)


def parse_plan(text: str, path: str | None = None, base_dir: str | None = None) -> ExperimentPlan:
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise PlanError(f"invalid YAML: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None, path) from None
    if not isinstance(doc, dict):
        raise PlanError("plan must be a mapping", 1, path)
    unknown = set(doc) - PLAN_KEYS
    if unknown:
        key = sorted(unknown, key=str)[0]
        raise PlanError(f"unknown key {key!r}", _line(doc, key), path)
    if "budget" not in doc:
        raise PlanError("missing required key 'budget'", 1, path)
    for key in ("budget", "repeats", "base_seed"):
        if key in doc and (not isinstance(doc[key], int) or isinstance(doc[key], bool)):
            raise PlanError(f"{key} must be an integer", _line(doc, key), path)
    indicators = doc.get("indicators", ["igd", "hv"])
    if isinstance(indicators, str):
        indicators = [i.strip() for i in indicators.split(",")]
    bad = [i for i in indicators if i not in INDICATORS]
    if bad:
        raise PlanError(f"unknown indicator {bad[0]!r}; choose from {', '.join(INDICATORS)}", _line(doc, "indicators"), path)
    problems_raw = doc.get("problems")
    if not isinstance(problems_raw, list) or not problems_raw:
        raise PlanError("problems must be a non-empty list", _line(doc, "problems") or 1, path)
    problems = []
    for item in problems_raw:
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict) or "name" not in item:
            raise PlanError("each problem needs a name", _line(item) or _line(doc, "problems"), path)
        problems.append(ProblemEntry(str(item["name"]), {k: v for k, v in item.items() if k != "name"}))
    if "algorithms" not in doc:
        raise PlanError("missing required key 'algorithms'", 1, path)
    algorithms = _parse_algorithms(doc["algorithms"], path, doc)
    try:
        plan = ExperimentPlan(
            problems=tuple(problems),
            algorithms=algorithms,
            budget=doc["budget"],
            repeats=doc.get("repeats", RECOMMENDED_REPEATS),
            base_seed=doc.get("base_seed", 0),
            indicators=tuple(indicators),
            timing=bool(doc.get("timing", False)),
            base_dir=base_dir,
        )
    except PlanError as exc:
        key = next((k for k in ("repeats", "budget", "base_seed", "algorithm") if k in str(exc)), None)
        key = "algorithms" if key == "algorithm" else key
        raise PlanError(str(exc), _line(doc, key) if key else None, path) from None
    for w in plan.warnings:
        log.warning(w)
    return plan


def load_plan(path: str | Path) -> ExperimentPlan:
    path = Path(path)
    return parse_plan(path.read_text(encoding="utf-8"), str(path), str(path.parent))


def parse_algorithms_fragment(text: str) -> tuple[AlgorithmEntry, ...]:
    """Parse an emitted ``algorithms:`` block on its own."""
    doc = yaml.load(text, Loader=_LineLoader)
    if not isinstance(doc, dict) or set(doc) != {"algorithms"}:
        raise PlanError("fragment must contain exactly one 'algorithms' key")
    return _parse_algorithms(doc["algorithms"], None, doc)


def dump_algorithms(entries: list[AlgorithmEntry], comment: str | None = None) -> str:
    body = yaml.safe_dump({"algorithms": [algorithm_block(a) for a in entries]}, sort_keys=False)
    return (f"# {comment}\n" if comment else "") + body
