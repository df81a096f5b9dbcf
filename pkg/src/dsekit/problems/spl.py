"""Software product lines: feature models, validity checks, five-objective problem.

Feature-model text format, one statement per line (``#`` starts a comment)::

    root <Name>
    mandatory <Parent> <Child>
    optional <Parent> <Child>
    alt <Parent> <Child1> <Child2> ...
    or <Parent> <Child1> <Child2> ...
    requires <A> <B>
    excludes <A> <B>

A product is a bit string over the features in declaration order (root
first, then children in the order they first appear).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from dsekit.core import DecisionSpace, Direction, SeededRng, Solution
from dsekit.problems.base import Problem

MANDATORY, OPTIONAL, ALT, OR = "mandatory", "optional", "alt", "or"
REQUIRES, EXCLUDES = "requires", "excludes"


class FeatureModelError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class NoRootError(FeatureModelError):
    pass


class MultipleRootsError(FeatureModelError):
    pass


class UnknownFeatureError(FeatureModelError):
    pass


class CycleError(FeatureModelError):
    pass


class GroupArityError(FeatureModelError):
    pass


class FeatureModelSyntaxError(FeatureModelError):
    pass


@dataclass(frozen=True)
class Group:
    kind: str  # mandatory | optional | alt | or
    parent: str
    children: tuple[str, ...]


@dataclass(frozen=True)
class Constraint:
    kind: str  # requires | excludes
    a: str
    b: str


@dataclass(frozen=True)
class FeatureModel:
    features: tuple[str, ...]
    root: str
    groups: tuple[Group, ...]
    cross_tree: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        names = set(self.features)
        if len(names) != len(self.features):
            raise FeatureModelError("duplicate feature names")
        if self.root not in names:
            raise NoRootError("root is not a declared feature")
        parent: dict[str, str] = {}
        for g in self.groups:
            if g.kind in (ALT, OR) and len(g.children) < 2:
                raise GroupArityError(f"{g.kind} group under {g.parent} needs >= 2 children")
            for child in g.children:
                if child in parent:
                    raise FeatureModelError(f"{child} has two parents")
                parent[child] = g.parent
        for c in self.cross_tree:
            for f in (c.a, c.b):
                if f not in names:
                    raise UnknownFeatureError(f"{c.kind} references undeclared feature {f}")
        if self.root in parent:
            raise CycleError(f"root {self.root} has a parent")
        for f in self.features:
            seen, node = {f}, f
            while node in parent:
                node = parent[node]
                if node in seen:
                    raise CycleError(f"cycle through {node}")
                seen.add(node)
            if node != self.root:
                raise MultipleRootsError(f"{node} is not attached under root {self.root}")

    @property
    def index(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.features)}

    def __len__(self) -> int:
        return len(self.features)

    def space(self) -> DecisionSpace:
        return DecisionSpace.bits(self.features)

    def product(self, selected: Sequence[str]) -> np.ndarray:
        """Bit vector with exactly the named features selected."""
        idx = self.index
        bits = np.zeros(len(self), dtype=bool)
        for name in selected:
            bits[idx[name]] = True
        return bits


def parse_feature_model(text: str) -> FeatureModel:
    root: str | None = None
    features: list[str] = []
    groups: list[Group] = []
    cross: list[tuple[Constraint, int]] = []
    child_line: dict[str, int] = {}

    def declare(name: str) -> None:
        if name not in features:
            features.append(name)

    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        op, args = tokens[0], tokens[1:]
        if op == "root":
            if len(args) != 1:
                raise FeatureModelSyntaxError("root takes one name", lineno)
            if root is not None:
                raise MultipleRootsError(f"second root {args[0]} (first was {root})", lineno)
            root = args[0]
            if root in child_line:
                raise CycleError(f"root {root} already appears as a child", lineno)
            if root not in features:
                features.insert(0, root)
        elif op in (MANDATORY, OPTIONAL):
            if len(args) != 2:
                raise FeatureModelSyntaxError(f"{op} takes <Parent> <Child>", lineno)
            parent, child = args
            groups.append(Group(op, parent, (child,)))
        elif op in (ALT, OR):
            if len(args) < 3:
                raise GroupArityError(f"{op} group needs a parent and >= 2 children", lineno)
            parent, children = args[0], tuple(args[1:])
            if len(set(children)) != len(children):
                raise GroupArityError(f"{op} group repeats a child", lineno)
            groups.append(Group(op, parent, children))
        elif op in (REQUIRES, EXCLUDES):
            if len(args) != 2:
                raise FeatureModelSyntaxError(f"{op} takes two features", lineno)
            cross.append((Constraint(op, args[0], args[1]), lineno))
            continue
        else:
            raise FeatureModelSyntaxError(f"unknown statement {op!r}", lineno)
        if op != "root":
            g = groups[-1]
            declare(g.parent)
            for child in g.children:
                if child in child_line:
                    raise FeatureModelError(
                        f"{child} already has a parent (line {child_line[child]})", lineno
                    )
                if child == root:
                    raise CycleError(f"root {child} used as a child", lineno)
                child_line[child] = lineno
                declare(child)

    if root is None:
        raise NoRootError("no root")
    if features[0] != root:
        features.remove(root)
        features.insert(0, root)
    names = set(features)
    for c, lineno in cross:
        for f in (c.a, c.b):
            if f not in names:
                raise UnknownFeatureError(f"{c.kind} references undeclared feature {f}", lineno)
    return FeatureModel(tuple(features), root, tuple(groups), tuple(c for c, _ in cross))


def load_feature_model(path: str | Path) -> FeatureModel:
    return parse_feature_model(Path(path).read_text(encoding="utf-8"))


def mobile_phone_model() -> FeatureModel:
    """The ten-feature mobile phone product line shipped with the package.

    Its two cross-tree constraints are illustrative additions; see the
    comments in ``data/mobile_phone.fm``.
    """
    text = resources.files("dsekit.data").joinpath("mobile_phone.fm").read_text(encoding="utf-8")
    return parse_feature_model(text)


def count_violations(model: FeatureModel, product: Sequence[bool]) -> int:
    """Number of tree and cross-tree rules the bit string breaks (0 = valid)."""
    bits = np.asarray(product, dtype=bool)
    if len(bits) != len(model):
        raise ValueError(f"product has {len(bits)} bits, model has {len(model)} features")
    idx = model.index
    on = lambda f: bool(bits[idx[f]])  # noqa: E731
    violations = 0 if on(model.root) else 1
    for g in model.groups:
        parent = on(g.parent)
        chosen = sum(on(c) for c in g.children)
        for c in g.children:
            if on(c) and not parent:
                violations += 1
        if g.kind == MANDATORY and parent and chosen == 0:
            violations += 1
        elif g.kind == ALT and parent and chosen != 1:
            violations += 1
        elif g.kind == OR and parent and chosen == 0:
            violations += 1
    for c in model.cross_tree:
        if c.kind == REQUIRES and on(c.a) and not on(c.b):
            violations += 1
        elif c.kind == EXCLUDES and on(c.a) and on(c.b):
            violations += 1
    return violations


# ---------------------------------------------------------------------------
# Attributes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureAttributes:
    cost: float
    defects: int
    used_before: bool

    def __post_init__(self) -> None:
        if self.cost < 0 or self.defects < 0:
            raise ValueError("cost and defects must be non-negative")


def generate_attributes(model: FeatureModel, seed: int) -> dict[str, FeatureAttributes]:
    """Cost ~ U[5, 15], defects ~ U{0..10}, used_before ~ Bernoulli(0.5)."""
    rng = SeededRng(seed)
    return {
        f: FeatureAttributes(
            cost=float(rng.uniform(5.0, 15.0)),
            defects=int(rng.integers(0, 10, endpoint=True)),
            used_before=bool(rng.random() < 0.5),
        )
        for f in model.features
    }


def attributes_to_csv(attrs: dict[str, FeatureAttributes]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "cost", "defects", "used_before"])
    for name, a in attrs.items():
        w.writerow([name, repr(a.cost), a.defects, int(a.used_before)])
    return buf.getvalue()


def parse_attributes(text: str) -> dict[str, FeatureAttributes]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = {}
    for lineno, row in enumerate(rows, start=2):
        try:
            used = row["used_before"].strip()
            if used not in ("0", "1"):
                raise ValueError("used_before must be 0 or 1")
            out[row["feature"].strip()] = FeatureAttributes(
                float(row["cost"]), int(row["defects"]), used == "1"
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"attributes line {lineno}: {exc}") from None
    return out


def spl_problem(model: FeatureModel, attrs: dict[str, FeatureAttributes], name: str = "spl") -> Problem:
    """Five objectives: violations, features, defects, cost, reused features."""
    missing = [f for f in model.features if f not in attrs]
    if missing:
        raise ValueError(f"no attribute record for {', '.join(missing)}")
    cost = np.array([attrs[f].cost for f in model.features])
    defects = np.array([attrs[f].defects for f in model.features], dtype=float)
    used = np.array([attrs[f].used_before for f in model.features], dtype=float)

    def fn(s: Solution) -> tuple[float, ...]:
        bits = np.asarray(s.values, dtype=bool)
        return (
            float(count_violations(model, bits)),
            float(bits.sum()),
            float(defects[bits].sum()),
            float(cost[bits].sum()),
            float(used[bits].sum()),
        )

    return Problem(
        name=name,
        space=model.space(),
        directions=(
            Direction.MINIMIZE,
            Direction.MAXIMIZE,
            Direction.MINIMIZE,
            Direction.MINIMIZE,
            Direction.MAXIMIZE,
        ),
        fn=fn,
        source="file",
    )
