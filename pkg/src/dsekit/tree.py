"""Variance-reduction regression tree (the CART regression core).

Numeric splits test ``x[j] <= threshold`` with thresholds at midpoints
between consecutive distinct values. Categorical columns split one level
against the rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass
class Node:
    value: float
    n: int
    feature: int | None = None
    threshold: float | None = None
    category: float | None = None  # categorical split: x == category goes left
    left: Node | None = None
    right: Node | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def goes_left(self, x: np.ndarray) -> bool:
        if self.category is not None:
            return x[self.feature] == self.category
        return x[self.feature] <= self.threshold


@dataclass
class RegressionTree:
    root: Node
    n_features: int
    min_leaf: int

    def predict(self, row) -> float:
        return predict(self, row)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected rows of {self.n_features} features")
        out = np.empty(len(X))
        self._fill(self.root, X, np.arange(len(X)), out)
        return out

    def _fill(self, node: Node, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
        if node.is_leaf:
            out[idx] = node.value
            return
        col = X[idx, node.feature]
        left = col == node.category if node.category is not None else col <= node.threshold
        self._fill(node.left, X, idx[left], out)
        self._fill(node.right, X, idx[~left], out)

    def leaves(self) -> Iterable[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend((node.right, node.left))

    def depth(self) -> int:
        def d(node: Node) -> int:
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))
        return d(self.root)


def _leaf_value(y: np.ndarray) -> float:
    first = y[0]
    return float(first) if np.all(y == first) else float(y.mean())


def _sse(y: np.ndarray) -> float:
    return float(((y - y.mean()) ** 2).sum())


def _best_numeric(x: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[float, float] | None:
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order] - y.mean()  # centring keeps prefix sums well conditioned
    n = len(ys)
    csum, csq = np.cumsum(ys), np.cumsum(ys**2)
    k = np.arange(1, n)  # left side holds the first k rows
    valid = (xs[1:] != xs[:-1]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not valid.any():
        return None
    left_sse = csq[:-1] - csum[:-1] ** 2 / k
    right_sum = csum[-1] - csum[:-1]
    right_sse = (csq[-1] - csq[:-1]) - right_sum**2 / (n - k)
    total = np.where(valid, left_sse + right_sse, np.inf)
    i = int(np.argmin(total))
    cut = (xs[i] + xs[i + 1]) / 2
    if not xs[i] <= cut < xs[i + 1]:  # adjacent floats: midpoint rounds up
        cut = xs[i]
    return float(total[i]), float(cut)


def _best_categorical(x: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[float, float] | None:
    best = None
    for level in np.unique(x):
        mask = x == level
        nl = int(mask.sum())
        if nl < min_leaf or len(x) - nl < min_leaf:
            continue
        sse = _sse(y[mask]) + _sse(y[~mask])
        if best is None or sse < best[0]:
            best = (sse, float(level))
    return best


def fit_tree(rows, targets, min_leaf: int = 1, categorical: Iterable[int] = (), max_depth: int | None = None) -> RegressionTree:
    """Grow a regression tree greedily, minimizing weighted child variance.

    A node stays a leaf when it has fewer than ``2 * min_leaf`` rows, when
    its targets are constant, when no split lowers the squared error, or
    at ``max_depth``.
    """
    X = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    if len(X) == 0:
        raise ValueError("cannot fit a tree to an empty training set")
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("rows must be a 2-D array with one target per row")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    cats = set(categorical)

    def grow(idx: np.ndarray, depth: int) -> Node:
        yy = y[idx]
        node = Node(_leaf_value(yy), len(idx))
        if len(idx) < 2 * min_leaf or np.all(yy == yy[0]) or (max_depth is not None and depth >= max_depth):
            return node
        parent_sse = _sse(yy)
        best = None
        for j in range(X.shape[1]):
            col = X[idx, j]
            found = _best_categorical(col, yy, min_leaf) if j in cats else _best_numeric(col, yy, min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], j, found[1])
        if best is None or not best[0] < parent_sse * (1.0 - 1e-9):
            return node
        _, j, cut = best
        node.feature = j
        if j in cats:
            node.category = cut
            left = X[idx, j] == cut
        else:
            node.threshold = cut
            left = X[idx, j] <= cut
        node.left = grow(idx[left], depth + 1)
        node.right = grow(idx[~left], depth + 1)
        return node

    return RegressionTree(grow(np.arange(len(X)), 0), X.shape[1], min_leaf)


def predict(tree: RegressionTree, row) -> float:
    x = np.asarray(row, dtype=float)
    if x.shape != (tree.n_features,):
        raise ValueError(f"row has {x.size} features, tree expects {tree.n_features}")
    node = tree.root
    while not node.is_leaf:
        node = node.left if node.goes_left(x) else node.right
    return node.value
