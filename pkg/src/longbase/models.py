"""Majority-class model, CART decision tree and random forest.

Trees split on weighted Gini impurity with candidate thresholds at the
midpoints between consecutive distinct sorted feature values.  A row goes
left when ``x[feature] <= threshold``.  Every tie (leaf class, forest vote,
majority label) resolves to class 0.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._random import substream

# float noise between algebraically equal impurities
_GINI_TOL = 1e-12


@dataclass(frozen=True)
class Leaf:
    label: int
    class_fraction: float


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_leaf: int = 1
    # None or "all": every feature; "sqrt": floor(sqrt(d)); int: that many
    max_features: int | str | None = None
    # smallest Gini decrease worth a split; 0 keeps every split
    min_gain: float = 0.0


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    max_features: int | str | None = "sqrt"
    bootstrap: bool = True
    seed: int = 0
    min_gain: float = 0.0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_gain < 0:
            raise ValueError("min_gain must be >= 0")

    @property
    def tree_params(self) -> TreeParams:
        return TreeParams(self.max_depth, self.min_leaf, self.max_features, self.min_gain)


@dataclass(frozen=True)
class Prediction:
    label: int
    confidence: float


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    params: ForestParams
    n_features: int
    degenerate: bool = False

    def predict(self, row) -> Prediction:
        return predict(self, row)

    def predict_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = _check_matrix(X, self.n_features)
        votes = np.zeros(len(X))
        for tree in self.trees:
            votes += predict_tree_many(tree, X)
        share = votes / len(self.trees)
        labels = (share > 0.5).astype(int)
        return labels, np.where(labels == 1, share, 1.0 - share)


@dataclass(frozen=True)
class MajorityModel:
    label: int
    confidence: float

    def predict(self, row=None) -> Prediction:
        return Prediction(self.label, self.confidence)

    def predict_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        n = len(X)
        return np.full(n, self.label, dtype=int), np.full(n, self.confidence)


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    n_features: int = field(default=0)

    def predict(self, row) -> Prediction:
        leaf = _leaf_for(self.root, _check_row(row, self.n_features or None))
        return Prediction(leaf.label, leaf.class_fraction)

    def predict_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = _check_matrix(X, self.n_features or None)
        labels = predict_tree_many(self.root, X)
        return labels, np.ones(len(X))


def as_arrays(rows) -> tuple[np.ndarray, np.ndarray]:
    """(X, y) from a sequence of DailyRow, or pass through an (X, y) pair."""
    if isinstance(rows, tuple) and len(rows) == 2 and isinstance(rows[0], np.ndarray):
        X, y = rows
    else:
        rows = list(rows)
        if not rows:
            return np.empty((0, 0)), np.empty(0, dtype=int)
        X = np.array([r.features for r in rows], dtype=float)
        y = np.array([r.label for r in rows], dtype=int)
    return np.asarray(X, dtype=float), np.asarray(y, dtype=int)


def _check_row(row, n_features):
    x = np.asarray(getattr(row, "features", row), dtype=float).ravel()
    if n_features is not None and x.size != n_features:
        raise ValueError(f"row has {x.size} features, model expects {n_features}")
    if not np.all(np.isfinite(x)):
        raise ValueError("row has a missing or non-finite feature value")
    return x


def _check_matrix(X, n_features):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"rows have {X.shape[1]} features, model expects {n_features}")
    if not np.all(np.isfinite(X)):
        raise ValueError("rows contain a missing or non-finite feature value")
    return X


def n_split_features(rule, d: int) -> int:
    if rule is None or rule == "all":
        return d
    if rule == "sqrt":
        return max(1, math.isqrt(d))
    if isinstance(rule, int) and rule >= 1:
        return min(rule, d)
    raise ValueError(f"bad max_features rule {rule!r}")


def gini_split_scores(x: np.ndarray, y: np.ndarray, min_leaf: int = 1):
    """Weighted Gini impurity of every candidate threshold on one feature.

    Returns (thresholds, scores), thresholds ascending.
    """
    n = x.size
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n_left = np.arange(1, n)
    ones_left = np.cumsum(ys)[:-1]
    ones_right = ys.sum() - ones_left
    n_right = n - n_left
    ok = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not ok.any():
        return np.empty(0), np.empty(0)
    n_left, n_right = n_left[ok], n_right[ok]
    ones_left, ones_right = ones_left[ok], ones_right[ok]
    scores = (
        2.0 * ones_left * (n_left - ones_left) / n_left
        + 2.0 * ones_right * (n_right - ones_right) / n_right
    ) / n
    lo, hi = xs[:-1][ok], xs[1:][ok]
    thresholds = (lo + hi) / 2.0
    # adjacent floats: the midpoint may round up onto hi
    thresholds = np.where(thresholds < hi, thresholds, lo)
    return thresholds, scores


def _leaf(y: np.ndarray) -> Leaf:
    n = y.size
    ones = int(y.sum())
    label = int(ones > n - ones)
    return Leaf(label, (ones if label else n - ones) / n if n else 1.0)


def fit_tree(X, y, params: TreeParams = TreeParams(), rng: np.random.Generator | None = None) -> TreeNode:
    """Grow a tree on arrays.  Without ``rng`` features are scanned in index order."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if y.size == 0:
        raise ValueError("cannot train a tree on zero rows")
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("need at least one feature")
    d = X.shape[1]
    k = n_split_features(params.max_features, d)
    max_depth = params.max_depth if params.max_depth is not None else np.inf
    min_leaf = params.min_leaf

    def grow(idx, depth):
        ys = y[idx]
        ones = int(ys.sum())
        if ones == 0 or ones == idx.size or depth >= max_depth or idx.size < 2 * min_leaf:
            return _leaf(ys)
        if rng is None or k == d:
            order = np.arange(d)
        else:
            order = rng.permutation(d)
        best_score, best_f, best_t = np.inf, -1, 0.0
        for pos, f in enumerate(order):
            if pos >= k and best_f >= 0:
                break
            thr, sc = gini_split_scores(X[idx, f], ys, min_leaf)
            if sc.size == 0:
                continue
            j = int(np.flatnonzero(sc <= sc.min() + _GINI_TOL)[0])
            if sc[j] < best_score - _GINI_TOL:
                best_score, best_f, best_t = sc[j], int(f), float(thr[j])
        if best_f < 0:
            return _leaf(ys)
        if params.min_gain > 0:
            q = ones / idx.size
            if 2.0 * q * (1.0 - q) - best_score < params.min_gain:
                return _leaf(ys)
        go_left = X[idx, best_f] <= best_t
        return Split(best_f, best_t, grow(idx[go_left], depth + 1), grow(idx[~go_left], depth + 1))

    return grow(np.arange(y.size), 0)


def train_tree(rows, params: TreeParams = TreeParams()) -> TreeModel:
    X, y = as_arrays(rows)
    if y.size == 0:
        raise ValueError("cannot train a tree on zero rows")
    return TreeModel(fit_tree(X, y, params), X.shape[1])


def _leaf_for(node: TreeNode, x) -> Leaf:
    while isinstance(node, Split):
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node


def predict_tree_many(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.zeros(len(X), dtype=int)

    def walk(node, idx):
        if idx.size == 0:
            return
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        left = X[idx, node.feature] <= node.threshold
        walk(node.left, idx[left])
        walk(node.right, idx[~left])

    walk(node, np.arange(len(X)))
    return out


def train_forest(rows, params: ForestParams = ForestParams()) -> ForestModel:
    """Bagged trees; tree ``i`` draws all its randomness from substream (seed, i)."""
    X, y = as_arrays(rows)
    if y.size == 0:
        raise ValueError("cannot train a forest on zero rows")
    d = X.shape[1]
    if y.size < 2 or y.min() == y.max():
        return ForestModel((_leaf(y),), params, d, degenerate=True)
    tp = params.tree_params
    trees = []
    for i in range(params.n_trees):
        rng = substream(params.seed, i)
        if params.bootstrap:
            pick = rng.integers(0, y.size, size=y.size)
            trees.append(fit_tree(X[pick], y[pick], tp, rng))
        else:
            trees.append(fit_tree(X, y, tp, rng))
    return ForestModel(tuple(trees), params, d)


def predict(model, row) -> Prediction:
    """Majority vote with the winning vote share as confidence."""
    if isinstance(model, (MajorityModel, TreeModel)):
        return model.predict(row)
    x = _check_row(row, model.n_features)
    ones = sum(_leaf_for(t, x).label for t in model.trees)
    n = len(model.trees)
    if 2 * ones > n:
        return Prediction(1, ones / n)
    return Prediction(0, (n - ones) / n)


def majority_model(train_labels: Sequence[int]) -> MajorityModel:
    labels = np.asarray(list(train_labels), dtype=int)
    if labels.size == 0:
        raise ValueError("majority model needs at least one label")
    ones = int(labels.sum())
    zeros = labels.size - ones
    label = int(ones > zeros)
    return MajorityModel(label, max(ones, zeros) / labels.size)


def tree_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label, "class_fraction": node.class_fraction}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": tree_to_dict(node.left),
        "right": tree_to_dict(node.right),
    }


def model_to_json(model: ForestModel) -> str:
    """Inspection dump; not a stable interchange format."""
    p = model.params
    doc = {
        "params": {
            "n_trees": p.n_trees,
            "max_depth": p.max_depth,
            "min_leaf": p.min_leaf,
            "max_features": p.max_features,
            "bootstrap": p.bootstrap,
            "seed": p.seed,
            "min_gain": p.min_gain,
        },
        "n_features": model.n_features,
        "degenerate": model.degenerate,
        "trees": [tree_to_dict(t) for t in model.trees],
    }
    return json.dumps(doc, indent=2)
