import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from longbase.labels import DailyRow
from longbase.models import (
    ForestModel,
    ForestParams,
    Leaf,
    Split,
    TreeParams,
    fit_tree,
    majority_model,
    model_to_json,
    predict,
    train_forest,
    train_tree,
)

from .oracles import brute_force_root_split


def rows_of(X, y):
    return [DailyRow("p", i, tuple(map(float, x)), int(lab)) for i, (x, lab) in enumerate(zip(X, y))]


def test_pure_node_is_leaf():
    model = train_tree(rows_of([[0.0], [1.0], [2.0]], [1, 1, 1]))
    assert model.root == Leaf(1, 1.0)


def test_separable_pair():
    model = train_tree(rows_of([[0.0], [1.0]], [0, 1]))
    assert isinstance(model.root, Split)
    assert model.root.threshold == 0.5
    assert [model.predict(x).label for x in ([0.0], [1.0])] == [0, 1]


def test_leaf_tie_goes_to_zero():
    model = train_tree(rows_of([[1.0], [1.0]], [0, 1]))
    assert model.root == Leaf(0, 0.5)


def test_empty_rows_rejected():
    with pytest.raises(ValueError):
        train_tree([])
    with pytest.raises(ValueError):
        train_forest([])
    with pytest.raises(ValueError):
        majority_model([])


def test_root_split_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 31))
        # coarse values force plenty of duplicate feature values and Gini ties
        X = rng.integers(0, 6, size=(n, 2)).astype(float) + rng.choice([0.0, 0.5], size=(n, 2))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            continue
        score, f, t = brute_force_root_split(X.tolist(), y.tolist())
        root = fit_tree(X, y, TreeParams(max_depth=1))
        if f is None:
            assert isinstance(root, Leaf)
        else:
            assert (root.feature, root.threshold) == (f, t)


def test_full_depth_fits_training_data():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, 60)
    model = train_tree((X, y))
    assert (model.predict_many(X)[0] == y).all()


def test_depth_and_leaf_limits():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 2))
    y = rng.integers(0, 2, 40)
    assert isinstance(fit_tree(X, y, TreeParams(max_depth=0)), Leaf)
    assert isinstance(fit_tree(X, y, TreeParams(min_leaf=21)), Leaf)

    def depth(node):
        return 0 if isinstance(node, Leaf) else 1 + max(depth(node.left), depth(node.right))

    def min_leaf_size(node, idx):
        if isinstance(node, Leaf):
            return len(idx)
        go = X[idx, node.feature] <= node.threshold
        return min(min_leaf_size(node.left, idx[go]), min_leaf_size(node.right, idx[~go]))

    assert depth(fit_tree(X, y, TreeParams(max_depth=2))) <= 2
    assert min_leaf_size(fit_tree(X, y, TreeParams(min_leaf=5)), np.arange(40)) >= 5


def test_min_gain_blocks_weak_splits():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 2))
    y = rng.integers(0, 2, 40)
    assert isinstance(fit_tree(X, y, TreeParams(min_gain=0.5)), Leaf)
    # a perfectly separable feature still splits
    Xs = np.c_[np.arange(40.0), rng.normal(size=40)]
    ys = (np.arange(40) >= 20).astype(int)
    assert isinstance(fit_tree(Xs, ys, TreeParams(min_gain=0.2)), Split)


def test_single_tree_forest_equals_tree():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 4))
    y = (X[:, 0] + 0.5 * rng.normal(size=50) > 0).astype(int)
    forest = train_forest((X, y), ForestParams(n_trees=1, bootstrap=False, max_features=None, seed=9))
    tree = train_tree((X, y))
    Xt = rng.normal(size=(200, 4))
    assert (forest.predict_many(Xt)[0] == tree.predict_many(Xt)[0]).all()


def test_constant_labels_give_degenerate_model():
    X = np.arange(10.0)[:, None]
    forest = train_forest((X, np.zeros(10, dtype=int)))
    assert forest.degenerate
    assert predict(forest, [3.0]) == predict(forest, [99.0])
    assert (predict(forest, [3.0]).label, predict(forest, [3.0]).confidence) == (0, 1.0)


def test_forest_is_deterministic():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 6))
    y = rng.integers(0, 2, 40)
    a = train_forest((X, y), ForestParams(n_trees=20, seed=3))
    b = train_forest((X, y), ForestParams(n_trees=20, seed=3))
    c = train_forest((X, y), ForestParams(n_trees=20, seed=4))
    assert a == b
    assert model_to_json(a) == model_to_json(b)
    assert a != c


def test_vote_examples():
    unanimous = ForestModel((Leaf(1, 1.0),) * 3, ForestParams(n_trees=3), 1)
    assert predict(unanimous, [0.0]) == predict(unanimous, [5.0])
    assert (predict(unanimous, [0.0]).label, predict(unanimous, [0.0]).confidence) == (1, 1.0)
    split = ForestModel((Leaf(0, 1.0), Leaf(1, 1.0)), ForestParams(n_trees=2), 1)
    p = predict(split, [0.0])
    assert (p.label, p.confidence) == (0, 0.5)


def test_confidence_is_vote_share():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(60, 3))
    y = (X[:, 1] > 0).astype(int) ^ (rng.random(60) < 0.2)
    forest = train_forest((X, y), ForestParams(n_trees=15, seed=1))
    Xt = rng.normal(size=(100, 3))
    labels, conf = forest.predict_many(Xt)
    for x, lab, c in zip(Xt, labels, conf):
        votes = []
        for tree in forest.trees:
            node = tree
            while isinstance(node, Split):
                node = node.left if x[node.feature] <= node.threshold else node.right
            votes.append(node.label)
        ones = sum(votes)
        expect = 1 if ones > len(votes) - ones else 0
        assert lab == expect
        assert c == pytest.approx(max(ones, len(votes) - ones) / len(votes))
        assert 0.5 <= c <= 1.0
        single = predict(forest, x)
        assert (single.label, single.confidence) == (lab, pytest.approx(c))


def test_missing_feature_rejected():
    forest = train_forest((np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0, 1])), ForestParams(n_trees=3))
    with pytest.raises(ValueError):
        predict(forest, [0.0])
    with pytest.raises(ValueError):
        predict(forest, [0.0, float("nan")])


def test_majority_model():
    m = majority_model([1, 1, 0])
    assert (m.label, m.confidence) == (1, pytest.approx(2 / 3))
    assert majority_model([0, 1]).label == 0


@given(st.lists(st.integers(0, 1), min_size=1, max_size=60))
def test_majority_training_accuracy_is_label_baseline(labels):
    from longbase.evaluation import label_baseline_accuracy

    m = majority_model(labels)
    acc = sum(lab == m.label for lab in labels) / len(labels)
    assert acc == pytest.approx(label_baseline_accuracy(labels))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_feature_transform_keeps_training_predictions(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 2, 30)
    # strictly increasing transforms per column; midpoint thresholds only
    # partition rows a tree was trained on identically, hence no bootstrap
    Xt = np.c_[np.exp(X[:, 0]), X[:, 1] ** 3, 5 * X[:, 2] - 2]
    params = ForestParams(n_trees=7, bootstrap=False, seed=seed)
    a = train_forest((X, y), params).predict_many(X)[0]
    b = train_forest((Xt, y), params).predict_many(Xt)[0]
    assert (a == b).all()


def test_json_dump_is_inspectable():
    forest = train_forest((np.array([[0.0], [1.0], [2.0]]), np.array([0, 1, 1])), ForestParams(n_trees=2))
    doc = json.loads(model_to_json(forest))
    assert doc["params"]["n_trees"] == 2
    assert len(doc["trees"]) == 2
