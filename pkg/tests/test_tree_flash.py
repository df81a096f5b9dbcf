import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dsekit.core import Decision, DecisionSpace, SeededRng
from dsekit.flash import DOMINANCE_COUNT, SINGLE_OBJECTIVE_MIN, FlashParams, acquire, dominance_counts, flash
from dsekit.problems import parse_tabular
from dsekit.problems.tabular import tabular_to_csv
from dsekit.tree import fit_tree, predict


# --- tree ---------------------------------------------------------------------

def test_tree_splits_step_function_exactly():
    X = np.arange(10).reshape(-1, 1)
    y = np.where(X[:, 0] < 4, 1.0, 5.0)
    tree = fit_tree(X, y)
    assert tree.root.threshold == 3.5 and tree.depth() == 1
    assert [predict(tree, [v]) for v in (0, 3, 4, 9)] == [1.0, 1.0, 5.0, 5.0]


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 30), st.integers(1, 3)),
                  elements=st.integers(0, 6).map(float)),
       st.data())
@settings(max_examples=40)
def test_min_leaf_one_tree_reproduces_training_targets(X, data):
    # targets are a function of the row, so duplicate rows never conflict
    w = np.array(data.draw(st.lists(st.integers(-3, 3), min_size=X.shape[1], max_size=X.shape[1])), dtype=float)
    y = X @ w + (X[:, 0] > 2)
    tree = fit_tree(X, y)
    np.testing.assert_allclose(tree.predict_many(X), y, atol=1e-9)
    assert all(leaf.n >= 1 for leaf in tree.leaves())


@given(hnp.arrays(np.float64, st.tuples(st.integers(2, 40), st.just(2)), elements=st.floats(-5, 5)),
       st.integers(1, 6))
@settings(max_examples=40)
def test_leaves_respect_min_leaf_and_predict_in_target_range(X, min_leaf):
    y = np.sin(X[:, 0]) + X[:, 1]
    tree = fit_tree(X, y, min_leaf=min_leaf)
    assert sum(leaf.n for leaf in tree.leaves()) == len(X)
    if len(X) >= 2 * min_leaf:
        assert all(leaf.n >= min_leaf for leaf in tree.leaves())
    pred = tree.predict_many(X)
    assert pred.min() >= y.min() - 1e-9 and pred.max() <= y.max() + 1e-9


def test_categorical_split_and_errors():
    X = np.array([[0], [1], [2], [1], [0], [2]], dtype=float)
    y = np.array([0, 9, 0, 9, 0, 0], dtype=float)
    tree = fit_tree(X, y, categorical=[0])
    assert tree.root.category == 1.0
    assert tree.predict_many(X).tolist() == y.tolist()
    with pytest.raises(ValueError):
        fit_tree(np.empty((0, 1)), [])
    with pytest.raises(ValueError):
        predict(tree, [1, 2])
    assert fit_tree(X, np.full(6, 2.5)).root.is_leaf


# --- FLASH --------------------------------------------------------------------

def pool_problem(n_rows, objectives, seed=0):
    rng = np.random.default_rng(seed)
    space = DecisionSpace((Decision.integer("a", 0, 19), Decision.integer("b", 0, 19),
                           Decision.categorical("c", ["p", "q", "r"])))
    rows, seen = [], set()
    while len(rows) < n_rows:
        x = (int(rng.integers(20)), int(rng.integers(20)), ["p", "q", "r"][int(rng.integers(3))])
        if x not in seen:
            seen.add(x)
            rows.append((x, objectives(x, rng)))
    return parse_tabular(tabular_to_csv(space, rows), len(rows[0][1]))


def test_dominance_counts_examples():
    pred = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 2.0], [2.0, 0.0]])
    assert dominance_counts(pred).tolist() == [3, 0, 0, 0]
    assert dominance_counts(np.array([[1.0, 1.0], [1.0, 1.0]])).tolist() == [0, 0]


def test_acquisition_picks_best_prediction():
    pred = np.array([[3.0, 1.0], [0.5, 4.0], [2.0, 2.0]])
    single = FlashParams(acquisition=SINGLE_OBJECTIVE_MIN, explore=0.0)
    assert acquire(pred, single, SeededRng(0)) == 1
    dom = FlashParams(acquisition=DOMINANCE_COUNT)
    assert acquire(np.array([[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]]), dom, SeededRng(0)) == 1


def test_flash_evaluated_and_unevaluated_sets_stay_disjoint():
    pool = pool_problem(300, lambda x, r: (x[0] + r.random(), 20 - x[1] + (x[2] == "q")))
    r = flash(pool, FlashParams(init_samples=10, budget=40), seed=4)
    chosen = r.config_echo["evaluated"]
    assert len(chosen) == len(set(chosen)) == 40 == r.evals_used
    assert [t.eval_index for t in r.trace] == list(range(10, 41))


def test_flash_is_deterministic_and_beats_its_start():
    pool = pool_problem(400, lambda x, r: (abs(x[0] - 7) + abs(x[1] - 12) + r.random() * 0.1,))
    params = FlashParams(init_samples=10, budget=40, acquisition=SINGLE_OBJECTIVE_MIN)
    a, b = flash(pool, params, seed=9), flash(pool, params, seed=9)
    assert a.config_echo["evaluated"] == b.config_echo["evaluated"]
    first = a.trace[0].front.min()
    assert a.archive.objectives().min() < first


def test_flash_validation():
    pool = pool_problem(30, lambda x, r: (float(x[0]),))
    with pytest.raises(ValueError):
        FlashParams(init_samples=50, budget=50)
    with pytest.raises(ValueError):
        flash(pool, FlashParams(init_samples=10, budget=40))
    with pytest.raises(ValueError):
        flash(pool, FlashParams(init_samples=40, budget=45))
    from dsekit.problems import zdt
    with pytest.raises(ValueError):
        flash(zdt(1, 3))
