import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import brute_force_nondominated
from dsekit.core import IncompatibleObjectivesError, SeededRng
from dsekit.indicators import (
    DegenerateFrontWarning,
    Front,
    additive_approximation,
    build_reference_front,
    compute,
    generational_distance,
    hypervolume,
    hypervolume_monte_carlo,
    inverted_generational_distance,
    spread,
)

unit = st.floats(0, 1, width=16)


def fronts(m_min=2, m_max=3, n_max=15):
    return st.integers(m_min, m_max).flatmap(
        lambda m: hnp.arrays(np.float64, st.tuples(st.integers(1, n_max), st.just(m)), elements=unit)
    )


def brute_gd(P, A):
    total = 0.0
    for p in P:
        total += min(math.dist(p, a) for a in A)
    return total / len(P)


def grid_volume(P, ref, cells=400):
    """Exact union-of-boxes volume for 2-D fronts on a 1/cells grid (oracle)."""
    xs = (np.arange(cells) + 0.5) / cells * ref[0]
    ys = (np.arange(cells) + 0.5) / cells * ref[1]
    X, Y = np.meshgrid(xs, ys)
    covered = np.zeros_like(X, dtype=bool)
    for p in P:
        covered |= (X >= p[0]) & (Y >= p[1])
    return covered.mean() * ref[0] * ref[1]


def inclusion_exclusion(P, ref):
    """Union volume by inclusion-exclusion over all subsets (small fronts only)."""
    P = np.asarray(P)
    total = 0.0
    for k in range(1, len(P) + 1):
        for subset in itertools.combinations(range(len(P)), k):
            corner = P[list(subset)].max(axis=0)
            total += (-1) ** (k + 1) * np.prod(np.maximum(ref - corner, 0))
    return total


# --- GD / IGD ---------------------------------------------------------------

def test_gd_examples():
    A = np.array([[0, 0], [0, 1]])
    assert generational_distance(A[:1], A) == 0
    assert generational_distance([[1, 1]], A) == 1


def test_igd_examples():
    A = np.array([[0.1, 0.9], [0.5, 0.5]])
    assert inverted_generational_distance(A, A) == 0
    assert inverted_generational_distance([[0, 0], [2, 0]], [[0, 0]]) == 1


@given(fronts(), st.data())
def test_gd_matches_brute_force_and_igd_is_swapped_gd(P, data):
    A = data.draw(hnp.arrays(np.float64, (data.draw(st.integers(1, 15)), P.shape[1]), elements=unit))
    assert generational_distance(P, A) == pytest.approx(brute_gd(P, A), abs=1e-12)
    assert inverted_generational_distance(A, P) == generational_distance(A, P)


@given(fronts(), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_distance_indicators_translation_invariant(P, shift):
    A = P[::-1] * 0.5
    t = np.asarray(shift[: P.shape[1]])
    assert generational_distance(P + t, A + t) == pytest.approx(generational_distance(P, A), abs=1e-9)
    assert inverted_generational_distance(A + t, P + t) == pytest.approx(inverted_generational_distance(A, P), abs=1e-9)
    assert additive_approximation(A + t, P + t) == pytest.approx(additive_approximation(A, P), abs=1e-9)


def test_arity_and_normalization_mismatch():
    with pytest.raises(IncompatibleObjectivesError):
        generational_distance([[0, 0]], [[0, 0, 0]])
    with pytest.raises(ValueError):
        generational_distance(Front(np.zeros((1, 2)), normalized=True), Front(np.zeros((1, 2))))
    with pytest.raises(ValueError):
        generational_distance(np.empty((0, 2)), [[0, 0]])


# --- spread ------------------------------------------------------------------

def test_spread_uniform_front_is_zero():
    assert spread([[0, 1], [0.5, 0.5], [1, 0]]) == 0


def test_spread_hand_computed_value():
    # gaps: sqrt(0.81+0.81)=0.9*sqrt2 and sqrt(0.01+0.01)=0.1*sqrt2; mean 0.5*sqrt2
    # sum |d_i - mean| = 0.8*sqrt2; (N-1)*mean = sqrt2  ->  0.8
    assert spread([[0, 1], [0.9, 0.1], [1, 0]]) == pytest.approx(0.8, abs=1e-15)


def test_spread_boundary_terms():
    pts = [[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]]
    d = math.dist((0.1, 0.9), (0, 1))
    assert spread(pts, extremes=[[0, 1], [1, 0]]) == pytest.approx(2 * d / (2 * d + 2 * math.dist(pts[0], pts[1])))


def test_spread_degenerate_front_warns_and_returns_zero():
    with pytest.warns(DegenerateFrontWarning):
        assert spread([[0.3, 0.3], [0.3, 0.3]]) == 0
    with pytest.raises(ValueError):
        spread([[0.3, 0.3]])


def test_spread_three_objectives_nearest_neighbour_form():
    pts = np.eye(3)
    assert spread(pts) == 0  # all nearest-neighbour gaps equal


# --- hypervolume ------------------------------------------------------------

def test_hypervolume_examples():
    one = hypervolume([[0, 0]], [1, 1])
    assert one.value == 1 and one.exact
    assert hypervolume([[0.5, 0.5]], [1, 1]).value == 0.25
    assert hypervolume([[0.2, 0.8], [0.8, 0.2]], [1, 1]).value == pytest.approx(0.28, abs=1e-15)


def test_hypervolume_monte_carlo_cross_check_of_028():
    est = hypervolume_monte_carlo([[0.2, 0.8], [0.8, 0.2]], [1, 1], 100_000, SeededRng(0))
    assert est == pytest.approx(0.28, rel=0.02)


def test_hypervolume_point_outside_box_is_an_error():
    with pytest.raises(ValueError):
        hypervolume([[1.2, 0.0]], [1, 1])


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.just(2)), elements=st.integers(0, 8).map(lambda v: v / 8)))
def test_hv2_matches_grid_oracle(P):
    # points on a 1/8 lattice are exact on a 400-cell grid over [0, 1]
    assert hypervolume(P, [1, 1]).value == pytest.approx(grid_volume(P, [1, 1]), abs=1e-12)


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.just(3)), elements=unit))
def test_hv3_matches_inclusion_exclusion(P):
    ref = np.array([1.0, 1.0, 1.0])
    assert hypervolume(P, ref).value == pytest.approx(inclusion_exclusion(P, ref), abs=1e-12)


@given(fronts(2, 3, 8), st.data())
def test_hypervolume_dominated_point_changes_nothing_and_new_point_increases(P, data):
    ref = np.full(P.shape[1], 1.1)
    base = hypervolume(P, ref).value
    worse = np.minimum(P[0] + 0.05, 1.1)
    assert hypervolume(np.vstack([P, worse]), ref).value == pytest.approx(base, abs=1e-12)
    front = P[brute_force_nondominated(P)]
    new = data.draw(hnp.arrays(np.float64, P.shape[1], elements=unit))
    if not any(np.all(q <= new) for q in front):
        assert hypervolume(np.vstack([P, new]), ref).value > base


def test_four_objective_hypervolume_is_estimated():
    hv = hypervolume(np.array([[0.5, 0.5, 0.5, 0.5]]), np.ones(4), samples=20_000, rng=SeededRng(1))
    assert not hv.exact and hv.samples == 20_000
    assert hv.value == pytest.approx(0.0625, rel=0.05)


# --- additive approximation and reference fronts ------------------------------

def test_additive_approximation_examples():
    A = np.array([[0.2, 0.4], [0.6, 0.1]])
    assert additive_approximation(A, A) == 0
    assert additive_approximation([[0, 0]], [[0.3, 0.1]]) == pytest.approx(0.3)


@given(fronts(), st.floats(-2, 2))
def test_additive_approximation_shift(P, c):
    A = np.flipud(P) * 0.7
    assert additive_approximation(A, P + c) == pytest.approx(additive_approximation(A, P) + c, abs=1e-9)


def test_reference_front_examples(rng):
    ref = build_reference_front([[[0, 1]], [[1, 0]]])
    assert sorted(map(tuple, ref)) == [(0, 1), (1, 0)]
    ref = build_reference_front([[[0, 0]], [[1, 1], [2, 0.5]]])
    assert ref.tolist() == [[0, 0]]
    runs = [rng.random((8, 3)) for _ in range(5)]
    union = np.vstack(runs)
    expected = np.unique(union[brute_force_nondominated(union)], axis=0)
    assert np.array_equal(np.unique(build_reference_front(runs), axis=0), expected)
    with pytest.raises(ValueError):
        build_reference_front([])


def test_compute_dispatch():
    P = np.array([[0.5, 0.5]])
    assert compute("hv", P, P, ref=[1, 1]) == (0.25, True)
    assert compute("igd", P, P)[0] == 0
    with pytest.raises(ValueError):
        compute("nope", P, P)
