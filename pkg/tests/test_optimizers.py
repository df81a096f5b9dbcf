import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_nondominated
from dsekit.core import Decision, DecisionSpace, Direction, SeededRng, Solution
from dsekit.indicators import hypervolume
from dsekit.optimizers import (
    BINARY_DOM,
    INDICATOR_DOM,
    DeParams,
    GaParams,
    SaParams,
    acceptance_probability,
    de_trial,
    differential_evolution,
    ga_multiobjective,
    polynomial_mutation,
    random_search,
    sbx,
    simulated_annealing,
    tournament,
    truncate_by_fitness,
)
from dsekit.problems import parse_tabular, zdt
from dsekit.problems.base import Problem
from dsekit.problems.synthetic import sphere
from dsekit.problems.tabular import tabular_to_csv


class CountingProblem:
    """Wraps a problem and counts every call to ``evaluate``."""

    def __init__(self, inner):
        self.inner, self.calls = inner, 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def evaluate(self, solution):
        self.calls += 1
        return self.inner.evaluate(solution)


def quadratic_1d():
    return Problem("quad", DecisionSpace((Decision.continuous("x", -10, 10),)), (Direction.MINIMIZE,),
                   lambda s: ((s[0] - 3.0) ** 2,))


def grid_table(rng):
    space = DecisionSpace((Decision.integer("i", 0, 9), Decision.integer("j", 0, 9)))
    rows = [((i, j), tuple(float(v) for v in rng.random(2))) for i in range(10) for j in range(10)]
    return parse_tabular(tabular_to_csv(space, rows), 2), rows


# --- random search ------------------------------------------------------------

def test_random_search_budget_one_and_determinism():
    p = CountingProblem(zdt(1, 5))
    r = random_search(p, 1, seed=4)
    assert r.evals_used == 1 == p.calls and len(r.archive) == 1
    a, b = random_search(zdt(1, 5), 200, 9), random_search(zdt(1, 5), 200, 9)
    assert np.array_equal(a.archive.objectives(), b.archive.objectives())
    with pytest.raises(ValueError):
        random_search(zdt(1, 5), 0, 1)


def test_random_search_without_replacement_finds_exact_pareto_set(rng):
    table, rows = grid_table(rng)
    r = random_search(table, 100, seed=3, without_replacement=True)
    objs = np.array([o for _, o in rows])
    expected = {tuple(o) for o in objs[brute_force_nondominated(objs)]}
    assert {e.objectives.raw for e in r.archive} == expected
    assert r.evals_used == 100


@given(st.integers(1, 300), st.integers(0, 2**32))
@settings(max_examples=20)
def test_random_search_archive_is_nondominated(budget, seed):
    r = random_search(zdt(3, 4), budget, seed)
    objs = r.archive.objectives()
    assert r.evals_used == budget
    assert brute_force_nondominated(objs).all()


# --- simulated annealing ------------------------------------------------------

def test_acceptance_rule():
    assert acceptance_probability(-1.0, 0.5) == 1.0
    assert acceptance_probability(0.0, 0.0) == 1.0
    assert acceptance_probability(1.0, 1.0) == pytest.approx(math.exp(-1))
    assert acceptance_probability(0.2, 0.0) == 0.0
    assert acceptance_probability(0.5, 2.0) > acceptance_probability(0.5, 1.0)


def test_sa_finds_quadratic_minimum():
    hits = 0
    for seed in range(30):
        r = simulated_annealing(quadratic_1d(), 1000, SaParams(), seed)
        (best,) = r.archive
        hits += abs(best.solution[0] - 3.0) < 1e-2
        assert r.evals_used == 1000
    assert hits >= 28


def test_sa_validation_and_determinism():
    with pytest.raises(ValueError):
        SaParams(alpha=1.0)
    with pytest.raises(IndexError):
        simulated_annealing(quadratic_1d(), 10, seed=0, objective_index=1)
    a = simulated_annealing(zdt(1, 3), 300, seed=5, objective_index=1)
    b = simulated_annealing(zdt(1, 3), 300, seed=5, objective_index=1)
    assert a.archive.objectives().tolist() == b.archive.objectives().tolist()


def test_sa_on_tabular_pool_stays_within_budget(rng):
    table, _ = grid_table(rng)
    r = simulated_annealing(table, 50, seed=2)
    assert r.evals_used == 50


# --- differential evolution -------------------------------------------------

def test_de_trial_is_parent_when_cr_zero_and_difference_zero():
    pop = np.tile([0.3, 0.6, 0.9], (6, 1))
    lo, hi = np.zeros(3), np.ones(3)
    for i in range(6):
        assert np.array_equal(de_trial(pop, i, 0.5, 0.0, lo, hi, SeededRng(i)), pop[i])


def test_de_trial_crosses_exactly_one_coordinate_when_cr_zero(rng):
    pop = rng.random((8, 5))
    for s in range(20):
        t = de_trial(pop, 0, 0.5, 0.0, np.full(5, -9.0), np.full(5, 9.0), SeededRng(s))
        assert np.sum(t != pop[0]) <= 1


@given(st.integers(0, 2**32))
def test_de_trial_is_clamped(seed):
    pop = SeededRng(seed).random((6, 3)) * 4 - 2
    t = de_trial(pop, 2, 2.0, 1.0, np.full(3, -1.0), np.ones(3), SeededRng(seed))
    assert np.all(t >= -1) and np.all(t <= 1)


def test_de_solves_sphere():
    hits = sum(
        differential_evolution(sphere(5), 5000, DeParams(), seed).archive.objectives()[0, 0] < 1e-3
        for seed in range(30)
    )
    assert hits >= 28


def test_de_rejects_bad_setups():
    with pytest.raises(ValueError):
        DeParams(np=3)
    with pytest.raises(ValueError):
        differential_evolution(sphere(5), 10, DeParams(np=20))
    space = DecisionSpace((Decision.boolean("b"), Decision.continuous("x", 0, 1)))
    p = Problem("mixed", space, (Direction.MINIMIZE,), lambda s: (s[1],))
    with pytest.raises(ValueError):
        differential_evolution(p, 100)


def test_de_integer_decisions_stay_integral():
    space = DecisionSpace((Decision.integer("a", 0, 20), Decision.integer("b", -5, 5)))
    p = Problem("ints", space, (Direction.MINIMIZE,), lambda s: ((s[0] - 7) ** 2 + (s[1] - 2) ** 2,))
    r = differential_evolution(p, 400, seed=1)
    (best,) = r.archive
    assert best.solution.values == (7, 2)
    assert all(isinstance(v, int) for v in best.solution.values)


# --- GA -----------------------------------------------------------------------

def test_tournament_prefers_dominating_member():
    objs = np.array([[0.1, 0.1], [0.5, 0.5]])
    for s in range(10):
        assert tournament(0, 1, objs, None, BINARY_DOM, SeededRng(s)) == 0
        assert tournament(1, 0, objs, None, BINARY_DOM, SeededRng(s)) == 0
        assert tournament(1, 0, objs, np.array([-0.1, -2.0]), INDICATOR_DOM, SeededRng(s)) == 0
    incomparable = np.array([[0.1, 0.9], [0.9, 0.1]])
    picks = {tournament(0, 1, incomparable, None, BINARY_DOM, SeededRng(s)) for s in range(20)}
    assert picks == {0, 1}


def test_sbx_and_mutation_keep_bounds_and_identity(rng):
    lo, hi = np.zeros(4), np.ones(4)
    p1, p2 = rng.random(4), rng.random(4)
    for s in range(50):
        c1, c2 = sbx(p1, p2, lo, hi, 20.0, SeededRng(s))
        assert np.all((c1 >= 0) & (c1 <= 1) & (c2 >= 0) & (c2 <= 1))
        assert np.allclose(c1 + c2, p1 + p2)  # SBX preserves the midpoint when unclipped
        m = polynomial_mutation(p1, lo, hi, 20.0, 1.0, SeededRng(s))
        assert np.all((m >= 0) & (m <= 1))
    assert np.array_equal(sbx(p1, p1, lo, hi, 20.0, SeededRng(0))[0], p1)
    assert np.array_equal(polynomial_mutation(p1, lo, hi, 20.0, 0.0, SeededRng(0)), p1)


def test_ga_without_variation_produces_clones():
    p = zdt(1, 6)
    params = GaParams(pop_size=10, crossover_prob=0.0, mutation_prob=0.0)
    r = ga_multiobjective(p, 60, params, seed=3)
    initial = ga_multiobjective(p, 10, params, seed=3)
    assert {e.solution for e in r.archive} <= {e.solution for e in initial.archive}


@pytest.mark.parametrize("selection", [BINARY_DOM, INDICATOR_DOM])
def test_ga_trace_hypervolume_never_decreases(selection):
    r = ga_multiobjective(zdt(1, 10), 2000, GaParams(pop_size=40, selection=selection), seed=11)
    volumes = [hypervolume(t.front, [1.1, 11.0]).value for t in r.trace]
    assert all(b >= a - 1e-12 for a, b in zip(volumes, volumes[1:]))
    assert r.trace[-1].eval_index == r.evals_used == 2000


@given(st.integers(4, 120), st.integers(0, 2**16))
@settings(max_examples=15)
def test_ga_never_exceeds_budget(budget, seed):
    pop = 4 if budget < 40 else 20
    p = CountingProblem(zdt(3, 4))
    r = ga_multiobjective(p, budget, GaParams(pop_size=pop), seed)
    assert r.evals_used == p.calls <= budget


def test_ga_is_scale_invariant():
    # powers of two keep normalization bit-exact
    base = zdt(1, 6)
    scaled = Problem("scaled", base.space, base.directions,
                     lambda s: tuple(v * k for v, k in zip(base.fn(s), (1024.0, 2.0 ** -10))))
    a = ga_multiobjective(base, 600, GaParams(pop_size=20), seed=8)
    b = ga_multiobjective(scaled, 600, GaParams(pop_size=20), seed=8)
    assert [e.solution for e in a.archive] == [e.solution for e in b.archive]


def test_truncation_removes_crowded_point_first():
    pts = np.array([[0.0, 1.0], [0.5, 0.5], [0.5001, 0.4999], [1.0, 0.0]])
    keep = truncate_by_fitness(pts, 3, 0.05, SeededRng(0))
    assert 0 in keep and 3 in keep and len(keep) == 3


def test_ga_mixed_space_and_validation():
    space = DecisionSpace((Decision.boolean("b"), Decision.integer("k", 0, 5),
                           Decision.categorical("c", ["x", "y"]), Decision.continuous("r", 0, 1)))
    p = Problem("mixed", space, (Direction.MINIMIZE, Direction.MAXIMIZE),
                lambda s: (s[3] + s[1], float(s[0]) + (s[2] == "y")))
    r = ga_multiobjective(p, 200, GaParams(pop_size=10), seed=0)
    assert all(space.contains(e.solution) for e in r.archive)
    with pytest.raises(ValueError):
        GaParams(pop_size=5)
    with pytest.raises(ValueError):
        ga_multiobjective(p, 8, GaParams(pop_size=10))
