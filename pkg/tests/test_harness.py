import csv
import io
import json

import numpy as np
import pytest

from conftest import brute_force_nondominated
from dsekit.core import Decision, DecisionSpace, normalize_points
from dsekit.harness import (
    AlgorithmEntry,
    ExperimentPlan,
    PlanError,
    ProblemEntry,
    parse_plan,
    parse_records_csv,
    rank,
    records_to_csv,
    report,
    run_algorithm,
    run_experiment,
    scott_knott,
    tune,
    write_outputs,
)
from dsekit.harness.experiment import IndicatorRow, RecordsFormatError, atomic_write
from dsekit.harness.plan import dump_algorithms, parse_algorithms_fragment
from dsekit.indicators import inverted_generational_distance
from dsekit.problems import make_problem

SMALL_PLAN = """\
budget: 200
repeats: 30
base_seed: 5
indicators: [igd, hv]
problems:
  - name: zdt1
    n: 4
algorithms:
  - random_search
  - name: ga_small
    type: ga
    pop_size: 10
"""


@pytest.fixture(scope="module")
def small_result():
    return run_experiment(parse_plan(SMALL_PLAN))


# --- plans ---------------------------------------------------------------------

@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("budget: 10\nproblems: [zdt1]\nalgorithms: [nsga9]\n", 3, "unknown algorithm"),
        ("budget: 10\nproblems: [zdt1]\nalgorithms:\n  - name: x\n    type: bogus\n", 5, "unknown algorithm"),
        ("budget: 10\nrepeat: 3\nproblems: [zdt1]\nalgorithms: [sa]\n", 2, "unknown key"),
        ("budget: 10\nrepeats: 0\nproblems: [zdt1]\nalgorithms: [sa]\n", 2, "repeats"),
        ("budget: ten\nproblems: [zdt1]\nalgorithms: [sa]\n", 1, "integer"),
        ("budget: 10\nindicators: [igd, nope]\nproblems: [zdt1]\nalgorithms: [sa]\n", 2, "unknown indicator"),
        ("budget: 10\nproblems: [zdt1]\nalgorithms: [sa, sa]\n", 3, "unique"),
        ("budget: 10\nproblems: [zdt1\n", 3, "invalid YAML"),
    ],
)
def test_plan_errors_name_the_line(text, line, fragment):
    with pytest.raises(PlanError) as info:
        parse_plan(text, "p.yaml")
    assert info.value.line == line
    assert str(info.value).startswith(f"p.yaml:{line}: ")
    assert fragment in str(info.value)


def test_plan_seeds_are_distinct_and_wrap():
    plan = parse_plan(SMALL_PLAN)
    seeds = plan.run_seeds()
    assert len(seeds) == len(set(seeds)) == 60
    top = ExperimentPlan((ProblemEntry("zdt1"),), (AlgorithmEntry("sa", "sa"),), 10, 3, 2**64 - 2)
    assert top.run_seeds() == [2**64 - 2, 2**64 - 1, 0]


def test_scaled_down_plan_warns():
    plan = parse_plan(SMALL_PLAN.replace("repeats: 30", "repeats: 3"))
    assert plan.warnings == ["WARNING: scaled-down plan: repeats=3 < 30"]
    assert parse_plan(SMALL_PLAN).warnings == []


# --- runs and records ------------------------------------------------------------

def test_plan_of_one_problem_two_algorithms_thirty_repeats(small_result):
    assert len(small_result.records) == 60
    assert not small_result.failures
    igd = [r for r in small_result.rows if r.indicator == "igd"]
    assert len(igd) == 60
    assert len({r.seed for r in igd}) == 60


def test_records_csv_is_byte_identical_across_runs(small_result):
    again = run_experiment(parse_plan(SMALL_PLAN))
    assert records_to_csv(again.rows) == records_to_csv(small_result.rows)


def test_parallel_jobs_match_serial(small_result):
    plan = parse_plan(SMALL_PLAN.replace("repeats: 30", "repeats: 4"))
    assert records_to_csv(run_experiment(plan, jobs=2).rows) == records_to_csv(run_experiment(plan).rows)


def test_reference_front_is_union_of_run_fronts(small_result):
    union = np.vstack([r.front for r in small_result.records])
    expected = np.unique(union[brute_force_nondominated(union)], axis=0)
    got = np.unique(small_result.reference_fronts["zdt1[n=4]"], axis=0)
    assert np.array_equal(got, expected)


def test_igd_rows_recomputed_from_fronts(small_result):
    ref = small_result.reference_fronts["zdt1[n=4]"]
    bounds = (ref.min(axis=0), ref.max(axis=0))
    by_seed = {r.seed: r for r in small_result.records}
    for row in small_result.rows:
        if row.indicator == "igd":
            front = normalize_points(by_seed[row.seed].front, bounds)
            assert row.value == inverted_generational_distance(normalize_points(ref, bounds), front)


def test_failing_run_is_recorded_not_fatal():
    plan = parse_plan("budget: 5\nrepeats: 2\nproblems: [zdt1]\nalgorithms:\n  - random_search\n"
                      "  - name: big_ga\n    type: ga\n    pop_size: 40\n")
    result = run_experiment(plan)
    assert len(result.failures) == 2 and all("pop_size" in f.error for f in result.failures)
    assert {r.algorithm for r in result.rows} == {"random_search"}


def test_records_csv_round_trip_and_errors(small_result):
    text = records_to_csv(small_result.rows)
    assert parse_records_csv(text) == small_result.rows
    lines = text.splitlines()
    broken = "\n".join(["# comment", *lines[:3], "zdt1,x,1,0,5,igd", *lines[3:]])
    with pytest.raises(RecordsFormatError, match="line 5"):
        parse_records_csv(broken)
    with pytest.raises(RecordsFormatError, match="line 1"):
        parse_records_csv("a,b\n1,2\n")
    with pytest.raises(RecordsFormatError, match="line 2"):
        parse_records_csv(lines[0] + "\nz,a,1,0,5,igd,nan,\n")


# --- ranking and report -----------------------------------------------------------

def test_report_medians_match_recomputation(small_result):
    table, csv_text, text = report(small_result.rows)
    body = [r for r in csv.DictReader(io.StringIO(csv_text))]
    for row in body:
        values = [r.value for r in small_result.rows
                  if r.algorithm == row["algorithm"] and r.indicator == row["indicator"]]
        assert float(row["median"]) == pytest.approx(float(np.median(values)), rel=1e-12)
        q75, q25 = np.percentile(values, [75, 25])
        assert float(row["iqr"]) == pytest.approx(q75 - q25, rel=1e-12, abs=1e-15)
        assert int(row["n"]) == 30
    assert report(small_result.rows)[1] == csv_text
    assert "WARNING" not in csv_text
    assert "median" in text and "iqr" in text


def test_rank_matches_scott_knott_per_cell(small_result):
    table, _ = rank(small_result.rows, seed=5)
    cells = sorted({(r.problem, r.indicator) for r in small_result.rows})
    for i, cell in enumerate(cells):
        groups = {}
        for r in small_result.rows:
            if (r.problem, r.indicator) == cell:
                groups.setdefault(r.algorithm, []).append(r.value)
        expected = scott_knott(groups, seed=5 + i, higher_is_better=cell[1] == "hv")
        assert {e.algorithm: e.rank for e in table[cell]} == expected


def test_single_algorithm_report_and_warning():
    rows = [IndicatorRow("p", "a", s, s, 10, "igd", 0.1 * s) for s in range(3)]
    table, csv_text, text = report(rows)
    assert [(e.algorithm, e.rank) for e in table[("p", "igd")]] == [("a", 1)]
    assert csv_text.startswith("# WARNING: scaled-down plan: repeats=3 < 30\n")
    assert text.startswith("# WARNING")


def test_single_sample_groups_are_noted():
    rows = [IndicatorRow("p", "a", 0, 0, 10, "igd", 0.1), IndicatorRow("p", "b", 1, 0, 10, "igd", 0.2),
            IndicatorRow("p", "b", 2, 1, 10, "igd", 0.3)]
    table, notes = rank(rows)
    assert [e.algorithm for e in table[("p", "igd")]] == ["b"]
    assert notes == ["p/igd: a has 1 sample; not ranked"]


def test_write_outputs_layout(small_result, tmp_path):
    write_outputs(small_result, tmp_path)
    names = {p.name for p in tmp_path.iterdir()}
    assert {"records.csv", "report.csv", "report.txt", "manifest.json", "fronts"} <= names
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert len(m["runs"]) == 60 and m["failures"] == []
    fronts = tmp_path / "fronts" / "zdt1_n=4"
    assert (fronts / "reference.csv").exists() and (fronts / "ga_small_r29.csv").exists()
    assert not list(tmp_path.glob(".*"))  # no temp files left behind


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write(target, "one")
    atomic_write(target, "two")
    assert target.read_text() == "two" and len(list(target.parent.iterdir())) == 1


def test_timing_column_only_when_requested():
    text = SMALL_PLAN.replace("repeats: 30", "repeats: 2")
    plain = run_experiment(parse_plan(text))
    timed = run_experiment(parse_plan(text + "timing: true\n"))
    assert all(r.wall_ms is None for r in plain.rows)
    assert all(r.wall_ms is not None and r.wall_ms >= 0 for r in timed.rows)


# --- tuning ----------------------------------------------------------------------

def test_tune_is_deterministic_and_never_worse_than_defaults():
    problem = make_problem("zdt1", n=10)
    a = tune("ga", problem, 8, 3, seed=0, inner_budget=400)
    b = tune("ga", problem, 8, 3, seed=0, inner_budget=400)
    assert a == b
    assert a.score <= a.default_score
    assert a.meta_evals == 8 and a.inner_seeds == (1, 2, 3)


def test_tuned_block_round_trips_into_a_plan():
    result = tune("de", make_problem("zdt1", n=4), 4, 3, seed=2, inner_budget=200)
    block = dump_algorithms([AlgorithmEntry("de_tuned", "de", result.params)], "tuned")
    (entry,) = parse_algorithms_fragment(block)
    assert entry == AlgorithmEntry("de_tuned", "de", result.params)
    plan = parse_plan("budget: 100\nproblems: [zdt1]\n" + block.split("\n", 1)[1])
    assert plan.algorithms == (entry,)
    run_algorithm(entry.kind, make_problem("zdt1", n=4), 100, entry.params, 0)


def test_tune_errors():
    zdt = make_problem("zdt1", n=4)
    with pytest.raises(ValueError, match="below the DE population"):
        tune("ga", zdt, 3)
    with pytest.raises(ValueError, match="inner_repeats"):
        tune("ga", zdt, 10, inner_repeats=2)
    with pytest.raises(ValueError, match="no tunable"):
        tune("sway", zdt, 10)
    with pytest.raises(ValueError, match="known front"):
        tune("ga", make_problem("spl:mobile_phone"), 10)
    with pytest.raises(ValueError, match="continuous or integer"):
        tune("ga", zdt, 10, space=DecisionSpace((Decision.boolean("b"),)))
