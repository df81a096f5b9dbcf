"""Experiment harness: plans, runs, indicators, Scott-Knott ranking and tuning."""

from dsekit.harness.algorithms import REGISTRY, UnknownAlgorithmError, run_algorithm
from dsekit.harness.experiment import (
    ExperimentResult,
    IndicatorRow,
    RankEntry,
    RunRecord,
    parse_records_csv,
    rank,
    records_to_csv,
    report,
    run_experiment,
    write_outputs,
)
from dsekit.harness.plan import AlgorithmEntry, ExperimentPlan, PlanError, ProblemEntry, load_plan, parse_plan
from dsekit.harness.stats import bootstrap_different, cliffs_delta, median_iqr, reproducibility, scott_knott
from dsekit.harness.tune import TuneResult, tune

__all__ = [
    "REGISTRY",
    "AlgorithmEntry",
    "ExperimentPlan",
    "ExperimentResult",
    "IndicatorRow",
    "PlanError",
    "ProblemEntry",
    "RankEntry",
    "RunRecord",
    "TuneResult",
    "UnknownAlgorithmError",
    "bootstrap_different",
    "cliffs_delta",
    "load_plan",
    "median_iqr",
    "parse_plan",
    "parse_records_csv",
    "rank",
    "records_to_csv",
    "report",
    "reproducibility",
    "run_algorithm",
    "run_experiment",
    "scott_knott",
    "tune",
    "write_outputs",
]
