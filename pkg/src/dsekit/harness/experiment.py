"""Running plans, scoring runs against the union reference front, and reporting."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import re
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from dsekit.core import SeededRng, format_float, front_to_csv, normalize_points
from dsekit.harness.algorithms import run_algorithm
from dsekit.harness.plan import RECOMMENDED_REPEATS, AlgorithmEntry, ExperimentPlan, ProblemEntry
from dsekit.harness.stats import DEFAULT_BOOTSTRAP, median_iqr, scott_knott
from dsekit.indicators import HIGHER_IS_BETTER, DegenerateFrontWarning, build_reference_front, compute
from dsekit.problems import make_problem

log = logging.getLogger(__name__)

RECORD_FIELDS = ("problem", "algorithm", "seed", "repeat", "evals_used", "indicator", "value", "wall_ms")
REPORT_FIELDS = ("problem", "indicator", "algorithm", "rank", "median", "iqr", "n")


class RecordsFormatError(ValueError):
    pass


@dataclass
class RunRecord:
    """One (problem, algorithm, repeat) run; ``front`` is raw and minimized."""

    problem: str
    algorithm: str
    seed: int
    repeat: int
    evals_used: int
    front: np.ndarray | None
    wall_time: float
    error: str | None = None
    values: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class IndicatorRow:
    problem: str
    algorithm: str
    seed: int
    repeat: int
    evals_used: int
    indicator: str
    value: float
    wall_ms: float | None = None


@dataclass(frozen=True)
class RankEntry:
    algorithm: str
    rank: int
    median: float
    iqr: float
    samples: tuple[float, ...]


# (problem, indicator) -> entries sorted by rank, then median, then name
RankingTable = dict[tuple[str, str], list[RankEntry]]


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    records: list[RunRecord]
    rows: list[IndicatorRow]
    reference_fronts: dict[str, np.ndarray]
    notes: list[str]

    @property
    def failures(self) -> list[RunRecord]:
        return [r for r in self.records if not r.ok]


def _run_one(task: tuple) -> RunRecord:
    problem_entry, algo, budget, seed, repeat, base_dir = task
    problem_entry: ProblemEntry
    algo: AlgorithmEntry
    start = time.perf_counter()
    try:
        problem = make_problem(problem_entry.name, base_dir, **problem_entry.options)
        result = run_algorithm(algo.kind, problem, budget, algo.params, seed)
        front = result.front()
        return RunRecord(problem_entry.label, algo.label, seed, repeat, result.evals_used,
                         front, time.perf_counter() - start)
    except Exception as exc:  # noqa: BLE001 - one failed run must not abort the plan
        return RunRecord(problem_entry.label, algo.label, seed, repeat, 0, None,
                         time.perf_counter() - start, f"{type(exc).__name__}: {exc}")


def execute_runs(plan: ExperimentPlan, jobs: int = 1) -> list[RunRecord]:
    seeds = plan.run_seeds()
    tasks = [(p, a, plan.budget, seeds[i], r, plan.base_dir) for i, p, a, r in plan.runs()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_run_one(t) for t in tasks]


def score_records(plan: ExperimentPlan, records: list[RunRecord]) -> tuple[list[IndicatorRow], dict[str, np.ndarray], list[str]]:
    """Compute each plan indicator for every successful run.

    Per problem, the reference front is the non-dominated union of all run
    fronts; fronts are min-max scaled against its bounds before scoring.
    Undefined values (e.g. spread of a single point) are skipped and noted.
    """
    rows: list[IndicatorRow] = []
    refs: dict[str, np.ndarray] = {}
    notes: list[str] = []
    by_problem: dict[str, list[RunRecord]] = {}
    for rec in records:
        if rec.ok:
            by_problem.setdefault(rec.problem, []).append(rec)
    for problem, recs in by_problem.items():
        ref = build_reference_front([r.front for r in recs])
        refs[problem] = ref
        bounds = (ref.min(axis=0), ref.max(axis=0))
        ref_n = normalize_points(ref, bounds)
        for rec in recs:
            front_n = normalize_points(rec.front, bounds)
            for name in plan.indicators:
                if name == "spread" and len(front_n) < 2:
                    notes.append(f"{problem}/{rec.algorithm}/repeat {rec.repeat}: spread undefined for a {len(front_n)}-point front")
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DegenerateFrontWarning)
                    value, _ = compute(name, front_n, ref_n, rng=SeededRng(rec.seed))
                rec.values[name] = value
                rows.append(IndicatorRow(problem, rec.algorithm, rec.seed, rec.repeat, rec.evals_used,
                                         name, value, rec.wall_time * 1000.0 if plan.timing else None))
    return rows, refs, notes


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> ExperimentResult:
    records = execute_runs(plan, jobs)
    for rec in records:
        if not rec.ok:
            log.warning("run failed: %s/%s repeat %d: %s", rec.problem, rec.algorithm, rec.repeat, rec.error)
    rows, refs, notes = score_records(plan, records)
    return ExperimentResult(plan, records, rows, refs, notes)


# --- records CSV -------------------------------------------------------------

def records_to_csv(rows: Iterable[IndicatorRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in rows:
        w.writerow([r.problem, r.algorithm, r.seed, r.repeat, r.evals_used, r.indicator,
                    format_float(r.value), "" if r.wall_ms is None else format_float(r.wall_ms)])
    return buf.getvalue()


def parse_records_csv(text: str) -> list[IndicatorRow]:
    """Parse a records CSV; errors name the 1-based line of the bad row.

    Lines starting with ``#`` are comments.
    """
    numbered = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip() and not ln.startswith("#")]
    if not numbered:
        raise RecordsFormatError("records file is empty")
    first, header = numbered[0][0], next(csv.reader([numbered[0][1]]))
    if tuple(h.strip() for h in header) != RECORD_FIELDS:
        raise RecordsFormatError(f"line {first}: header must be {','.join(RECORD_FIELDS)}")
    out = []
    for lineno, line in numbered[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(RECORD_FIELDS):
            raise RecordsFormatError(f"line {lineno}: expected {len(RECORD_FIELDS)} fields, got {len(row)}")
        try:
            value = float(row[6])
            if not math.isfinite(value):
                raise ValueError("non-finite value")
            out.append(IndicatorRow(row[0], row[1], int(row[2]), int(row[3]), int(row[4]), row[5],
                                    value, float(row[7]) if row[7] else None))
        except ValueError as exc:
            raise RecordsFormatError(f"line {lineno}: {exc}") from None
    if not out:
        raise RecordsFormatError("records file has no rows")
    return out


# --- ranking and report ------------------------------------------------------

def rank(rows: Sequence[IndicatorRow], seed: int = 0, n_boot: int = DEFAULT_BOOTSTRAP) -> tuple[RankingTable, list[str]]:
    """Scott-Knott rank the algorithms in every (problem, indicator) cell.

    ``hv`` is ranked on negated values so rank 1 is always best; medians are
    reported on the original scale. Algorithms with a single sample in a
    cell cannot be tested and are listed as notes instead.
    """
    cells: dict[tuple[str, str], dict[str, list[float]]] = {}
    for r in rows:
        cells.setdefault((r.problem, r.indicator), {}).setdefault(r.algorithm, []).append(r.value)
    table: RankingTable = {}
    notes: list[str] = []
    for cell_index, key in enumerate(sorted(cells)):
        groups = {a: v for a, v in cells[key].items() if len(v) >= 2}
        for a in sorted(set(cells[key]) - set(groups)):
            notes.append(f"{key[0]}/{key[1]}: {a} has 1 sample; not ranked")
        if not groups:
            continue
        ranks = scott_knott(groups, seed=seed + cell_index, n_boot=n_boot,
                            higher_is_better=key[1] in HIGHER_IS_BETTER)
        entries = []
        for a, samples in groups.items():
            med, iqr = median_iqr(samples)
            entries.append(RankEntry(a, ranks[a], med, iqr, tuple(samples)))
        sign = -1.0 if key[1] in HIGHER_IS_BETTER else 1.0
        entries.sort(key=lambda e: (e.rank, sign * e.median, e.algorithm))
        table[key] = entries
    return table, notes


def repeats_of(rows: Sequence[IndicatorRow]) -> int:
    counts: dict[tuple, int] = {}
    for r in rows:
        key = (r.problem, r.algorithm, r.indicator)
        counts[key] = counts.get(key, 0) + 1
    return max(counts.values()) if counts else 0


def scaled_down_warning(rows: Sequence[IndicatorRow]) -> str | None:
    n = repeats_of(rows)
    if n < RECOMMENDED_REPEATS:
        return f"WARNING: scaled-down plan: repeats={n} < {RECOMMENDED_REPEATS}"
    return None


def report_csv(table: RankingTable, warning: str | None = None) -> str:
    buf = io.StringIO()
    if warning:
        buf.write(f"# {warning}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for (problem, indicator), entries in sorted(table.items()):
        for e in entries:
            w.writerow([problem, indicator, e.algorithm, e.rank, format_float(e.median),
                        format_float(e.iqr), len(e.samples)])
    return buf.getvalue()


def report_text(table: RankingTable, warning: str | None = None, notes: Sequence[str] = ()) -> str:
    header = ("problem", "indicator", "rank", "algorithm", "median", "iqr", "n")
    body = []
    for (problem, indicator), entries in sorted(table.items()):
        for e in entries:
            body.append((problem, indicator, str(e.rank), e.algorithm, f"{e.median:.6g}", f"{e.iqr:.6g}", str(len(e.samples))))
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    numeric = {2, 4, 5, 6}

    def fmt(row):
        return "  ".join(c.rjust(widths[i]) if i in numeric else c.ljust(widths[i]) for i, c in enumerate(row)).rstrip()

    lines = [f"# {warning}"] if warning else []
    lines += [fmt(header), fmt(tuple("-" * w for w in widths))]
    lines += [fmt(r) for r in body]
    lines += [f"# note: {n}" for n in notes]
    return "\n".join(lines) + "\n"


def report(rows: Sequence[IndicatorRow], seed: int | None = None, n_boot: int = DEFAULT_BOOTSTRAP) -> tuple[RankingTable, str, str]:
    """Rank ``rows`` and render ``(table, csv_text, plain_text)``.

    The bootstrap seed defaults to the smallest run seed in ``rows``, which
    is the plan's base seed, so re-ranking a records file reproduces the
    report written by the run.
    """
    if not rows:
        raise ValueError("report needs at least one record")
    if seed is None:
        seed = min(r.seed for r in rows)
    table, notes = rank(rows, seed, n_boot)
    warning = scaled_down_warning(rows)
    return table, report_csv(table, warning), report_text(table, warning, notes)


# --- output files ------------------------------------------------------------

def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=-]+", "_", name).strip("_") or "x"


def manifest(result: ExperimentResult, extra: dict | None = None) -> dict:
    plan = result.plan
    seeds = plan.run_seeds()
    return {
        "plan": plan.to_dict(),
        "runs": [
            {"problem": p.label, "algorithm": a.label, "repeat": r, "seed": seeds[i]}
            for i, p, a, r in plan.runs()
        ],
        "failures": [
            {"problem": f.problem, "algorithm": f.algorithm, "repeat": f.repeat, "seed": f.seed, "error": f.error}
            for f in result.failures
        ],
        "warnings": plan.warnings,
        "notes": result.notes,
        **(extra or {}),
    }


def write_outputs(result: ExperimentResult, out_dir: str | Path, seed: int | None = None) -> dict[str, Path]:
    """Write records, report (CSV and text), manifest and fronts under ``out_dir``."""
    out = Path(out_dir)
    paths = {
        "records": out / "records.csv",
        "report": out / "report.csv",
        "report_text": out / "report.txt",
        "manifest": out / "manifest.json",
    }
    atomic_write(paths["records"], records_to_csv(result.rows))
    extra = {}
    if result.rows:
        _, csv_text, text = report(result.rows, seed)
        atomic_write(paths["report"], csv_text)
        atomic_write(paths["report_text"], text)
    else:
        extra["report"] = "no successful runs; report not written"
    for problem, ref in result.reference_fronts.items():
        atomic_write(out / "fronts" / _slug(problem) / "reference.csv", front_to_csv(ref))
    for rec in result.records:
        if rec.ok and len(rec.front):
            atomic_write(out / "fronts" / _slug(rec.problem) / f"{_slug(rec.algorithm)}_r{rec.repeat}.csv", front_to_csv(rec.front))
    atomic_write(paths["manifest"], json.dumps(manifest(result, extra), indent=2, default=str) + "\n")
    return paths
