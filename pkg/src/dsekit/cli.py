"""Command-line interface: ``dsekit {problems,run,indicators,rank,tune}``.

Exit codes: 0 success, 2 usage or input error, 1 internal error.
``DSEKIT_SEED`` sets the seed of ``run``, ``rank``, ``indicators`` and
``tune`` when ``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from dsekit.core import MAX_SEED, IncompatibleObjectivesError, SeededRng, format_float, normalize_points, read_front_csv
from dsekit.harness.algorithms import REGISTRY, UnknownAlgorithmError
from dsekit.harness.experiment import (
    RecordsFormatError,
    atomic_write,
    parse_records_csv,
    report,
    run_experiment,
    write_outputs,
)
from dsekit.harness.plan import AlgorithmEntry, PlanError, dump_algorithms, load_plan
from dsekit.harness.tune import DEFAULT_INNER_BUDGET, tune
from dsekit.indicators import INDICATORS, compute
from dsekit.problems import BUILTIN, TEMPLATES, load_feature_model, load_tabular, make_problem
from dsekit.problems.spl import FeatureModelError, generate_attributes, spl_problem
from dsekit.problems.tabular import TabularFormatError

log = logging.getLogger("dsekit")

SEED_ENV = "DSEKIT_SEED"


class UsageError(Exception):
    """Bad input from the user; reported with exit code 2."""


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def resolve_seed(flag: int | None, default: int | None = None) -> int | None:
    """Flag beats ``DSEKIT_SEED``, which beats ``default``."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return _seed_arg(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    return default


def cmd_problems(args: argparse.Namespace) -> int:
    lines = ["name\tkinds\tobjectives\tsource"]
    for name in (*BUILTIN, "spl:mobile_phone"):
        lines.append(make_problem(name).describe())
    try:
        for path in args.tabular or ():
            space = load_tabular(path, args.objectives)
            lines.append(space.describe())
        for path in args.spl or ():
            model = load_feature_model(path)
            problem = spl_problem(model, generate_attributes(model, 0), name=f"spl:{path}")
            lines.append(dataclasses.replace(problem, source="file").describe() + f"\tfeatures={len(model.features)}")
    except (OSError, TabularFormatError, FeatureModelError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    lines.extend(f"{t}\t-\t-\ttemplate" for t in TEMPLATES)
    print("\n".join(lines))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    try:
        plan = load_plan(args.plan)
    except FileNotFoundError:
        raise UsageError(f"plan file not found: {args.plan}") from None
    except PlanError as exc:
        raise UsageError(str(exc)) from None
    seed = resolve_seed(args.seed)
    if seed is not None:
        try:
            plan = dataclasses.replace(plan, base_seed=seed)
        except PlanError as exc:
            raise UsageError(str(exc)) from None
    for w in plan.warnings:
        print(f"# {w}", file=sys.stderr)
    result = run_experiment(plan, jobs=args.jobs)
    paths = write_outputs(result, args.out)
    for f in result.failures:
        print(f"run failed: {f.problem}/{f.algorithm} repeat {f.repeat}: {f.error}", file=sys.stderr)
    if len(result.failures) == len(result.records):
        print("every run failed; see the manifest", file=sys.stderr)
        return 1
    print(paths["report_text"].read_text(encoding="utf-8"), end="")
    print(f"wrote {paths['records']}, {paths['report']}, {paths['manifest']}", file=sys.stderr)
    return 0


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"--ref must be comma-separated numbers, got {text!r}") from None


def cmd_indicators(args: argparse.Namespace) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in metrics if m not in INDICATORS]
    if bad or not metrics:
        raise UsageError(f"unknown metric {bad[0] if bad else '(none)'}; choose from {','.join(INDICATORS)}")
    try:
        predicted, actual = read_front_csv(args.predicted), read_front_csv(args.actual)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if predicted.shape[1] != actual.shape[1]:
        raise UsageError(f"arity mismatch: predicted has {predicted.shape[1]} objectives, actual has {actual.shape[1]}")
    if not args.no_normalize:
        bounds = (actual.min(axis=0), actual.max(axis=0))
        predicted, actual = normalize_points(predicted, bounds), normalize_points(actual, bounds)
    ref = _parse_point(args.ref) if args.ref else None
    seed = resolve_seed(args.seed, 0)
    out = []
    for name in metrics:
        try:
            value, exact = compute(name, predicted, actual, ref, args.samples, SeededRng(seed))
        except (IncompatibleObjectivesError, ValueError) as exc:
            raise UsageError(f"{name}: {exc}") from None
        out.append(f"{name},{format_float(value)},{'exact' if exact else 'estimated'}")
    print("\n".join(out))
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    try:
        rows = parse_records_csv(Path(args.records).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"records file not found: {args.records}") from None
    except RecordsFormatError as exc:
        raise UsageError(f"{args.records}: {exc}") from None
    _, csv_text, text = report(rows, seed=resolve_seed(args.seed))
    if args.out:
        out = Path(args.out)
        atomic_write(out / "report.csv", csv_text)
        atomic_write(out / "report.txt", text)
        print(text, end="")
    else:
        print(csv_text)
        print(text, end="")
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    if args.target not in REGISTRY:
        raise UsageError(f"unknown target {args.target!r}; known: {', '.join(REGISTRY)}")
    if REGISTRY[args.target].tunable is None:
        tunable = ", ".join(k for k, v in REGISTRY.items() if v.tunable is not None)
        raise UsageError(f"{args.target} has no tunable parameters; tunable targets: {tunable}")
    try:
        problem = make_problem(args.problem)
    except (KeyError, OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    seed = resolve_seed(args.seed, 0)
    try:
        result = tune(args.target, problem, args.meta_budget, args.inner_repeats, seed,
                      args.inner_budget, args.indicator)
    except (ValueError, UnknownAlgorithmError) as exc:
        raise UsageError(str(exc)) from None
    comment = (f"tuned on {args.problem} seed {seed}: median {result.indicator} "
               f"{format_float(result.score)} (defaults {format_float(result.default_score)})")
    block = dump_algorithms([AlgorithmEntry(f"{args.target}_tuned", args.target, result.params)], comment)
    if args.out:
        atomic_write(args.out, block)
    print(block, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsekit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("problems", help="list registered problems")
    p.add_argument("--tabular", action="append", metavar="FILE", help="also describe a tabular CSV space")
    p.add_argument("--objectives", type=_positive, default=2, help="objective columns in --tabular files")
    p.add_argument("--spl", action="append", metavar="FILE", help="also describe a feature-model file")
    p.set_defaults(func=cmd_problems)

    p = sub.add_parser("run", help="run an experiment plan")
    p.add_argument("--plan", required=True, metavar="FILE")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--seed", type=_seed_arg, help="override the plan's base_seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("indicators", help="score a predicted front against an actual front")
    p.add_argument("--predicted", required=True, metavar="FILE")
    p.add_argument("--actual", required=True, metavar="FILE")
    p.add_argument("--metrics", required=True, metavar="LIST", help=f"comma list from {','.join(INDICATORS)}")
    p.add_argument("--ref", metavar="CSV", help="hypervolume reference point, e.g. 1.1,1.1")
    p.add_argument("--samples", type=_positive, default=100_000, help="Monte Carlo samples for hv with m >= 4")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--seed", type=_seed_arg)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("rank", help="Scott-Knott rank a records CSV")
    p.add_argument("--records", required=True, metavar="FILE")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--seed", type=_seed_arg)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("tune", help="tune an algorithm's parameters with differential evolution")
    p.add_argument("--target", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--meta-budget", type=_positive, required=True)
    p.add_argument("--seed", type=_seed_arg)
    p.add_argument("--inner-repeats", type=_positive, default=3)
    p.add_argument("--inner-budget", type=_positive, default=DEFAULT_INNER_BUDGET)
    p.add_argument("--indicator", choices=INDICATORS, default="igd")
    p.add_argument("--out", metavar="FILE", help="also write the parameter block here")
    p.set_defaults(func=cmd_tune)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dsekit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
