"""Command-line entry point.

Exit codes: 0 success, 2 bad arguments or incompatible task/preset/metric,
3 data or model-file errors, 4 search finished without a successful trial.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .benchmark import BenchmarkConfig, DESK_GENERATORS, check_thresholds, run_benchmark, to_csv
from .generators import GENERATORS, generate
from .pipeline import (
    PRESETS,
    SCHEMA_VERSION,
    TASKS,
    PipelineError,
    TemplateError,
    deserialize,
    search,
    serialize,
)
from .pipeline.run import check_metric
from .preprocess import PreprocessError
from .search import Budget, NoResultError, history_to_csv, score
from .search.metrics import METRICS, MetricError

log = logging.getLogger("qautoml")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_RESULT = 0, 2, 3, 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ---------------------------------------------------------------------------
# io helpers


def read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc


def split_target(df: pd.DataFrame, target: str, task: str):
    if target not in df.columns:
        raise DataError(f"target column {target!r} not in {list(df.columns)}")
    if df.empty:
        raise DataError("training data has no rows")
    y = df[target]
    if y.isna().any():
        raise DataError(f"target column {target!r} has missing values")
    if task == "ts_forecasting":
        return pd.to_numeric(y, errors="raise").to_numpy(dtype=float), None
    X = df.drop(columns=[target])
    if X.shape[1] == 0:
        raise DataError("no feature columns")
    return X, y.to_numpy()


def parse_categorical(value, df=None) -> tuple[str, ...]:
    if not value:
        return ()
    cols = tuple(c.strip() for c in value.split(",") if c.strip())
    if df is not None:
        missing = [c for c in cols if c not in df.columns]
        if missing:
            raise DataError(f"categorical columns {missing} not in the data")
    return cols


def write_text(path, text):
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


def sibling(out: str, suffix: str) -> str:
    p = Path(out)
    stem = p.name[: -len(p.suffix)] if p.suffix else p.name
    return str(p.with_name(stem + suffix))


# ---------------------------------------------------------------------------
# commands


def cmd_fit(args) -> int:
    task = args.task
    try:
        metric = check_metric(task, args.metric)
    except MetricError as exc:
        raise UsageError(str(exc)) from exc
    if args.trials is None and args.budget_seconds is None:
        args.trials = 25
    try:
        budget = Budget(args.trials, args.budget_seconds)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 < args.validation_fraction < 1:
        raise UsageError("--validation-fraction must be in (0, 1)")

    df = read_csv(args.data)
    categorical = parse_categorical(args.categorical, df)
    X, y = split_target(df, args.target, task)
    if task == "ts_forecasting" and categorical:
        raise UsageError("forecasting takes a single numeric series; --categorical does not apply")

    start = time.perf_counter()
    try:
        outcome = search(
            task, X, y, args.preset, metric, budget, args.seed, args.workers,
            args.validation_fraction, categorical, args.sampler, args.trial_timeout,
        )
    except TemplateError as exc:
        raise UsageError(str(exc)) from exc
    wall = time.perf_counter() - start
    result = outcome.result
    history = result.history

    write_text(args.out, serialize(outcome.pipeline))
    trials_path = args.trials_csv or sibling(args.out, ".trials.csv")
    write_text(trials_path, history_to_csv(history, timing=args.timing))

    higher = METRICS[metric][1]
    report = {
        "schema_version": SCHEMA_VERSION,
        "task": task,
        "preset": args.preset,
        "metric": metric,
        "seed": args.seed,
        "workers": args.workers,
        "best_loss": result.best_loss,
        "best_trial": result.best_index,
        "best_config": result.best_config,
        "validation_score": 1.0 - result.best_loss if higher else result.best_loss,
        "trial_counts": {s: sum(t.status == s for t in history) for s in ("OK", "FAILED", "TIMEOUT")},
        "pipeline": outcome.pipeline.describe(),
        "wall_seconds": wall,
        "fit_timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "test_score": None,
    }
    # held-out data is read only now, after the search history is final
    if args.test:
        tdf = read_csv(args.test)
        Xt, yt = split_target(tdf, args.target, task)
        if task == "ts_forecasting":
            lags = outcome.pipeline.lags
            # the first ``lags`` test rows are context for the first forecast
            pred = outcome.pipeline.predict(Xt)
            report["test_score"] = score(metric, Xt[lags:], pred, X if metric == "mase" else None)
        else:
            report["test_score"] = score(metric, yt, outcome.pipeline.predict(Xt))
        report["test_rows"] = int(len(tdf))
    report_path = args.report or sibling(args.out, ".report.json")
    write_text(report_path, json.dumps(report, indent=1, default=_json_default))
    print(f"best {metric}: {report['validation_score']:.6g} (trial {result.best_index}, {report['pipeline']})")
    if report["test_score"] is not None:
        print(f"test {metric}: {report['test_score']:.6g}")
    print(f"wrote {args.out}, {report_path}, {trials_path}")
    return EXIT_OK


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def cmd_predict(args) -> int:
    try:
        text = Path(args.model).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(f"no such model file: {args.model}") from exc
    pipe = deserialize(text)
    df = read_csv(args.data)
    if df.shape[0] == 0:
        write_text(args.out, "prediction\n")
        return EXIT_OK
    if pipe.lags:
        col = args.target or (df.columns[0] if df.shape[1] == 1 else None)
        if col is None or col not in df.columns:
            raise DataError("forecasting input needs --target naming the series column")
        series = pd.to_numeric(df[col], errors="raise").to_numpy(dtype=float)
        pred = np.full(series.size, np.nan)
        if series.size > pipe.lags:
            pred[pipe.lags:] = pipe.predict(series)
    else:
        pred = pipe.predict(df)
    out = pd.DataFrame({"prediction": pred})
    write_text(args.out, to_csv(out))
    print(f"wrote {len(out)} predictions to {args.out}")
    return EXIT_OK


def cmd_trials(args) -> int:
    df = read_csv(args.path)
    if df.empty:
        print("no trials")
        return EXIT_OK
    for col in ("index", "status", "loss"):
        if col not in df.columns:
            raise DataError(f"{args.path} is not a trials file (missing {col!r})")
    counts = df["status"].value_counts().to_dict()
    print(f"{len(df)} trials: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))
    ok = df[df["status"] == "OK"].sort_values(["loss", "index"]).head(args.top)
    cols = [c for c in ok.columns if ok[c].notna().any()]
    with pd.option_context("display.max_columns", None, "display.width", 200):
        print(ok[cols].to_string(index=False))
    return EXIT_OK


def cmd_generate(args) -> int:
    names = list(GENERATORS) if args.name == "all" else [args.name]
    for name in names:
        ds = generate(name, args.seed, args.fast)
        tr, te = ds.write(args.out)
        print(f"{name}: task {ds.task}, target {ds.target!r}, metric {ds.metric}"
              + (f", categorical {','.join(ds.categorical)}" if ds.categorical else "")
              + f" -> {tr}, {te}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if args.suite != "desk":
        raise UsageError(f"unknown suite {args.suite!r}")
    budgets = tuple(sorted(int(b) for b in args.budgets.split(",")))
    if any(b < 1 for b in budgets):
        raise UsageError("budgets must be positive")
    cfg = BenchmarkConfig(tuple(args.generators), budgets, args.seeds, args.fast, args.preset,
                          trial_timeout=args.trial_timeout or None)
    start = time.perf_counter()
    runs, traces, summary = run_benchmark(cfg, progress=lambda m: print(m, flush=True))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "runs.csv", to_csv(runs))
    write_text(out / "trace.csv", to_csv(traces))
    write_text(out / "summary.csv", to_csv(summary))
    checks = check_thresholds(summary, budgets)
    write_text(out / "checks.csv", to_csv(checks))
    meta = {"total_seconds": time.perf_counter() - start, **dataclasses.asdict(cfg)}
    write_text(out / "meta.json", json.dumps(meta, indent=1))
    with pd.option_context("display.width", 200, "display.max_columns", None):
        print(checks.to_string(index=False))
    print(f"total {time.perf_counter() - start:.1f}s; wrote {out}/runs.csv, trace.csv, summary.csv, checks.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qautoml", description="Automated quantum machine learning pipelines.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="search pipelines on a CSV and save the best one")
    f.add_argument("--data", required=True)
    f.add_argument("--target", required=True)
    f.add_argument("--task", required=True, choices=TASKS)
    f.add_argument("--preset", default="all", choices=PRESETS)
    f.add_argument("--metric", choices=tuple(METRICS))
    f.add_argument("--trials", type=int)
    f.add_argument("--budget-seconds", type=float)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--validation-fraction", type=float, default=0.25)
    f.add_argument("--categorical", default="")
    f.add_argument("--sampler", default="tpe", choices=("tpe", "random"))
    f.add_argument("--trial-timeout", type=float,
                   help="seconds per trial (default: budget-seconds/20, none for trial budgets)")
    f.add_argument("--test", help="held-out CSV scored once after the search")
    f.add_argument("--out", default="model.json")
    f.add_argument("--report")
    f.add_argument("--trials-csv")
    f.add_argument("--timing", action="store_true", help="add per-trial seconds to the trials CSV")
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="apply a saved pipeline to a CSV")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--target", help="series column for forecasting models")
    pr.add_argument("--out", default="predictions.csv")
    pr.set_defaults(func=cmd_predict)

    b = sub.add_parser("benchmark", help="run the synthetic desk benchmark")
    b.add_argument("--suite", default="desk")
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--budgets", default="25,100")
    b.add_argument("--generators", nargs="+", default=list(DESK_GENERATORS), choices=DESK_GENERATORS)
    b.add_argument("--preset", choices=PRESETS, help="default: the task's quantum preset")
    b.add_argument("--fast", action="store_true", help="shrink the tiles dataset four-fold")
    b.add_argument("--trial-timeout", type=float, default=10.0, help="seconds per trial; 0 disables")
    b.add_argument("--out", default="benchmark")
    b.set_defaults(func=cmd_benchmark)

    t = sub.add_parser("trials", help="summarize a trials CSV")
    t.add_argument("path")
    t.add_argument("--top", type=int, default=10)
    t.set_defaults(func=cmd_trials)

    g = sub.add_parser("generate", help="write a synthetic dataset as train/test CSVs")
    g.add_argument("name", choices=tuple(GENERATORS) + ("all",))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fast", action="store_true")
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoResultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_RESULT
    except (DataError, PipelineError, PreprocessError, MetricError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
