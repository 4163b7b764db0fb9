"""Desk benchmark: four generators x seeds x trial budgets.

The small budget is not searched separately. With one worker a search is a
deterministic function of its seed, so a 25-trial search is exactly the first
25 trials of the 100-trial search with the same seed. Each budget therefore
reads the best configuration from its prefix of one long history and refits
that configuration. The per-trial wall-clock cap is the one source of timing
dependence: a trial near the cap may time out in one run and not another.
"""
from __future__ import annotations

import io
import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .generators import generate
from .pipeline import PipelineObjective, instantiate
from .pipeline.templates import is_classification
from .search import Budget, best_so_far, optimize, score
from .pipeline.run import check_metric, has_missing, n_features_after_encoding
from .pipeline.templates import default_space

log = logging.getLogger(__name__)

DESK_GENERATORS = ("tiles", "latent", "price", "engine")
DESK_BUDGETS = (25, 100)
DESK_SEEDS = 10
# pass thresholds on the held-out test score: (metric, comparison, value)
DESK_THRESHOLDS = {
    "tiles": ("balanced_accuracy", ">=", 0.70),
    "latent": ("accuracy", ">=", 0.90),
    "price": ("mape", "<=", 0.25),
    "engine": ("mase", "<", 1.0),
}


def quantum_preset(task: str) -> str:
    return "quantum_classification" if is_classification(task) else "quantum_regression"


@dataclass
class BenchmarkConfig:
    generators: tuple = DESK_GENERATORS
    budgets: tuple = DESK_BUDGETS
    seeds: int = DESK_SEEDS
    fast: bool = True
    preset: str | None = None  # None: the task's quantum preset
    validation_fraction: float = 0.25
    # wall-clock cap per trial; a slow QNN trial is recorded as TIMEOUT
    trial_timeout: float | None = 10.0


def run_one(name: str, seed: int, cfg: BenchmarkConfig):
    """Search one generator/seed at the largest budget; score every budget prefix."""
    ds = generate(name, seed, cfg.fast)
    metric = check_metric(ds.task, ds.metric)
    preset = cfg.preset or quantum_preset(ds.task)
    X_train = ds.features("train")
    y_train = None if ds.task == "ts_forecasting" else ds.targets("train")
    d = None if ds.task == "ts_forecasting" else n_features_after_encoding(X_train, ds.categorical)
    space = default_space(ds.task, preset, d, has_missing(X_train))
    objective = PipelineObjective(ds.task, X_train, y_train, metric, ds.categorical, seed, cfg.validation_fraction)
    start = time.perf_counter()
    result = optimize(space, objective, Budget(max_trials=max(cfg.budgets)), seed, trial_timeout=cfg.trial_timeout)
    search_seconds = time.perf_counter() - start
    losses = [t.loss for t in result.history]
    trace = best_so_far(losses)
    rows = []
    for b in sorted(cfg.budgets):
        prefix = [t for t in result.history[:b] if t.status == "OK"]
        if not prefix:
            rows.append({"task": name, "budget": b, "seed": seed, "metric": metric, "status": "NO_RESULT"})
            continue
        best = min(prefix, key=lambda t: (t.loss, t.index))
        # the test split is only touched after the history is final
        pipe = instantiate(best.config, ds.task, ds.categorical, seed, metric).fit(X_train, y_train)
        pred = pipe.predict(ds.features("test"))
        y_scale = ds.targets("train") if metric == "mase" else None
        test = score(metric, ds.targets("test"), pred, y_scale)
        rows.append(
            {
                "task": name,
                "budget": b,
                "seed": seed,
                "metric": metric,
                "status": "OK",
                "val_loss": best.loss,
                "test_score": test,
                "best_trial": best.index,
                "model": best.config["model"],
                "n_ok": sum(t.status == "OK" for t in result.history[:b]),
                "n_failed": sum(t.status == "FAILED" for t in result.history[:b]),
                "n_timeout": sum(t.status == "TIMEOUT" for t in result.history[:b]),
                "search_seconds": search_seconds * min(b, len(losses)) / len(losses),
            }
        )
    trace_rows = [
        {"task": name, "seed": seed, "trial": i, "loss": l, "best_so_far": bsf}
        for i, (l, bsf) in enumerate(zip(losses, trace))
    ]
    return rows, trace_rows


def box_stats(values) -> dict:
    """Median, quartiles and 1.5 IQR whiskers clipped to the data, as a box plot draws them."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo = v[v >= q1 - 1.5 * iqr].min()
    hi = v[v <= q3 + 1.5 * iqr].max()
    return {"median": med, "q1": q1, "q3": q3, "whisker_lo": lo, "whisker_hi": hi}


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    out = []
    ok = runs[runs["status"] == "OK"]
    for (task, budget), g in ok.groupby(["task", "budget"], sort=True):
        for col in ("val_loss", "test_score"):
            out.append({"task": task, "budget": budget, "metric": g["metric"].iloc[0], "quantity": col,
                        "n": len(g), **box_stats(g[col])})
    return pd.DataFrame(out)


def check_thresholds(summary: pd.DataFrame, budgets=DESK_BUDGETS) -> pd.DataFrame:
    """Per task: test-score median against its threshold, and the large-vs-small budget trend."""
    rows = []
    s = summary.set_index(["task", "budget", "quantity"])
    small, large = min(budgets), max(budgets)
    for task, (metric, op, value) in DESK_THRESHOLDS.items():
        if (task, large, "test_score") not in s.index:
            continue
        med = float(s.loc[(task, large, "test_score"), "median"])
        passed = {">=": med >= value, "<=": med <= value, "<": med < value}[op]
        v_small = float(s.loc[(task, small, "val_loss"), "median"])
        v_large = float(s.loc[(task, large, "val_loss"), "median"])
        rows.append({"task": task, "metric": metric, "threshold": f"{op} {value}", "median_test": med,
                     "threshold_pass": passed, f"median_val_{small}": v_small,
                     f"median_val_{large}": v_large, "trend_pass": v_large <= v_small})
    return pd.DataFrame(rows)


def run_benchmark(cfg: BenchmarkConfig, progress=None):
    runs, traces = [], []
    for name in cfg.generators:
        for seed in range(cfg.seeds):
            t = time.perf_counter()
            r, tr = run_one(name, seed, cfg)
            runs += r
            traces += tr
            if progress is not None:
                progress(f"{name} seed {seed}: {time.perf_counter() - t:.1f}s")
    runs = pd.DataFrame(runs)
    return runs, pd.DataFrame(traces), summarize(runs)


def to_csv(df: pd.DataFrame) -> str:
    buf = io.StringIO()
    df.to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()
