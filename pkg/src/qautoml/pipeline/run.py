"""Search over pipeline configurations and refit the winner on all data."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..search import Budget, OptimizationResult, metric_loss, optimize
from ..search.metrics import CLASSIFICATION_METRICS, METRICS, REGRESSION_METRICS, MetricError
from ..search.space import SearchSpace
from .core import Pipeline, PipelineError, instantiate
from .templates import DEFAULT_METRIC, FORECAST_LAGS, default_space, is_classification, normalize_task

log = logging.getLogger(__name__)


def check_metric(task: str, metric: str | None) -> str:
    task = normalize_task(task)
    metric = metric or DEFAULT_METRIC[task]
    if metric not in METRICS:
        raise MetricError(f"unknown metric {metric!r}")
    allowed = CLASSIFICATION_METRICS if is_classification(task) else REGRESSION_METRICS
    if metric not in allowed:
        raise MetricError(f"metric {metric} does not apply to task {task}")
    if metric == "mase" and task != "ts_forecasting":
        raise MetricError("mase is only defined for forecasting")
    return metric


def holdout_indices(y, task: str, fraction: float = 0.25, seed: int = 0):
    """Train/validation row indices.

    Classification splits are stratified (every class with at least two rows
    lands on both sides); tabular regression is a random split; forecasting
    keeps temporal order and validates on the tail.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"validation fraction must be in (0, 1), got {fraction}")
    n = len(y)
    task = normalize_task(task)
    if task == "ts_forecasting":
        n_val = max(1, int(round(n * fraction)))
        return np.arange(n - n_val), np.arange(n - n_val, n)
    rng = np.random.default_rng(seed)
    if not is_classification(task):
        perm = rng.permutation(n)
        n_val = max(1, int(round(n * fraction)))
        return np.sort(perm[n_val:]), np.sort(perm[:n_val])
    y = np.asarray(y)
    train, val = [], []
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        k = int(round(len(idx) * fraction))
        if len(idx) >= 2:
            k = min(max(k, 1), len(idx) - 1)
        else:
            k = 0
        val.append(idx[:k])
        train.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def _rows(X, idx):
    if isinstance(X, pd.DataFrame):
        return X.iloc[idx].reset_index(drop=True)
    return np.asarray(X)[idx]


class PipelineObjective:
    """Validation loss of a configuration. Picklable, so it can run in worker processes."""

    def __init__(self, task, X, y, metric=None, categorical=(), seed=0, validation_fraction=0.25):
        self.task = normalize_task(task)
        self.metric = check_metric(self.task, metric)
        self.categorical = tuple(categorical)
        self.seed = seed
        if self.task == "ts_forecasting":
            series = np.asarray(X if y is None else y, dtype=float).ravel()
            tr, va = holdout_indices(series, self.task, validation_fraction, seed)
            if len(tr) < FORECAST_LAGS + 2:
                raise PipelineError("series too short for a forecasting holdout")
            self.fit_X, self.fit_y = series[tr], None
            # the validation input carries the preceding lags so every tail point gets a forecast
            self.val_X = series[tr[-1] - FORECAST_LAGS + 1:]
            self.val_y = series[va]
            self.scale_y = series[tr]
        else:
            tr, va = holdout_indices(y, self.task, validation_fraction, seed)
            if len(va) == 0:
                raise PipelineError("validation split is empty")
            y = np.asarray(y)
            self.fit_X, self.fit_y = _rows(X, tr), y[tr]
            self.val_X, self.val_y = _rows(X, va), y[va]
            self.scale_y = self.fit_y

    def build(self, config) -> Pipeline:
        return instantiate(config, self.task, self.categorical, self.seed, self.metric)

    def __call__(self, config) -> float:
        pipe = self.build(config).fit(self.fit_X, self.fit_y)
        pred = pipe.predict(self.val_X)
        y_train = self.scale_y if self.metric == "mase" else None
        return metric_loss(self.metric, self.val_y, pred, y_train)


@dataclass
class SearchOutcome:
    pipeline: Pipeline
    result: OptimizationResult
    space: SearchSpace
    metric: str


def n_features_after_encoding(X, categorical=()) -> int:
    if not isinstance(X, pd.DataFrame):
        return np.asarray(X).reshape(len(X), -1).shape[1]
    width = X.shape[1] - len(categorical)
    for c in categorical:
        width += min(X[c].dropna().nunique(), 64)
    return width


def has_missing(X) -> bool:
    if isinstance(X, pd.DataFrame):
        return bool(X.isna().to_numpy().any())
    return bool(np.isnan(np.asarray(X, dtype=float)).any())


def search(
    task,
    X,
    y=None,
    preset="all",
    metric=None,
    budget: Budget | None = None,
    seed=0,
    workers=1,
    validation_fraction=0.25,
    categorical=(),
    sampler="tpe",
    trial_timeout=None,
    space: SearchSpace | None = None,
    callback=None,
) -> SearchOutcome:
    """Run the configuration search and refit the best pipeline on all of ``X``."""
    task = normalize_task(task)
    metric = check_metric(task, metric)
    budget = budget or Budget(max_trials=25)
    if space is None:
        d = None if task == "ts_forecasting" else n_features_after_encoding(X, categorical)
        space = default_space(task, preset, d, has_missing(X))
    objective = PipelineObjective(task, X, y, metric, categorical, seed, validation_fraction)
    result = optimize(space, objective, budget, seed, workers, trial_timeout, sampler, callback)
    final = instantiate(result.best_config, task, categorical, seed, metric)
    final.fit(X, y)
    log.info("best trial %d loss %.6g", result.best_index, result.best_loss)
    return SearchOutcome(final, result, space, metric)
