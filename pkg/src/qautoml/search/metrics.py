"""Scoring metrics and their conversion to minimization losses."""
from __future__ import annotations

import numpy as np


class MetricError(ValueError):
    pass


def _pair(y, y_pred):
    y = np.asarray(y)
    y_pred = np.asarray(y_pred)
    if y.shape[0] != y_pred.shape[0]:
        raise MetricError(f"length mismatch: {y.shape[0]} vs {y_pred.shape[0]}")
    if y.shape[0] == 0:
        raise MetricError("empty inputs")
    return y, y_pred


def accuracy(y, y_pred) -> float:
    y, y_pred = _pair(y, y_pred)
    return float(np.mean(y == y_pred))


def balanced_accuracy(y, y_pred) -> float:
    """Unweighted mean of per-class recall over the classes present in ``y``."""
    y, y_pred = _pair(y, y_pred)
    recalls = [np.mean(y_pred[y == c] == c) for c in np.unique(y)]
    return float(np.mean(recalls))


def mae(y, y_pred) -> float:
    y, y_pred = _pair(y, y_pred)
    return float(np.mean(np.abs(y.astype(float) - y_pred.astype(float))))


def rmse(y, y_pred) -> float:
    y, y_pred = _pair(y, y_pred)
    return float(np.sqrt(np.mean((y.astype(float) - y_pred.astype(float)) ** 2)))


def mape(y, y_pred, return_excluded: bool = False):
    """Mean absolute percentage error as a fraction; zero targets are skipped."""
    y, y_pred = _pair(y, y_pred)
    y = y.astype(float)
    keep = y != 0
    if not keep.any():
        raise MetricError("MAPE undefined: every target is zero")
    value = float(np.mean(np.abs((y[keep] - y_pred[keep]) / y[keep])))
    if return_excluded:
        return value, int(np.sum(~keep))
    return value


def naive_scale(y_train) -> float:
    y_train = np.asarray(y_train, dtype=float).ravel()
    if y_train.size < 2:
        raise MetricError("MASE needs at least two training values")
    scale = float(np.mean(np.abs(np.diff(y_train))))
    if not scale > 0:
        raise MetricError("MASE undefined: constant training series")
    return scale


def mase(y, y_pred, y_train) -> float:
    """MAE divided by the in-sample MAE of the one-step naive forecast."""
    return mae(y, y_pred) / naive_scale(y_train)


# name -> (function, higher_is_better, needs_y_train)
METRICS = {
    "accuracy": (accuracy, True, False),
    "balanced_accuracy": (balanced_accuracy, True, False),
    "mape": (mape, False, False),
    "mase": (mase, False, True),
    "mae": (mae, False, False),
    "rmse": (rmse, False, False),
}
CLASSIFICATION_METRICS = ("accuracy", "balanced_accuracy")
REGRESSION_METRICS = ("mape", "mase", "mae", "rmse")


def score(name: str, y, y_pred, y_train=None) -> float:
    try:
        fn, _, needs_train = METRICS[name]
    except KeyError:
        raise MetricError(f"unknown metric {name!r}") from None
    if needs_train:
        if y_train is None:
            raise MetricError(f"{name} needs the training targets")
        return fn(y, y_pred, y_train)
    return fn(y, y_pred)


def metric_loss(name: str, y, y_pred, y_train=None) -> float:
    """Score mapped to a loss: ``1 - score`` for accuracy-type metrics, the raw error otherwise."""
    value = score(name, y, y_pred, y_train)
    return 1.0 - value if METRICS[name][1] else value
