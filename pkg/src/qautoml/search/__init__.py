from .metrics import (
    METRICS,
    MetricError,
    accuracy,
    balanced_accuracy,
    mae,
    mape,
    mase,
    metric_loss,
    rmse,
    score,
)
from .optimize import (
    Budget,
    NoResultError,
    OptimizationResult,
    TrialRecord,
    best_so_far,
    history_to_csv,
    optimize,
)
from .space import (
    Param,
    SearchSpace,
    SpaceError,
    categorical,
    int_uniform,
    log_uniform,
    sample_random,
    uniform,
)
from .tpe import GAMMA, N_CANDIDATES, N_STARTUP, split_good_bad, tpe_suggest

__all__ = [
    "METRICS",
    "MetricError",
    "accuracy",
    "balanced_accuracy",
    "mae",
    "mape",
    "mase",
    "metric_loss",
    "rmse",
    "score",
    "Budget",
    "NoResultError",
    "OptimizationResult",
    "TrialRecord",
    "best_so_far",
    "history_to_csv",
    "optimize",
    "Param",
    "SearchSpace",
    "SpaceError",
    "categorical",
    "int_uniform",
    "log_uniform",
    "sample_random",
    "uniform",
    "GAMMA",
    "N_CANDIDATES",
    "N_STARTUP",
    "split_good_bad",
    "tpe_suggest",
]
