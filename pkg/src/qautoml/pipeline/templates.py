"""Task templates, presets, and the default conditional search space.

Parameter ids are dotted paths. Preprocessing lives under ``clean.*`` and
``prep.*``; the predictor choice is ``model`` and every model's own
hyperparameters live under ``m.<model>.*`` so they are only active when that
model is chosen.
"""
from __future__ import annotations

import itertools
import math

from ..encoding import FAMILIES
from ..search.space import SearchSpace, categorical, int_uniform, log_uniform, uniform

TASKS = ("tabular_classification", "tabular_regression", "ts_classification", "ts_forecasting")
CLASSIFICATION_TASKS = ("tabular_classification", "ts_classification")
FORECAST_LAGS = 4

QUANTUM_CLASSIFIERS = ("qsvc", "qnn", "qrc")
QUANTUM_REGRESSORS = ("qkrr", "qgpr", "qsvr", "qnn", "qrc")
CLASSICAL_CLASSIFIERS = ("svc_rbf",)
CLASSICAL_REGRESSORS = ("krr_rbf", "gpr_rbf", "svr_rbf")

PRESETS = (
    "quantum_classification",
    "quantum_regression",
    "classical_classification",
    "classical_regression",
    "all",
)

DEFAULT_METRIC = {
    "tabular_classification": "accuracy",
    "ts_classification": "balanced_accuracy",
    "tabular_regression": "mape",
    "ts_forecasting": "mase",
}

PAULI_SUBSETS = tuple("".join(c) for r in (1, 2, 3) for c in itertools.combinations("XYZ", r))
OUTER_KERNELS = ("GAUSSIAN", "MATERN", "DOT_PRODUCT", "PAIRWISE_LINEAR")

# QNN training cost grows with qubits * layers * rows * epochs; its ranges are
# kept below the kernel models' so a single trial stays cheap
QNN_MAX_QUBITS = 6
QNN_MAX_LAYERS = 3
QNN_EPOCHS = (20, 50, 100)


class TemplateError(ValueError):
    pass


def normalize_task(task: str) -> str:
    t = str(task).lower()
    if t not in TASKS:
        raise TemplateError(f"unknown task {task!r}; expected one of {TASKS}")
    return t


def is_classification(task: str) -> bool:
    return normalize_task(task) in CLASSIFICATION_TASKS


def preset_models(task: str, preset: str) -> tuple[str, ...]:
    task = normalize_task(task)
    if preset not in PRESETS:
        raise TemplateError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    clf = is_classification(task)
    if preset == "quantum_classification":
        if not clf:
            raise TemplateError(f"preset {preset} is incompatible with task {task}")
        return QUANTUM_CLASSIFIERS
    if preset == "classical_classification":
        if not clf:
            raise TemplateError(f"preset {preset} is incompatible with task {task}")
        return CLASSICAL_CLASSIFIERS
    if preset == "quantum_regression":
        if clf:
            raise TemplateError(f"preset {preset} is incompatible with task {task}")
        return QUANTUM_REGRESSORS
    if preset == "classical_regression":
        if clf:
            raise TemplateError(f"preset {preset} is incompatible with task {task}")
        return CLASSICAL_REGRESSORS
    return QUANTUM_CLASSIFIERS + CLASSICAL_CLASSIFIERS if clf else QUANTUM_REGRESSORS + CLASSICAL_REGRESSORS


def _encoding_params(prefix, when, max_qubits=10, max_layers=4):
    return [
        categorical(f"{prefix}.enc.family", FAMILIES, when),
        int_uniform(f"{prefix}.enc.n_qubits", 2, max_qubits, when),
        int_uniform(f"{prefix}.enc.n_layers", 1, max_layers, when),
        log_uniform(f"{prefix}.enc.bandwidth", 0.1, 2 * math.pi, when),
    ]


def _kernel_params(prefix, when):
    kid = f"{prefix}.kernel"
    pqk = (kid, ("PQK",))
    oid = f"{prefix}.pqk.outer"
    return [
        categorical(kid, ("FQK", "PQK"), when),
        *_encoding_params(prefix, when),
        categorical(f"{prefix}.pqk.paulis", PAULI_SUBSETS, pqk),
        categorical(oid, OUTER_KERNELS, pqk),
        log_uniform(f"{prefix}.pqk.gamma", 1e-2, 10.0, (oid, ("GAUSSIAN",))),
        categorical(f"{prefix}.pqk.nu", (0.5, 1.5, 2.5), (oid, ("MATERN",))),
        log_uniform(f"{prefix}.pqk.length_scale", 0.1, 10.0, (oid, ("MATERN",))),
        uniform(f"{prefix}.pqk.sigma0", 0.0, 2.0, (oid, ("DOT_PRODUCT",))),
    ]


def _model_params(model):
    p = f"m.{model}"
    when = ("model", (model,))
    if model == "qsvc":
        return _kernel_params(p, when) + [log_uniform(f"{p}.C", 1e-2, 1e3, when)]
    if model == "qsvr":
        return _kernel_params(p, when) + [
            log_uniform(f"{p}.C", 1e-2, 1e3, when),
            log_uniform(f"{p}.epsilon", 1e-4, 1.0, when),
        ]
    if model == "qkrr":
        return _kernel_params(p, when) + [log_uniform(f"{p}.alpha", 1e-8, 1.0, when)]
    if model == "qgpr":
        return _kernel_params(p, when) + [log_uniform(f"{p}.noise", 1e-8, 1e-1, when)]
    if model == "qnn":
        oid = f"{p}.observable"
        return _encoding_params(p, when, QNN_MAX_QUBITS, QNN_MAX_LAYERS) + [
            categorical(oid, ("PAULI_SUM", "ISING"), when),
            categorical(f"{p}.paulis", PAULI_SUBSETS, (oid, ("PAULI_SUM",))),
            categorical(f"{p}.epochs", QNN_EPOCHS, when),
            log_uniform(f"{p}.learning_rate", 5e-3, 0.2, when),
        ]
    if model == "qrc":
        return _encoding_params(p, when) + [
            int_uniform(f"{p}.n_observables", 4, 64, when),
            log_uniform(f"{p}.alpha", 1e-8, 1.0, when),
        ]
    gamma = log_uniform(f"{p}.gamma", 1e-3, 1e2, when)
    if model == "svc_rbf":
        return [gamma, log_uniform(f"{p}.C", 1e-2, 1e3, when)]
    if model == "svr_rbf":
        return [gamma, log_uniform(f"{p}.C", 1e-2, 1e3, when), log_uniform(f"{p}.epsilon", 1e-4, 1.0, when)]
    if model == "krr_rbf":
        return [gamma, log_uniform(f"{p}.alpha", 1e-8, 1.0, when)]
    if model == "gpr_rbf":
        return [gamma, log_uniform(f"{p}.noise", 1e-8, 1e-1, when)]
    raise TemplateError(f"unknown model {model!r}")


def default_space(task: str, preset: str = "all", n_features: int | None = None, has_missing: bool = False) -> SearchSpace:
    """Search space for a task template restricted to a preset's model pool.

    ``n_features`` is the feature count after one-hot encoding (or the lag
    count for forecasting); it bounds the PCA component range.
    """
    task = normalize_task(task)
    models = preset_models(task, preset)
    d = FORECAST_LAGS if task == "ts_forecasting" else n_features
    params = []
    if has_missing:
        params.append(categorical("clean.impute", ("mean", "median")))
    params += [
        categorical("clean.outlier", ("off", "on")),
        categorical("clean.outlier.k", (1.5, 3.0), ("clean.outlier", ("on",))),
        categorical("prep.downsample", (1.0, 0.5, 0.25)),
    ]
    if d is None or d > 2:
        top = 10 if d is None else min(d, 10)
        params += [
            categorical("prep.pca", ("off", "on")),
            int_uniform("prep.pca.k", 2, top, ("prep.pca", ("on",))),
        ]
    params.append(categorical("prep.scaler", ("MINMAX_SYM", "STANDARDIZE")))
    params.append(categorical("model", models))
    for m in models:
        params += _model_params(m)
    return SearchSpace(params)
