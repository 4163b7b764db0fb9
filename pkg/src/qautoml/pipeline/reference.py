"""Fixed reference configurations, expressed in the search-space vocabulary.

``WINNING`` holds one strong pipeline per use case; ``HANDCRAFTED`` holds
manually designed baselines. Hyperparameters not pinned by the design (C,
regularization, outer-kernel scales, PCA width where absent) use moderate
defaults.
"""
from __future__ import annotations

from .core import instantiate


def _enc(model, family, qubits, layers, bandwidth=1.0):
    p = f"m.{model}"
    return {
        f"{p}.enc.family": family,
        f"{p}.enc.n_qubits": qubits,
        f"{p}.enc.n_layers": layers,
        f"{p}.enc.bandwidth": bandwidth,
    }


WINNING = {
    "ts_classification": {
        "prep.pca": "on",
        "prep.pca.k": 8,
        "prep.scaler": "MINMAX_SYM",
        "model": "qsvc",
        "m.qsvc.kernel": "FQK",
        **_enc("qsvc", "HW_EFFICIENT", 8, 1),
        "m.qsvc.C": 10.0,
    },
    "tabular_classification": {
        "prep.pca": "on",
        "prep.pca.k": 8,
        "prep.scaler": "STANDARDIZE",
        "model": "qsvc",
        "m.qsvc.kernel": "PQK",
        **_enc("qsvc", "MULTI_CONTROL", 8, 2, 0.5),
        "m.qsvc.pqk.paulis": "XZ",
        "m.qsvc.pqk.outer": "MATERN",
        "m.qsvc.pqk.nu": 1.5,
        "m.qsvc.pqk.length_scale": 1.0,
        "m.qsvc.C": 10.0,
    },
    "tabular_regression": {
        "prep.scaler": "MINMAX_SYM",
        "model": "qkrr",
        "m.qkrr.kernel": "PQK",
        **_enc("qkrr", "MULTI_CONTROL", 8, 3, 0.5),
        "m.qkrr.pqk.paulis": "XYZ",
        "m.qkrr.pqk.outer": "DOT_PRODUCT",
        "m.qkrr.pqk.sigma0": 1.0,
        "m.qkrr.alpha": 1e-2,
    },
    "ts_forecasting": {
        "prep.scaler": "MINMAX_SYM",
        "model": "qgpr",
        "m.qgpr.kernel": "PQK",
        **_enc("qgpr", "YZ_CX", 8, 3, 0.5),
        "m.qgpr.pqk.paulis": "XY",
        "m.qgpr.pqk.outer": "PAIRWISE_LINEAR",
        "m.qgpr.noise": 1e-3,
    },
}

HANDCRAFTED = {
    "ts_classification": {
        "prep.pca": "on",
        "prep.pca.k": 5,
        "prep.scaler": "MINMAX_SYM",
        "model": "qsvc",
        "m.qsvc.kernel": "PQK",
        **_enc("qsvc", "HW_EFFICIENT", 5, 6, 0.5),
        "m.qsvc.pqk.paulis": "XYZ",
        "m.qsvc.pqk.outer": "GAUSSIAN",
        "m.qsvc.pqk.gamma": 1.0,
        "m.qsvc.C": 10.0,
    },
    "tabular_classification": {
        "prep.scaler": "STANDARDIZE",
        "model": "qnn",
        **_enc("qnn", "HW_EFFICIENT", 8, 2, 0.5),
        "m.qnn.observable": "ISING",
        "m.qnn.epochs": 20,
        "m.qnn.learning_rate": 0.05,
    },
    "tabular_regression": {
        "prep.scaler": "MINMAX_SYM",
        "model": "qsvr",
        "m.qsvr.kernel": "FQK",
        **_enc("qsvr", "YZ_CX", 15, 1, 0.5),
        "m.qsvr.C": 10.0,
        "m.qsvr.epsilon": 0.05,
    },
    "ts_forecasting": {
        "prep.scaler": "MINMAX_SYM",
        "model": "qrc",
        **_enc("qrc", "YZ_CX", 4, 2, 1.0),
        "m.qrc.n_observables": 54,
        "m.qrc.alpha": 1e-6,
    },
}


def reference_pipeline(task: str, kind: str = "winning", categorical=(), seed: int = 0):
    table = {"winning": WINNING, "handcrafted": HANDCRAFTED}[kind]
    return instantiate(table[task], task, categorical, seed)
