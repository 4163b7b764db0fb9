"""Concrete pipelines: instantiate a configuration, fit, predict, serialize.

Fit order is fixed: [sliding window] -> impute -> one-hot -> outlier removal
-> downsample -> PCA -> scaler -> predictor. Regression targets are
standardized before the predictor sees them and mapped back on predict.
"""
from __future__ import annotations

import json
import math

import numpy as np
import pandas as pd

from ..encoding import EncodingCircuitSpec
from ..estimators import QGPR, QKRR, QNN, QRC, QSVC, QSVR, estimator_from_dict
from ..estimators.base import NotFittedError
from ..preprocess import (
    PCA,
    Downsample,
    Impute,
    MinMaxSym,
    OneHot,
    OutlierIQR,
    PreprocessError,
    Standardize,
    sliding_window,
    transform_from_dict,
)
from ..qkernels import KernelSpec, OuterKernelSpec, RBFKernel
from .templates import FORECAST_LAGS, is_classification, normalize_task

SCHEMA_VERSION = 1
QUBIT_ORDERING = "little-endian: qubit 0 is the least-significant bit of the amplitude index"
SCALER_KINDS = ("MINMAX_SYM", "STANDARDIZE")
_CLEANING = ("IMPUTE", "ONE_HOT", "OUTLIER_IQR")


class PipelineError(ValueError):
    pass


class SchemaError(PipelineError):
    pass


# ---------------------------------------------------------------------------
# configuration -> objects


def _encoding(config, prefix, trainable=False) -> EncodingCircuitSpec:
    return EncodingCircuitSpec(
        family=config[f"{prefix}.enc.family"],
        n_qubits=int(config[f"{prefix}.enc.n_qubits"]),
        n_layers=int(config[f"{prefix}.enc.n_layers"]),
        bandwidth=float(config[f"{prefix}.enc.bandwidth"]),
        trainable=trainable,
    )


def _kernel(config, prefix) -> KernelSpec:
    enc = _encoding(config, prefix)
    if config[f"{prefix}.kernel"] == "FQK":
        return KernelSpec("FQK", enc)
    outer_kind = config[f"{prefix}.pqk.outer"]
    kw = {}
    if outer_kind == "GAUSSIAN":
        kw["gamma"] = float(config[f"{prefix}.pqk.gamma"])
    elif outer_kind == "MATERN":
        kw["nu"] = float(config[f"{prefix}.pqk.nu"])
        kw["length_scale"] = float(config[f"{prefix}.pqk.length_scale"])
    elif outer_kind == "DOT_PRODUCT":
        kw["sigma0"] = float(config[f"{prefix}.pqk.sigma0"])
    return KernelSpec("PQK", enc, tuple(config[f"{prefix}.pqk.paulis"]), OuterKernelSpec(outer_kind, **kw))


def build_predictor(config: dict, task: str, seed: int = 0):
    model = config["model"]
    p = f"m.{model}"
    kind = "classification" if is_classification(task) else "regression"
    if model == "qsvc":
        return QSVC(_kernel(config, p), config[f"{p}.C"])
    if model == "qsvr":
        return QSVR(_kernel(config, p), config[f"{p}.C"], config[f"{p}.epsilon"])
    if model == "qkrr":
        return QKRR(_kernel(config, p), config[f"{p}.alpha"])
    if model == "qgpr":
        return QGPR(_kernel(config, p), config[f"{p}.noise"])
    if model == "qnn":
        obs = config[f"{p}.observable"]
        paulis = tuple(config[f"{p}.paulis"]) if obs == "PAULI_SUM" else ("Z",)
        return QNN(
            _encoding(config, p, trainable=True),
            obs,
            paulis,
            kind,
            int(config[f"{p}.epochs"]),
            float(config[f"{p}.learning_rate"]),
            seed,
        )
    if model == "qrc":
        return QRC(_encoding(config, p, trainable=True), int(config[f"{p}.n_observables"]), config[f"{p}.alpha"], seed, kind)
    if model.endswith("_rbf"):
        kernel = RBFKernel(float(config[f"{p}.gamma"]))
        base = model[: -len("_rbf")]
        if base == "svc":
            return QSVC(kernel, config[f"{p}.C"])
        if base == "svr":
            return QSVR(kernel, config[f"{p}.C"], config[f"{p}.epsilon"])
        if base == "krr":
            return QKRR(kernel, config[f"{p}.alpha"])
        if base == "gpr":
            return QGPR(kernel, config[f"{p}.noise"])
    raise PipelineError(f"unknown model {model!r}")


def build_steps(config: dict, categorical=(), seed: int = 0) -> list:
    steps = []
    if "clean.impute" in config or categorical:
        steps.append(Impute(config.get("clean.impute", "mean"), categorical))
    if categorical:
        steps.append(OneHot(categorical))
    if config.get("clean.outlier") == "on":
        steps.append(OutlierIQR(float(config.get("clean.outlier.k", 3.0))))
    ratio = float(config.get("prep.downsample", 1.0))
    if ratio < 1.0:
        steps.append(Downsample(ratio, seed))
    if config.get("prep.pca") == "on":
        steps.append(PCA(int(config["prep.pca.k"])))
    scaler = config.get("prep.scaler", "MINMAX_SYM")
    if scaler not in SCALER_KINDS:
        raise PipelineError(f"unknown scaler {scaler!r}")
    steps.append(MinMaxSym() if scaler == "MINMAX_SYM" else Standardize())
    return steps


def instantiate(config: dict, task: str, categorical=(), seed: int = 0, metric: str | None = None) -> "Pipeline":
    task = normalize_task(task)
    config = dict(config)
    return Pipeline(task, config, build_steps(config, tuple(categorical), seed), build_predictor(config, task, seed),
                    categorical=tuple(categorical), seed=seed, metric=metric)


# ---------------------------------------------------------------------------


class Pipeline:
    def __init__(self, task, config, steps, predictor, categorical=(), seed=0, metric=None):
        self.task = normalize_task(task)
        self.config = config
        self.steps = list(steps)
        self.predictor = predictor
        self.categorical = tuple(categorical)
        self.seed = seed
        self.metric = metric
        self.lags = FORECAST_LAGS if self.task == "ts_forecasting" else None
        self.columns = None
        self.target_mean = None
        self.target_scale = None
        self.fitted = False
        self._check_order()

    def _check_order(self):
        kinds = [s.kind for s in self.steps]
        if not kinds or kinds[-1] not in SCALER_KINDS:
            raise PipelineError(f"pipeline must end its preprocessing with a scaler, got {kinds}")
        seen_prep = False
        for k in kinds:
            if k in _CLEANING and seen_prep:
                raise PipelineError(f"cleaning step {k} after preprocessing in {kinds}")
            if k not in _CLEANING:
                seen_prep = True

    @property
    def is_classifier(self) -> bool:
        return is_classification(self.task)

    def describe(self) -> list[str]:
        names = ([f"SLIDING_WINDOW({self.lags})"] if self.lags else []) + [s.kind for s in self.steps]
        model = str(self.config.get("model", self.predictor.name)).upper()
        kernel = self.config.get(f"m.{self.config.get('model')}.kernel")
        return names + [f"{model}({kernel})" if kernel else model]

    # -- input handling
    def _frame(self, X, fitting):
        if isinstance(X, pd.DataFrame):
            df = X.copy()
            df.columns = [str(c) for c in df.columns]
        else:
            arr = np.asarray(X)
            if arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            df = pd.DataFrame(arr, columns=[f"x{i}" for i in range(arr.shape[1])])
        if fitting:
            self.columns = list(df.columns)
            return df
        missing = [c for c in self.columns if c not in df.columns]
        if missing:
            if not isinstance(X, pd.DataFrame) and df.shape[1] == len(self.columns):
                df.columns = self.columns
            else:
                raise SchemaError(f"input is missing columns {missing}")
        return df[self.columns]

    def _series(self, X):
        s = np.asarray(X.to_numpy() if isinstance(X, (pd.DataFrame, pd.Series)) else X, dtype=float)
        if s.ndim == 2:
            if s.shape[1] != 1:
                raise SchemaError("forecasting pipelines take a single series column")
            s = s[:, 0]
        return s

    def _numeric(self, df) -> np.ndarray:
        try:
            M = df.to_numpy(dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"non-numeric values reached numeric steps: {exc}") from exc
        if np.isnan(M).any():
            raise SchemaError("missing values reached numeric steps (enable imputation)")
        return M

    # -- fit / predict
    def fit(self, X, y=None) -> "Pipeline":
        if self.lags:
            series = self._series(X if y is None else y)
            Xw, yw = sliding_window(series, self.lags)
            self.columns = [f"lag{k}" for k in range(self.lags, 0, -1)]
            data, y = pd.DataFrame(Xw, columns=self.columns), yw
        else:
            if y is None:
                raise PipelineError("targets are required to fit")
            data = self._frame(X, fitting=True)
            y = np.asarray(y)
            if y.shape[0] != data.shape[0]:
                raise PipelineError(f"{data.shape[0]} rows but {y.shape[0]} targets")
        if self.is_classifier and np.unique(y).size < 2:
            raise PipelineError("training targets contain a single class")
        for step in self.steps:
            if step.kind in ("IMPUTE", "ONE_HOT"):
                data = step.fit_transform(data)
                continue
            if isinstance(data, pd.DataFrame):
                data = self._numeric(data)
            step.fit(data, y)
            data = step.transform(data)
            if step.drops_rows:
                mask = step.row_mask_
                data, y = data[mask], y[mask]
                if data.shape[0] < 2:
                    raise PipelineError(f"{step.kind} left fewer than two training rows")
        if isinstance(data, pd.DataFrame):
            data = self._numeric(data)
        if self.is_classifier:
            if np.unique(y).size < 2:
                raise PipelineError("training targets contain a single class")
            self.target_mean, self.target_scale = None, None
            self.predictor.fit(data, y)
        else:
            y = y.astype(float)
            self.target_mean = float(np.mean(y))
            sd = float(np.std(y))
            self.target_scale = sd if sd > 0 else 1.0
            self.predictor.fit(data, (y - self.target_mean) / self.target_scale)
        self.fitted = True
        return self

    def transform_features(self, X) -> np.ndarray:
        if not self.fitted:
            raise NotFittedError("pipeline is not fitted")
        if self.lags:
            Xw, _ = sliding_window(self._series(X), self.lags)
            data = pd.DataFrame(Xw, columns=self.columns)
        else:
            data = self._frame(X, fitting=False)
        for step in self.steps:
            if isinstance(data, pd.DataFrame) and step.kind not in ("IMPUTE", "ONE_HOT"):
                data = self._numeric(data)
            data = step.transform(data)
        if isinstance(data, pd.DataFrame):
            data = self._numeric(data)
        return data

    def predict(self, X) -> np.ndarray:
        """Predictions per input row; forecasting returns one value per position
        after the first ``lags`` entries of the given series."""
        if not self.fitted:
            raise NotFittedError("pipeline is not fitted")
        features = self.transform_features(X)
        if features.shape[0] == 0:
            return np.array([])
        out = self.predictor.predict(features)
        if self.is_classifier:
            return out
        return np.asarray(out, dtype=float) * self.target_scale + self.target_mean

    # -- serialization
    def to_dict(self) -> dict:
        if not self.fitted:
            raise NotFittedError("only fitted pipelines can be serialized")
        return {
            "schema_version": SCHEMA_VERSION,
            "qubit_ordering": QUBIT_ORDERING,
            "task": self.task,
            "metric": self.metric,
            "seed": self.seed,
            "config": self.config,
            "input": {"columns": self.columns, "categorical": list(self.categorical), "lags": self.lags},
            "steps": [s.to_dict() for s in self.steps],
            "target": None
            if self.is_classifier
            else {"mean": self.target_mean, "scale": self.target_scale},
            "predictor": self.predictor.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pipeline":
        if not isinstance(d, dict) or "schema_version" not in d:
            raise SchemaError("not a pipeline document")
        if d["schema_version"] != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema version {d['schema_version']!r}")
        try:
            steps = [transform_from_dict(s) for s in d["steps"]]
            predictor = estimator_from_dict(d["predictor"])
            p = cls(d["task"], d["config"], steps, predictor, d["input"]["categorical"], d["seed"], d["metric"])
            p.columns = list(d["input"]["columns"])
            if d["target"] is not None:
                p.target_mean = float(d["target"]["mean"])
                p.target_scale = float(d["target"]["scale"])
                if not (math.isfinite(p.target_mean) and p.target_scale > 0):
                    raise SchemaError("invalid target scaling")
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError, PreprocessError) as exc:
            raise SchemaError(f"corrupted pipeline payload: {exc}") from exc
        p.fitted = True
        return p


def serialize(pipeline: Pipeline) -> str:
    return json.dumps(pipeline.to_dict(), indent=1, allow_nan=False)


def deserialize(text: str) -> Pipeline:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return Pipeline.from_dict(d)
