"""Cleaning and quantum-oriented preprocessing transforms.

Cleaning transforms (:class:`Impute`, :class:`OneHot`) work on DataFrames
because they must see categorical columns; everything downstream works on
float matrices. Row-dropping transforms (:class:`OutlierIQR`,
:class:`Downsample`) only drop rows at fit time and expose the kept rows as
``row_mask_``; at predict time they pass data through unchanged.
"""
from __future__ import annotations

import numpy as np
import pandas as pd

MAX_CATEGORIES = 64


class PreprocessError(ValueError):
    pass


class NotFittedTransform(RuntimeError):
    pass


class Transform:
    kind = ""
    drops_rows = False

    def fit(self, X, y=None):
        raise NotImplementedError

    def transform(self, X):
        raise NotImplementedError

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

    def params(self) -> dict:
        return {}

    def state(self) -> dict:
        return {}

    def load_state(self, d: dict) -> None:
        pass

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params(), "state": self.state()}

    def _check_fitted(self, attr):
        if getattr(self, attr, None) is None:
            raise NotFittedTransform(f"{self.kind} transform used before fit")


def _matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise PreprocessError(f"expected a 2-D feature matrix, got shape {X.shape}")
    return X


def _check_width(X, n):
    if X.shape[1] != n:
        raise PreprocessError(f"schema mismatch: fitted on {n} columns, got {X.shape[1]}")


# ---------------------------------------------------------------------------
# cleaning (DataFrame in, DataFrame out)


class Impute(Transform):
    """Fill missing values: numeric columns by ``strategy``, categorical by mode."""

    kind = "IMPUTE"

    def __init__(self, strategy: str = "mean", categorical=()):
        if strategy not in ("mean", "median", "mode"):
            raise PreprocessError(f"unknown impute strategy {strategy!r}")
        self.strategy = strategy
        self.categorical = tuple(categorical)
        self.fill_ = None

    def fit(self, X, y=None):
        df = pd.DataFrame(X)
        fill = {}
        for col in df.columns:
            s = df[col]
            if col in self.categorical or self.strategy == "mode" or not pd.api.types.is_numeric_dtype(s):
                modes = s.dropna().mode()
                fill[col] = modes.iloc[0] if len(modes) else 0.0
            elif self.strategy == "mean":
                fill[col] = float(s.mean()) if s.notna().any() else 0.0
            else:
                fill[col] = float(s.median()) if s.notna().any() else 0.0
        self.fill_ = fill
        return self

    def transform(self, X):
        self._check_fitted("fill_")
        df = pd.DataFrame(X).copy()
        missing = [c for c in self.fill_ if c not in df.columns]
        if missing:
            raise PreprocessError(f"schema mismatch: missing columns {missing}")
        for col, value in self.fill_.items():
            if df[col].isna().any():
                df[col] = df[col].fillna(value)
        return df

    def params(self):
        return {"strategy": self.strategy, "categorical": list(self.categorical)}

    def state(self):
        return {"fill": {str(k): _plain(v) for k, v in self.fill_.items()}}

    def load_state(self, d):
        self.fill_ = dict(d["fill"])


class OneHot(Transform):
    """Indicator columns for categorical columns; unseen categories encode as all zeros."""

    kind = "ONE_HOT"

    def __init__(self, columns=()):
        self.columns = tuple(columns)
        self.categories_ = None
        self.input_columns_ = None
        self.unseen_count_ = 0

    def fit(self, X, y=None):
        df = pd.DataFrame(X)
        cats = {}
        for col in self.columns:
            if col not in df.columns:
                raise PreprocessError(f"categorical column {col!r} not in data")
            values = sorted({str(v) for v in df[col].dropna()})
            if len(values) > MAX_CATEGORIES:
                raise PreprocessError(
                    f"column {col!r} has {len(values)} categories (> {MAX_CATEGORIES}); "
                    "is it really categorical?"
                )
            cats[col] = values
        self.categories_ = cats
        self.input_columns_ = [str(c) for c in df.columns]
        return self

    def transform(self, X):
        self._check_fitted("categories_")
        df = pd.DataFrame(X)
        if [str(c) for c in df.columns] != self.input_columns_:
            raise PreprocessError("schema mismatch in one-hot input columns")
        out = {}
        unseen = 0
        for col in df.columns:
            if col in self.categories_:
                values = df[col].astype(str).to_numpy()
                known = self.categories_[col]
                unseen += int(np.sum(~np.isin(values, known)))
                for v in known:
                    out[f"{col}={v}"] = (values == v).astype(float)
            else:
                out[col] = df[col].to_numpy(dtype=float)
        self.unseen_count_ = unseen
        return pd.DataFrame(out, index=df.index)

    def output_width(self, n_numeric: int) -> int:
        return n_numeric + sum(len(v) for v in self.categories_.values())

    def params(self):
        return {"columns": list(self.columns)}

    def state(self):
        return {"categories": self.categories_, "input_columns": self.input_columns_}

    def load_state(self, d):
        self.categories_ = {k: list(v) for k, v in d["categories"].items()}
        self.input_columns_ = list(d["input_columns"])


# ---------------------------------------------------------------------------
# numeric (matrix in, matrix out)


class OutlierIQR(Transform):
    """Drop training rows outside [Q1 - k IQR, Q3 + k IQR] on any column.

    Columns with zero IQR (constants, sparse indicators) get infinite bounds
    so they never flag a row.
    """

    kind = "OUTLIER_IQR"
    drops_rows = True

    def __init__(self, k: float = 3.0):
        if not k > 0:
            raise PreprocessError(f"IQR factor must be > 0, got {k}")
        self.k = float(k)
        self.lower_ = None
        self.upper_ = None
        self.row_mask_ = None
        self.n_features_ = None

    def fit(self, X, y=None):
        X = _matrix(X)
        q1, q3 = np.percentile(X, [25, 75], axis=0)
        iqr = q3 - q1
        flat = iqr <= 0
        self.lower_ = np.where(flat, -np.inf, q1 - self.k * iqr)
        self.upper_ = np.where(flat, np.inf, q3 + self.k * iqr)
        self.row_mask_ = np.all((X >= self.lower_) & (X <= self.upper_), axis=1)
        self.n_features_ = X.shape[1]
        return self

    def transform(self, X):
        self._check_fitted("lower_")
        X = _matrix(X)
        _check_width(X, self.n_features_)
        return X

    def params(self):
        return {"k": self.k}

    def state(self):
        # json has no infinities; None marks an unbounded side
        return {
            "lower": [None if np.isinf(v) else float(v) for v in self.lower_],
            "upper": [None if np.isinf(v) else float(v) for v in self.upper_],
        }

    def load_state(self, d):
        self.lower_ = np.array([-np.inf if v is None else v for v in d["lower"]], dtype=float)
        self.upper_ = np.array([np.inf if v is None else v for v in d["upper"]], dtype=float)
        self.n_features_ = self.lower_.size


class Downsample(Transform):
    """Seeded random subsample of training rows; identity at predict time."""

    kind = "DOWNSAMPLE"
    drops_rows = True

    def __init__(self, ratio: float = 1.0, seed: int = 0):
        if not 0 < ratio <= 1:
            raise PreprocessError(f"downsample ratio must be in (0, 1], got {ratio}")
        self.ratio = float(ratio)
        self.seed = int(seed)
        self.row_mask_ = None
        self.n_features_ = None

    def fit(self, X, y=None):
        X = _matrix(X)
        n = X.shape[0]
        keep = max(1, int(round(self.ratio * n)))
        mask = np.zeros(n, dtype=bool)
        mask[np.random.default_rng(self.seed).choice(n, size=keep, replace=False)] = True
        self.row_mask_ = mask
        self.n_features_ = X.shape[1]
        return self

    def transform(self, X):
        self._check_fitted("n_features_")
        X = _matrix(X)
        _check_width(X, self.n_features_)
        return X

    def params(self):
        return {"ratio": self.ratio, "seed": self.seed}

    def state(self):
        return {"n_features": self.n_features_}

    def load_state(self, d):
        self.n_features_ = int(d["n_features"])


class MinMaxSym(Transform):
    """Affine map of each column's fit-time [min, max] onto [-1, 1].

    Values outside the training range are clamped to [-1.5, 1.5]; constant
    columns map to 0.
    """

    kind = "MINMAX_SYM"
    CLAMP = 1.5

    def __init__(self):
        self.min_ = None
        self.max_ = None

    def fit(self, X, y=None):
        X = _matrix(X)
        self.min_ = X.min(axis=0)
        self.max_ = X.max(axis=0)
        return self

    def transform(self, X):
        self._check_fitted("min_")
        X = _matrix(X)
        _check_width(X, self.min_.size)
        span = self.max_ - self.min_
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, 2.0 * (X - self.min_) / safe - 1.0, 0.0)
        return np.clip(out, -self.CLAMP, self.CLAMP)

    def state(self):
        return {"min": self.min_.tolist(), "max": self.max_.tolist()}

    def load_state(self, d):
        self.min_ = np.asarray(d["min"], dtype=float)
        self.max_ = np.asarray(d["max"], dtype=float)


class Standardize(Transform):
    kind = "STANDARDIZE"

    def __init__(self):
        self.mean_ = None
        self.scale_ = None

    def fit(self, X, y=None):
        X = _matrix(X)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        # a constant column's std is rounding noise, not spread
        flat = std <= 1e-12 * np.maximum(1.0, np.abs(self.mean_))
        self.scale_ = np.where(flat, 1.0, std)
        return self

    def transform(self, X):
        self._check_fitted("mean_")
        X = _matrix(X)
        _check_width(X, self.mean_.size)
        return (X - self.mean_) / self.scale_

    def state(self):
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}

    def load_state(self, d):
        self.mean_ = np.asarray(d["mean"], dtype=float)
        self.scale_ = np.asarray(d["scale"], dtype=float)


class PCA(Transform):
    """Projection on the top-k principal axes of the centered training data.

    Each component is sign-fixed so its largest-magnitude entry is positive.
    """

    kind = "PCA"

    def __init__(self, n_components: int = 2):
        if n_components < 1:
            raise PreprocessError(f"PCA needs n_components >= 1, got {n_components}")
        self.n_components = int(n_components)
        self.mean_ = None
        self.components_ = None
        self.singular_values_ = None
        self.explained_variance_ratio_ = None

    def fit(self, X, y=None):
        X = _matrix(X)
        n, d = X.shape
        if self.n_components > min(n, d):
            raise PreprocessError(f"PCA n_components={self.n_components} exceeds min(N, d)={min(n, d)}")
        self.mean_ = X.mean(axis=0)
        _, s, vt = np.linalg.svd(X - self.mean_, full_matrices=False)
        rows = np.arange(vt.shape[0])
        signs = np.sign(vt[rows, np.argmax(np.abs(vt), axis=1)])
        vt = vt * np.where(signs == 0, 1.0, signs)[:, None]
        total = float(np.sum(s**2))
        self.components_ = vt[: self.n_components]
        self.singular_values_ = s
        self.explained_variance_ratio_ = (s[: self.n_components] ** 2) / total if total > 0 else np.zeros(self.n_components)
        return self

    def transform(self, X):
        self._check_fitted("components_")
        X = _matrix(X)
        _check_width(X, self.mean_.size)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z):
        self._check_fitted("components_")
        return np.asarray(Z, dtype=float) @ self.components_ + self.mean_

    def params(self):
        return {"n_components": self.n_components}

    def state(self):
        return {
            "mean": self.mean_.tolist(),
            "components": self.components_.tolist(),
            "singular_values": self.singular_values_.tolist(),
        }

    def load_state(self, d):
        self.mean_ = np.asarray(d["mean"], dtype=float)
        self.components_ = np.asarray(d["components"], dtype=float).reshape(self.n_components, -1)
        self.singular_values_ = np.asarray(d["singular_values"], dtype=float)
        orth = self.components_ @ self.components_.T
        if not np.allclose(orth, np.eye(self.n_components), atol=1e-8):
            raise PreprocessError("serialized PCA components are not orthonormal")


_KINDS = {
    cls.kind: cls for cls in (Impute, OneHot, OutlierIQR, Downsample, MinMaxSym, Standardize, PCA)
}


def transform_from_dict(d: dict) -> Transform:
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise PreprocessError(f"unknown transform kind {d.get('kind')!r}") from None
    params = {k: v for k, v in d.items() if k not in ("kind", "state")}
    if "categorical" in params:
        params["categorical"] = tuple(params["categorical"])
    if "columns" in params:
        params["columns"] = tuple(params["columns"])
    t = cls(**params)
    t.load_state(d["state"])
    return t


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def sliding_window(series, lags: int):
    """Lagged design matrix: row t holds ``series[t:t+lags]`` and targets ``series[t+lags]``."""
    y = np.asarray(series, dtype=float).ravel()
    if lags < 1:
        raise PreprocessError(f"lags must be >= 1, got {lags}")
    if y.size <= lags:
        raise PreprocessError(f"series of length {y.size} too short for {lags} lags")
    X = np.lib.stride_tricks.sliding_window_view(y, lags)[:-1].copy()
    return X, y[lags:].copy()
