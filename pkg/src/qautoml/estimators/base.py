"""Shared estimator plumbing: the fit/predict interface and JSON array helpers."""
from __future__ import annotations

import numpy as np


class NotFittedError(RuntimeError):
    pass


class Estimator:
    name = ""
    task = ""  # "classification" | "regression" | "both"

    def fit(self, X, y):
        raise NotImplementedError

    def predict(self, X):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_dict(cls, d: dict):
        raise NotImplementedError


def array_to_json(a):
    if a is None:
        return None
    return np.asarray(a, dtype=float).tolist()


def array_from_json(v):
    if v is None:
        return None
    a = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite value in serialized array")
    return a
