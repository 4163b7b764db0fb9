"""Quantum reservoir computing: fixed random encoding circuit + linear readout.

The reservoir is an encoding circuit whose trainable offsets are frozen at
seeded random values. Its features are expectations of ``m`` Pauli strings
drawn uniformly (seeded) from all weight-1 and weight-2 strings; a ridge
regression with intercept maps them to the target. Classification fits one
ridge per class on +-1 targets and reads out the sign (two classes) or argmax.
"""
from __future__ import annotations

import itertools

import numpy as np

from .. import qsim
from ..encoding import EncodingCircuitSpec, build, trainable_count
from .base import Estimator, NotFittedError, array_from_json, array_to_json


def pauli_pool(n_qubits: int) -> list[dict]:
    pool = [{q: p} for q in range(n_qubits) for p in qsim.PAULIS]
    for a, b in itertools.combinations(range(n_qubits), 2):
        pool.extend({a: pa, b: pb} for pa in qsim.PAULIS for pb in qsim.PAULIS)
    return pool


def random_observables(n_qubits: int, m: int, rng) -> list[dict]:
    pool = pauli_pool(n_qubits)
    idx = rng.choice(len(pool), size=m, replace=m > len(pool))
    return [pool[i] for i in idx]


def ridge_fit(F, Y, alpha: float):
    """Ridge with unpenalized intercept. ``Y`` may be (N,) or (N, K)."""
    mu = F.mean(axis=0)
    ym = Y.mean(axis=0)
    Fc = F - mu
    A = Fc.T @ Fc + alpha * np.eye(F.shape[1])
    W = np.linalg.solve(A, Fc.T @ (Y - ym))
    return W, ym - mu @ W


class QRC(Estimator):
    name = "qrc"
    task = "both"

    def __init__(
        self,
        encoding: EncodingCircuitSpec,
        n_observables: int = 16,
        alpha: float = 1e-6,
        seed: int = 0,
        task: str = "regression",
    ):
        if n_observables < 1:
            raise ValueError(f"need at least one observable, got {n_observables}")
        if not alpha > 0:
            raise ValueError(f"ridge alpha must be > 0, got {alpha}")
        if task not in ("regression", "classification"):
            raise ValueError(f"task must be regression or classification, got {task!r}")
        if not encoding.trainable:
            encoding = EncodingCircuitSpec(
                encoding.family, encoding.n_qubits, encoding.n_layers, encoding.bandwidth, True
            )
        self.encoding = encoding
        self.n_observables = int(n_observables)
        self.alpha = float(alpha)
        self.seed = int(seed)
        self.task = task
        self.n_features_ = None
        self.offsets_ = None
        self.observables_ = None
        self.W_ = None
        self.b_ = None
        self.classes_ = None

    def _init_reservoir(self, n_features):
        rng = np.random.default_rng(self.seed)
        self.n_features_ = n_features
        self.offsets_ = rng.uniform(-np.pi, np.pi, size=trainable_count(self.encoding, n_features))
        self.observables_ = random_observables(self.encoding.n_qubits, self.n_observables, rng)

    def features(self, X) -> np.ndarray:
        if self.offsets_ is None:
            raise NotFittedError("QRC is not fitted")
        X = np.asarray(X, dtype=float)
        states = qsim.simulate_batch(build(self.encoding, self.n_features_), X, self.offsets_)
        n = self.encoding.n_qubits
        cols = [
            qsim.expectation_batch(states, qsim.PauliObservable(((1.0, o),)), n) for o in self.observables_
        ]
        return np.column_stack(cols)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self._init_reservoir(X.shape[1])
        F = self.features(X)
        if self.task == "regression":
            Y = np.asarray(y, dtype=float)
        else:
            self.classes_, t = np.unique(np.asarray(y), return_inverse=True)
            if self.classes_.size < 2:
                raise ValueError("QRC classifier needs at least two classes")
            if self.classes_.size == 2:
                Y = np.where(t == 1, 1.0, -1.0)
            else:
                Y = np.where(t[:, None] == np.arange(self.classes_.size)[None, :], 1.0, -1.0)
        self.W_, self.b_ = ridge_fit(F, Y, self.alpha)
        return self

    def predict(self, X):
        if self.W_ is None:
            raise NotFittedError("QRC is not fitted")
        out = self.features(X) @ self.W_ + self.b_
        if self.task == "regression":
            return out
        if out.ndim == 1:
            return self.classes_[(out > 0).astype(int)]
        return self.classes_[np.argmax(out, axis=1)]

    def to_dict(self):
        return {
            "type": self.name,
            "task": self.task,
            "encoding": self.encoding.to_dict(),
            "n_observables": self.n_observables,
            "alpha": self.alpha,
            "seed": self.seed,
            "n_features": self.n_features_,
            "offsets": array_to_json(self.offsets_),
            "observables": [{str(q): p for q, p in sorted(o.items())} for o in self.observables_],
            "W": array_to_json(self.W_),
            "b": array_to_json(self.b_),
            "classes": None if self.classes_ is None else self.classes_.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(EncodingCircuitSpec.from_dict(d["encoding"]), d["n_observables"], d["alpha"], d["seed"], d["task"])
        m.n_features_ = int(d["n_features"])
        m.offsets_ = array_from_json(d["offsets"])
        m.observables_ = [{int(q): p for q, p in o.items()} for o in d["observables"]]
        if len(m.observables_) != m.n_observables:
            raise ValueError("serialized QRC observable count mismatch")
        m.W_ = array_from_json(d["W"])
        m.b_ = array_from_json(d["b"])
        m.classes_ = None if d["classes"] is None else np.array(d["classes"])
        return m
