"""Variational quantum neural network with a linear output head.

The model output is ``w * <O>(x, theta) + b``. Regression minimizes the mean
squared error; classification uses the logistic loss for two classes and a
softmax over one affine head per class otherwise. All parameters are trained
jointly by Adam with full-batch parameter-shift gradients for ``theta``.
"""
from __future__ import annotations

import math

import numpy as np

from .. import qsim
from .._deadline import check_deadline
from ..encoding import EncodingCircuitSpec, build, trainable_count
from .base import Estimator, NotFittedError, array_from_json, array_to_json

OBSERVABLE_KINDS = ("PAULI_SUM", "ISING")


class QNNTrainingError(RuntimeError):
    pass


def qnn_observable(kind: str, n_qubits: int, paulis=("Z",)) -> qsim.PauliObservable:
    if kind == "ISING":
        terms = [(1.0, {i: "Z"}) for i in range(n_qubits)]
        terms += [(1.0, {i: "Z", i + 1: "Z"}) for i in range(n_qubits - 1)]
    elif kind == "PAULI_SUM":
        if not paulis or any(p not in qsim.PAULIS for p in paulis):
            raise ValueError(f"PAULI_SUM needs a non-empty subset of X, Y, Z, got {paulis}")
        terms = [(1.0, {i: p}) for i in range(n_qubits) for p in paulis]
    else:
        raise ValueError(f"unknown observable kind {kind!r}")
    return qsim.PauliObservable(tuple(terms))


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class QNN(Estimator):
    name = "qnn"
    task = "both"

    def __init__(
        self,
        encoding: EncodingCircuitSpec,
        observable: str = "PAULI_SUM",
        paulis=("Z",),
        task: str = "regression",
        epochs: int = 300,
        learning_rate: float = 0.05,
        seed: int = 0,
    ):
        if not encoding.trainable:
            encoding = EncodingCircuitSpec(
                encoding.family, encoding.n_qubits, encoding.n_layers, encoding.bandwidth, True
            )
        if task not in ("regression", "classification"):
            raise ValueError(f"task must be regression or classification, got {task!r}")
        if epochs < 0 or not learning_rate > 0:
            raise ValueError("epochs must be >= 0 and learning_rate > 0")
        self.encoding = encoding
        self.observable = observable
        self.paulis = tuple(paulis) if observable == "PAULI_SUM" else ()
        self.task = task
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.seed = int(seed)
        self.obs = qnn_observable(observable, encoding.n_qubits, self.paulis)
        self.theta_ = None
        self.w_ = None
        self.b_ = None
        self.classes_ = None
        self.n_features_ = None
        self.loss_history_ = []

    # -- model pieces
    def _circuit(self):
        return build(self.encoding, self.n_features_)

    def expectations(self, X, theta=None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        states = qsim.simulate_batch(self._circuit(), X, self.theta_ if theta is None else theta)
        return qsim.expectation_batch(states, self.obs, self.encoding.n_qubits)

    def _loss_and_dz(self, z, t):
        """Loss and dLoss/dz for head outputs ``z`` (N, K)."""
        N = z.shape[0]
        if self.task == "regression":
            r = z[:, 0] - t
            return float(np.mean(r * r)), (2.0 / N) * r[:, None]
        if z.shape[1] == 1:
            zz = z[:, 0]
            loss = float(np.mean(_softplus(zz) - t * zz))
            return loss, ((_sigmoid(zz) - t) / N)[:, None]
        zmax = z.max(axis=1, keepdims=True)
        logp = z - zmax - np.log(np.sum(np.exp(z - zmax), axis=1, keepdims=True))
        loss = float(-np.mean(logp[np.arange(N), t]))
        grad = np.exp(logp)
        grad[np.arange(N), t] -= 1.0
        return loss, grad / N

    # -- training
    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.n_features_ = X.shape[1]
        rng = np.random.default_rng(self.seed)
        P = trainable_count(self.encoding, self.n_features_)
        scale = 1.0 / max(self.obs.coefficient_norm(), 1e-12)
        if self.task == "regression":
            t = y.astype(float)
            K = 1
            w = np.array([scale])
            b = np.array([float(np.mean(t))])
        else:
            self.classes_, t = np.unique(y, return_inverse=True)
            if self.classes_.size < 2:
                raise ValueError("QNN classifier needs at least two classes")
            K = 1 if self.classes_.size == 2 else self.classes_.size
            counts = np.bincount(t, minlength=self.classes_.size).astype(float)
            if K == 1:
                w = np.array([scale])
                b = np.array([math.log(counts[1] / counts[0])])
            else:
                w = scale * np.linspace(-1.0, 1.0, K)
                b = np.log(counts / counts.sum())
        theta = rng.uniform(-1.0, 1.0, size=P)
        params = np.concatenate([theta, w, b])
        circuit = self._circuit()

        def evaluate(p, with_grad):
            th, ww, bb = p[:P], p[P:P + K], p[P + K:]
            E = qsim.expectation_batch(qsim.simulate_batch(circuit, X, th), self.obs, self.encoding.n_qubits)
            z = E[:, None] * ww[None, :] + bb[None, :]
            loss, dz = self._loss_and_dz(z, t)
            if not math.isfinite(loss):
                raise QNNTrainingError("non-finite training loss")
            if not with_grad:
                return loss, None
            dE = dz @ ww
            g_theta = dE @ qsim.param_shift_jacobian(circuit, X, th, self.obs) if P else np.zeros(0)
            g_w = dz.T @ E
            g_b = dz.sum(axis=0)
            return loss, np.concatenate([g_theta, g_w, g_b])

        m = np.zeros_like(params)
        v = np.zeros_like(params)
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        best_params = params.copy()
        best_loss = math.inf
        history = []
        for epoch in range(1, self.epochs + 1):
            check_deadline()
            loss, grad = evaluate(params, True)
            history.append(loss)
            if loss < best_loss:
                best_loss, best_params = loss, params.copy()
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad * grad
            mhat = m / (1 - beta1**epoch)
            vhat = v / (1 - beta2**epoch)
            params = params - self.learning_rate * mhat / (np.sqrt(vhat) + eps)
        loss, _ = evaluate(params, False)
        history.append(loss)
        if loss < best_loss:
            best_loss, best_params = loss, params.copy()
        self.loss_history_ = history
        self.final_loss_ = best_loss
        self.theta_ = best_params[:P]
        self.w_ = best_params[P:P + K]
        self.b_ = best_params[P + K:]
        return self

    def decision_function(self, X) -> np.ndarray:
        if self.theta_ is None:
            raise NotFittedError("QNN is not fitted")
        E = self.expectations(X)
        return E[:, None] * self.w_[None, :] + self.b_[None, :]

    def predict(self, X):
        z = self.decision_function(X)
        if self.task == "regression":
            return z[:, 0]
        if z.shape[1] == 1:
            return self.classes_[(z[:, 0] > 0).astype(int)]
        return self.classes_[np.argmax(z, axis=1)]

    def to_dict(self):
        return {
            "type": self.name,
            "task": self.task,
            "encoding": self.encoding.to_dict(),
            "observable": self.observable,
            "paulis": list(self.paulis),
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "n_features": self.n_features_,
            "theta": array_to_json(self.theta_),
            "w": array_to_json(self.w_),
            "b": array_to_json(self.b_),
            "classes": None if self.classes_ is None else self.classes_.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(
            EncodingCircuitSpec.from_dict(d["encoding"]),
            d["observable"],
            tuple(d["paulis"]),
            d["task"],
            d["epochs"],
            d["learning_rate"],
            d["seed"],
        )
        m.n_features_ = int(d["n_features"])
        m.theta_ = array_from_json(d["theta"])
        if m.theta_.size != trainable_count(m.encoding, m.n_features_):
            raise ValueError("serialized QNN parameter count does not match its encoding")
        m.w_ = array_from_json(d["w"])
        m.b_ = array_from_json(d["b"])
        m.classes_ = None if d["classes"] is None else np.array(d["classes"])
        return m
