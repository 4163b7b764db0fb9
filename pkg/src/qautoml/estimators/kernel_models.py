"""Kernel estimators: SVC (one-vs-rest), SVR, kernel ridge, and GP regression.

The same classes serve quantum kernels (:class:`~qautoml.qkernels.KernelSpec`)
and the classical RBF twin (:class:`~qautoml.qkernels.RBFKernel`). Training
rows are put in a canonical order before the Gram matrix is built, which makes
fits independent of the order in which the caller supplied the rows.
"""
from __future__ import annotations

import numpy as np

from ..qkernels import kernel_from_dict, psd_repair
from . import solvers
from .base import Estimator, NotFittedError, array_from_json, array_to_json


def canonical_order(X, y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    keys = [np.asarray(y)] + [X[:, k] for k in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(tuple(keys))  # last key is primary: column 0 first, label last


class KernelEstimator(Estimator):
    repair_psd = False

    def __init__(self, kernel):
        self.kernel = kernel
        self.X_train = None

    def _train_gram(self, X, y):
        order = canonical_order(X, y)
        X = np.asarray(X, dtype=float)[order]
        y = np.asarray(y)[order]
        K = self.kernel.gram(X)
        if self.repair_psd:
            K = psd_repair(K)
        self.X_train = X
        return K, y

    def _cross(self, X):
        if self.X_train is None:
            raise NotFittedError(f"{type(self).__name__} is not fitted")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.X_train.shape[1]:
            raise ValueError(f"expected {self.X_train.shape[1]} features, got shape {X.shape}")
        return self.kernel.gram(X, self.X_train)

    def _base_dict(self):
        return {"kernel": self.kernel.to_dict(), "X_train": array_to_json(self.X_train)}

    def _load_base(self, d):
        self.X_train = array_from_json(d["X_train"])


class QSVC(KernelEstimator):
    name = "svc"
    task = "classification"

    def __init__(self, kernel, C: float = 1.0):
        super().__init__(kernel)
        if not C > 0:
            raise ValueError(f"C must be > 0, got {C}")
        self.C = float(C)
        self.classes_ = None
        self.coef_ = None  # (n_machines, N)
        self.intercept_ = None
        self.converged_ = None

    def fit(self, X, y):
        classes = np.unique(np.asarray(y))
        if classes.size < 2:
            raise ValueError("QSVC needs at least two classes")
        K, y = self._train_gram(X, y)
        return self.fit_gram(K, y, classes)

    def fit_gram(self, K, y, classes=None):
        y = np.asarray(y)
        self.classes_ = np.unique(y) if classes is None else classes
        targets = [self.classes_[1]] if self.classes_.size == 2 else list(self.classes_)
        coefs, intercepts, conv = [], [], []
        for c in targets:
            sol = solvers.svm_dual_solve(K, np.where(y == c, 1.0, -1.0), self.C)
            coefs.append(sol.coef)
            intercepts.append(sol.intercept)
            conv.append(sol.converged)
        self.coef_ = np.array(coefs)
        self.intercept_ = np.array(intercepts)
        self.converged_ = all(conv)
        return self

    def decision_function(self, X) -> np.ndarray:
        return self.decision_from_gram(self._cross(X))

    def decision_from_gram(self, K_cross) -> np.ndarray:
        if self.coef_ is None:
            raise NotFittedError("QSVC is not fitted")
        return np.asarray(K_cross) @ self.coef_.T + self.intercept_

    def predict(self, X):
        return self.predict_from_gram(self._cross(X))

    def predict_from_gram(self, K_cross):
        D = self.decision_from_gram(K_cross)
        if self.classes_.size == 2:
            return self.classes_[(D[:, 0] > 0).astype(int)]
        return self.classes_[np.argmax(D, axis=1)]

    def to_dict(self):
        return {
            "type": self.name,
            "C": self.C,
            **self._base_dict(),
            "classes": self.classes_.tolist(),
            "coef": array_to_json(self.coef_),
            "intercept": array_to_json(self.intercept_),
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(kernel_from_dict(d["kernel"]), d["C"])
        m._load_base(d)
        m.classes_ = np.array(d["classes"])
        m.coef_ = array_from_json(d["coef"])
        m.intercept_ = array_from_json(d["intercept"])
        return m


class QSVR(KernelEstimator):
    name = "svr"
    task = "regression"

    def __init__(self, kernel, C: float = 1.0, epsilon: float = 0.1):
        super().__init__(kernel)
        if not C > 0 or not epsilon >= 0:
            raise ValueError(f"need C > 0 and epsilon >= 0, got C={C}, epsilon={epsilon}")
        self.C = float(C)
        self.epsilon = float(epsilon)
        self.coef_ = None
        self.intercept_ = None

    def fit(self, X, y):
        K, y = self._train_gram(X, y)
        sol = solvers.svr_dual_solve(K, y, self.C, self.epsilon)
        self.coef_, self.intercept_ = sol.coef, sol.intercept
        return self

    def predict(self, X):
        return self._cross(X) @ self.coef_ + self.intercept_

    def to_dict(self):
        return {
            "type": self.name,
            "C": self.C,
            "epsilon": self.epsilon,
            **self._base_dict(),
            "coef": array_to_json(self.coef_),
            "intercept": self.intercept_,
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(kernel_from_dict(d["kernel"]), d["C"], d["epsilon"])
        m._load_base(d)
        m.coef_ = array_from_json(d["coef"])
        m.intercept_ = float(d["intercept"])
        return m


class QKRR(KernelEstimator):
    name = "krr"
    task = "regression"
    repair_psd = True

    def __init__(self, kernel, alpha: float = 1e-3):
        super().__init__(kernel)
        if not alpha > 0:
            raise ValueError(f"alpha must be > 0, got {alpha}")
        self.alpha = float(alpha)
        self.weights_ = None

    def fit(self, X, y):
        K, y = self._train_gram(X, y)
        self.weights_ = solvers.krr_fit(K, y, self.alpha)
        return self

    def predict(self, X):
        return solvers.krr_predict(self._cross(X), self.weights_)

    def to_dict(self):
        return {"type": self.name, "alpha": self.alpha, **self._base_dict(), "weights": array_to_json(self.weights_)}

    @classmethod
    def from_dict(cls, d):
        m = cls(kernel_from_dict(d["kernel"]), d["alpha"])
        m._load_base(d)
        m.weights_ = array_from_json(d["weights"])
        return m


class QGPR(KernelEstimator):
    """GP regression with zero prior mean; ``predict`` returns the posterior mean."""

    name = "gpr"
    task = "regression"
    repair_psd = True

    def __init__(self, kernel, noise: float = 1e-4):
        super().__init__(kernel)
        if not noise > 0:
            raise ValueError(f"noise variance must be > 0, got {noise}")
        self.noise = float(noise)
        self.state_ = None
        self.weights_ = None

    def fit(self, X, y):
        K, y = self._train_gram(X, y)
        self.state_ = solvers.gpr_fit(K, y, self.noise)
        self.weights_ = self.state_.weights
        return self

    def predict(self, X):
        return solvers.krr_predict(self._cross(X), self.weights_)

    def predict_with_variance(self, X):
        if self.state_ is None:
            K = psd_repair(self.kernel.gram(self.X_train))
            self.state_ = solvers.gpr_fit(K, np.zeros(K.shape[0]), self.noise)
            self.state_.weights = self.weights_
        return solvers.gpr_predict(self.state_, self._cross(X), self.kernel.diag(np.asarray(X, dtype=float)))

    def to_dict(self):
        return {
            "type": self.name,
            "noise": self.noise,
            **self._base_dict(),
            "weights": array_to_json(self.weights_),
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(kernel_from_dict(d["kernel"]), d["noise"])
        m._load_base(d)
        m.weights_ = array_from_json(d["weights"])
        return m
