"""Fidelity and projected quantum kernels, plus the classical RBF kernel.

All kernel objects share one small interface: ``gram(X, Y=None)`` returns the
kernel matrix (symmetric when ``Y`` is omitted), ``diag(X)`` returns k(x, x)
per row, and ``to_dict``/``kernel_from_dict`` round-trip the definition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, eigh

from . import qsim
from .encoding import EncodingCircuitSpec, build

OUTER_KINDS = ("GAUSSIAN", "MATERN", "DOT_PRODUCT", "PAIRWISE_LINEAR")
MATERN_NUS = (0.5, 1.5, 2.5)
# rows of U processed per block in pairwise outer-kernel evaluation
_ROW_BLOCK = 64


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class OuterKernelSpec:
    kind: str = "GAUSSIAN"
    gamma: float = 1.0
    nu: float = 1.5
    length_scale: float = 1.0
    sigma0: float = 1.0

    def __post_init__(self):
        if self.kind not in OUTER_KINDS:
            raise KernelError(f"unknown outer kernel {self.kind!r}")
        if self.kind == "GAUSSIAN" and not self.gamma > 0:
            raise KernelError(f"GAUSSIAN gamma must be > 0, got {self.gamma}")
        if self.kind == "MATERN":
            if self.nu not in MATERN_NUS:
                raise KernelError(f"MATERN nu must be one of {MATERN_NUS}, got {self.nu}")
            if not self.length_scale > 0:
                raise KernelError(f"MATERN length scale must be > 0, got {self.length_scale}")
        if self.kind == "DOT_PRODUCT" and not self.sigma0 >= 0:
            raise KernelError(f"DOT_PRODUCT sigma0 must be >= 0, got {self.sigma0}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "GAUSSIAN":
            d["gamma"] = self.gamma
        elif self.kind == "MATERN":
            d["nu"] = self.nu
            d["length_scale"] = self.length_scale
        elif self.kind == "DOT_PRODUCT":
            d["sigma0"] = self.sigma0
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OuterKernelSpec":
        kw = {k: float(v) for k, v in d.items() if k != "kind"}
        return cls(kind=d["kind"], **kw)

    def __call__(self, U, V) -> np.ndarray:
        """Outer kernel between rows of ``U`` (N, p) and ``V`` (M, p)."""
        U = np.atleast_2d(U)
        V = np.atleast_2d(V)
        out = np.empty((U.shape[0], V.shape[0]))
        for start in range(0, U.shape[0], _ROW_BLOCK):
            u = U[start:start + _ROW_BLOCK, None, :]
            if self.kind in ("DOT_PRODUCT", "PAIRWISE_LINEAR"):
                block = np.sum(u * V[None, :, :], axis=-1)
                if self.kind == "DOT_PRODUCT":
                    block = self.sigma0**2 + block
            else:
                sq = np.sum((u - V[None, :, :]) ** 2, axis=-1)
                if self.kind == "GAUSSIAN":
                    block = np.exp(-self.gamma * sq)
                else:
                    block = _matern(np.sqrt(sq) / self.length_scale, self.nu)
            out[start:start + _ROW_BLOCK] = block
        return out


def _matern(r, nu):
    if nu == 0.5:
        return np.exp(-r)
    if nu == 1.5:
        a = math.sqrt(3) * r
        return (1 + a) * np.exp(-a)
    a = math.sqrt(5) * r
    return (1 + a + a * a / 3) * np.exp(-a)


@dataclass(frozen=True)
class KernelSpec:
    """Quantum kernel definition: fidelity (FQK) or projected (PQK)."""

    kind: str = "FQK"
    encoding: EncodingCircuitSpec = field(default_factory=EncodingCircuitSpec)
    pqk_paulis: tuple[str, ...] = ("Z",)
    outer: OuterKernelSpec = field(default_factory=OuterKernelSpec)

    def __post_init__(self):
        if self.kind not in ("FQK", "PQK"):
            raise KernelError(f"kernel kind must be FQK or PQK, got {self.kind!r}")
        if self.encoding.trainable:
            raise KernelError("kernel encodings must not carry trainable parameters")
        paulis = tuple(p for p in qsim.PAULIS if p in set(self.pqk_paulis))
        if len(paulis) != len(set(self.pqk_paulis)) or any(p not in qsim.PAULIS for p in self.pqk_paulis):
            raise KernelError(f"pqk_paulis must be a subset of X, Y, Z, got {self.pqk_paulis}")
        if self.kind == "PQK" and not paulis:
            raise KernelError("PQK requires at least one Pauli")
        object.__setattr__(self, "pqk_paulis", paulis)

    # -- construction helpers
    def circuit(self, n_features: int) -> qsim.Circuit:
        return build(self.encoding, n_features)

    def states(self, X) -> np.ndarray:
        X = _as_matrix(X)
        return qsim.simulate_batch(self.circuit(X.shape[1]), X)

    def pqk_features(self, X) -> np.ndarray:
        states = self.states(X)
        return qsim.single_qubit_expectations(states, self.encoding.n_qubits, self.pqk_paulis)

    # -- kernel interface
    def gram(self, X, Y=None, cache: bool = True) -> np.ndarray:
        return gram(self, X, Y, cache=cache)

    def diag(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if self.kind == "FQK":
            return np.ones(X.shape[0])
        F = self.pqk_features(X)
        return np.array([self.outer(f[None], f[None])[0, 0] for f in F])

    def to_dict(self) -> dict:
        d = {"type": "quantum", "kind": self.kind, "encoding": self.encoding.to_dict()}
        if self.kind == "PQK":
            d["pqk_paulis"] = list(self.pqk_paulis)
            d["outer"] = self.outer.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        kw = {"kind": d["kind"], "encoding": EncodingCircuitSpec.from_dict(d["encoding"])}
        if d["kind"] == "PQK":
            kw["pqk_paulis"] = tuple(d["pqk_paulis"])
            kw["outer"] = OuterKernelSpec.from_dict(d["outer"])
        return cls(**kw)


@dataclass(frozen=True)
class RBFKernel:
    """Classical exp(-gamma * |x - y|^2) on raw features."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise KernelError(f"RBF gamma must be > 0, got {self.gamma}")

    def gram(self, X, Y=None, cache: bool = True) -> np.ndarray:
        X = _as_matrix(X)
        sym = Y is None
        Y = X if sym else _as_matrix(Y)
        if X.shape[1] != Y.shape[1]:
            raise KernelError(f"feature dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        sq = (
            np.sum(X**2, axis=1)[:, None] + np.sum(Y**2, axis=1)[None, :] - 2 * X @ Y.T
        )
        K = np.exp(-self.gamma * np.maximum(sq, 0.0))
        if sym:
            K = _mirror_upper(K)
            np.fill_diagonal(K, 1.0)
        return K

    def diag(self, X) -> np.ndarray:
        return np.ones(_as_matrix(X).shape[0])

    def to_dict(self) -> dict:
        return {"type": "rbf", "gamma": self.gamma}


def kernel_from_dict(d: dict):
    if d["type"] == "rbf":
        return RBFKernel(float(d["gamma"]))
    return KernelSpec.from_dict(d)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


def _mirror_upper(K):
    iu = np.triu_indices(K.shape[0], 1)
    K[(iu[1], iu[0])] = K[iu]
    return K


def pqk_features(spec: KernelSpec, x) -> np.ndarray:
    if spec.kind != "PQK":
        raise KernelError("pqk_features requires a PQK spec")
    return spec.pqk_features(_as_matrix(x))[0]


def kernel_entry(spec: KernelSpec, x, x_prime) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x_prime = np.asarray(x_prime, dtype=float).ravel()
    if x.size != x_prime.size:
        raise KernelError(f"feature dimension mismatch: {x.size} vs {x_prime.size}")
    if spec.kind == "FQK":
        circuit = spec.circuit(x.size)
        return qsim.fidelity(qsim.simulate(circuit, x), qsim.simulate(circuit, x_prime))
    return float(spec.outer(pqk_features(spec, x)[None], pqk_features(spec, x_prime)[None])[0, 0])


def gram(spec, X, Y=None, cache: bool = True) -> np.ndarray:
    """Kernel matrix between rows of ``X`` and ``Y`` (``Y=None`` means ``X`` itself).

    With ``cache`` the N + M encoded states (or projected features) are computed
    once and reused for all pairs; without it every entry is evaluated from
    scratch, which exists only as a cross-check of the cached path.
    """
    if isinstance(spec, RBFKernel):
        return spec.gram(X, Y)
    X = _as_matrix(X)
    sym = Y is None
    Y = X if sym else _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise KernelError(f"feature dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if not cache:
        return _gram_uncached(spec, X, Y, sym)
    if spec.kind == "FQK":
        SX = spec.states(X)
        SY = SX if sym else spec.states(Y)
        K = np.abs(SX @ SY.conj().T) ** 2
        np.clip(K, 0.0, 1.0, out=K)
        if sym:
            K = _mirror_upper(K)
            np.fill_diagonal(K, 1.0)
        return K
    FX = spec.pqk_features(X)
    FY = FX if sym else spec.pqk_features(Y)
    K = spec.outer(FX, FY)
    return _mirror_upper(K) if sym else K


def _gram_uncached(spec, X, Y, sym):
    N, M = X.shape[0], Y.shape[0]
    K = np.empty((N, M))
    for i in range(N):
        for j in range(i if sym else 0, M):
            if spec.kind == "FQK":
                K[i, j] = 1.0 if (sym and i == j) else kernel_entry(spec, X[i], Y[j])
            else:
                fx = spec.pqk_features(X[i:i + 1])
                fy = spec.pqk_features(Y[j:j + 1])
                K[i, j] = spec.outer(fx, fy)[0, 0]
    return _mirror_upper(K) if sym else K


def psd_repair(K, jitter: float = 1e-8) -> np.ndarray:
    """Symmetrize, clip negative eigenvalues to zero, add ``jitter`` to the diagonal."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise KernelError(f"psd_repair needs a square matrix, got shape {K.shape}")
    S = 0.5 * (K + K.T)
    w, V = eigh(S)
    if w.min() < 0:
        S = (V * np.clip(w, 0.0, None)) @ V.T
        S = 0.5 * (S + S.T)
    out = S + jitter * np.eye(K.shape[0])
    cholesky(out, lower=True)  # raises LinAlgError if the repair failed
    return out
