"""Angle-encoding circuit families.

Every family is built layer by layer. In layer ``l`` qubit ``i`` encodes
feature ``(l * n_qubits + i) % n_features``, so all features are covered once
``n_layers * n_qubits >= n_features``. Feature angles are multiplied by the
bandwidth ``c``; when ``trainable`` is set each encoding rotation also gets its
own offset ``theta_j`` (the gate resolves to ``c * (x_f + theta_j)``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .qsim import MAX_QUBITS, Circuit, Gate

FAMILIES = ("YZ_CX", "MULTI_CONTROL", "HW_EFFICIENT", "SEPARABLE_RX")
MAX_LAYERS = 8
MAX_BANDWIDTH = 4 * math.pi

# encoding rotations per qubit per layer
_ROTATIONS_PER_QUBIT = {"YZ_CX": 2, "MULTI_CONTROL": 1, "HW_EFFICIENT": 1, "SEPARABLE_RX": 1}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingCircuitSpec:
    family: str = "YZ_CX"
    n_qubits: int = 4
    n_layers: int = 1
    bandwidth: float = 1.0
    trainable: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise EncodingError(f"unknown encoding family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.n_qubits, int) or not 1 <= self.n_qubits <= MAX_QUBITS:
            raise EncodingError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {self.n_qubits!r}")
        if not isinstance(self.n_layers, int) or not 1 <= self.n_layers <= MAX_LAYERS:
            raise EncodingError(f"n_layers must be an integer in [1, {MAX_LAYERS}], got {self.n_layers!r}")
        if not (0 < self.bandwidth <= MAX_BANDWIDTH):
            raise EncodingError(f"bandwidth must lie in (0, 4*pi], got {self.bandwidth!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingCircuitSpec":
        return cls(
            family=d["family"],
            n_qubits=d["n_qubits"],
            n_layers=d["n_layers"],
            bandwidth=float(d["bandwidth"]),
            trainable=bool(d.get("trainable", False)),
        )


def feature_index(layer: int, qubit: int, n_qubits: int, n_features: int) -> int:
    return (layer * n_qubits + qubit) % n_features


def _ring(n: int):
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n) for i in range(n)]


def build(spec: EncodingCircuitSpec, n_features: int) -> Circuit:
    if n_features < 1:
        raise EncodingError(f"n_features must be >= 1, got {n_features}")
    n, c = spec.n_qubits, spec.bandwidth
    gates: list[Gate] = []
    n_theta = 0

    def rot(kind, q, f):
        nonlocal n_theta
        j = None
        if spec.trainable:
            j = n_theta
            n_theta += 1
        gates.append(Gate(kind, (q,), feature=f, trainable=j, scale=c))

    for layer in range(spec.n_layers):
        f = [feature_index(layer, i, n, n_features) for i in range(n)]
        if spec.family == "YZ_CX":
            for i in range(n):
                rot("RY", i, f[i])
                rot("RZ", i, f[i])
            gates.extend(Gate("CX", (i, i + 1)) for i in range(n - 1))
        elif spec.family == "MULTI_CONTROL":
            for i in range(n):
                rot("RX", i, f[i])
            for a, b in _ring(n):
                gates.append(
                    Gate("CRZ", (a, b), feature=feature_index(layer, a + 1, n, n_features), scale=c)
                )
        elif spec.family == "HW_EFFICIENT":
            for i in range(n):
                rot("RY", i, f[i])
            gates.extend(Gate("CZ", pair) for pair in _ring(n))
        else:  # SEPARABLE_RX
            for i in range(n):
                rot("RX", i, f[i])
    return Circuit(n_qubits=n, gates=tuple(gates), n_features=n_features, n_trainable=n_theta)


def trainable_count(spec: EncodingCircuitSpec, n_features: int | None = None) -> int:
    if not spec.trainable:
        return 0
    return _ROTATIONS_PER_QUBIT[spec.family] * spec.n_qubits * spec.n_layers
