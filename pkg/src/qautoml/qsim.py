"""Dense statevector simulator for parameterized angle-encoding circuits.

Qubit ordering is little-endian throughout: qubit 0 is the least-significant
bit of the amplitude index, so the basis state ``|q_{n-1} ... q_1 q_0>`` sits
at index ``sum(q_k << k)``.

Internally every routine works on a batch of states shaped ``(R, 2**n)``; the
single-state API (:class:`StateVector`, :func:`apply_gate`, :func:`simulate`)
is a thin wrapper around the batched kernels, which the kernel and QNN code
use directly to evaluate many feature rows / parameter shifts at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._deadline import check_deadline

MAX_QUBITS = 16
GATE_KINDS = ("H", "RX", "RY", "RZ", "CX", "CZ", "CRX", "CRZ")
ROTATION_KINDS = frozenset({"RX", "RY", "RZ", "CRX", "CRZ"})
TWO_QUBIT_KINDS = frozenset({"CX", "CZ", "CRX", "CRZ"})
PAULIS = ("X", "Y", "Z")

# amplitudes per evaluation chunk; bounds peak memory of batched runs
_CHUNK_AMPLITUDES = 1 << 22


class SimulationError(ValueError):
    """Invalid circuit, state, or observable, or an internal consistency failure."""


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit.

    Rotation angles resolve to ``scale * (angle + x[feature] + theta[trainable])``
    where absent sources contribute zero. ``angle`` is a literal offset.
    """

    kind: str
    targets: tuple[int, ...]
    feature: int | None = None
    trainable: int | None = None
    angle: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.targets) != arity:
            raise SimulationError(f"{self.kind} acts on {arity} qubit(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError(f"{self.kind} targets must be distinct, got {self.targets}")
        if min(self.targets) < 0:
            raise SimulationError(f"negative qubit index in {self.targets}")
        if self.kind not in ROTATION_KINDS:
            if self.feature is not None or self.trainable is not None or self.angle != 0.0:
                raise SimulationError(
                    f"trainable parameter or angle attached to non-rotation gate {self.kind}"
                )
        if not math.isfinite(self.scale) or not math.isfinite(self.angle):
            raise SimulationError("gate scale and angle must be finite")

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATION_KINDS

    def resolve(self, features, trainables) -> float:
        value = self.angle
        if self.feature is not None:
            value += float(features[self.feature])
        if self.trainable is not None:
            value += float(trainables[self.trainable])
        return self.scale * value

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "targets": list(self.targets)}
        if self.feature is not None:
            d["feature"] = self.feature
        if self.trainable is not None:
            d["trainable"] = self.trainable
        if self.angle != 0.0:
            d["angle"] = self.angle
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(
            kind=d["kind"],
            targets=tuple(d["targets"]),
            feature=d.get("feature"),
            trainable=d.get("trainable"),
            angle=float(d.get("angle", 0.0)),
            scale=float(d.get("scale", 1.0)),
        )


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_features: int = 0
    n_trainable: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SimulationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        for g in self.gates:
            if max(g.targets) >= self.n_qubits:
                raise SimulationError(f"gate {g.kind}{g.targets} out of range for {self.n_qubits} qubits")
            if g.feature is not None and not 0 <= g.feature < self.n_features:
                raise SimulationError(f"feature index {g.feature} >= n_features={self.n_features}")
            if g.trainable is not None and not 0 <= g.trainable < self.n_trainable:
                raise SimulationError(f"trainable index {g.trainable} >= n_trainable={self.n_trainable}")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != 2**self.n_qubits:
            raise SimulationError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got {self.amplitudes.size}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class PauliObservable:
    """Weighted sum of Pauli strings plus an identity weight.

    ``terms`` holds ``(coefficient, {qubit: "X" | "Y" | "Z"})`` pairs.
    """

    terms: tuple[tuple[float, dict], ...] = ()
    identity: float = 0.0
    _max_qubit: int = field(default=-1, init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = []
        top = -1
        for coef, paulis in self.terms:
            coef = float(coef)
            if not math.isfinite(coef):
                raise SimulationError("observable coefficients must be finite")
            paulis = {int(q): p for q, p in dict(paulis).items()}
            for q, p in paulis.items():
                if p not in PAULIS or q < 0:
                    raise SimulationError(f"bad Pauli factor {p!r} on qubit {q}")
                top = max(top, q)
            clean.append((coef, paulis))
        object.__setattr__(self, "terms", tuple(clean))
        object.__setattr__(self, "_max_qubit", top)
        if not math.isfinite(self.identity):
            raise SimulationError("identity weight must be finite")

    @classmethod
    def single(cls, pauli: str, qubit: int, coef: float = 1.0) -> "PauliObservable":
        return cls(((coef, {qubit: pauli}),))

    def coefficient_norm(self) -> float:
        return abs(self.identity) + sum(abs(c) for c, _ in self.terms)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "terms": [[c, {str(q): p for q, p in sorted(s.items())}] for c, s in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PauliObservable":
        return cls(
            tuple((float(c), {int(q): p for q, p in s.items()}) for c, s in d["terms"]),
            float(d.get("identity", 0.0)),
        )


# ---------------------------------------------------------------------------
# batched kernels on tensors shaped (R, 2, 2, ..., 2); qubit q lives on axis n - q


def _axis(n: int, q: int) -> int:
    return n - q


def _halves(psi, axis):
    i0 = [slice(None)] * psi.ndim
    i1 = [slice(None)] * psi.ndim
    i0[axis] = 0
    i1[axis] = 1
    return tuple(i0), tuple(i1)


def _rotate(psi, axis, kind, angles):
    """Apply RX/RY/RZ in place on ``axis``; ``angles`` broadcast over the batch axis."""
    i0, i1 = _halves(psi, axis)
    a0 = psi[i0]
    a1 = psi[i1]
    shape = (-1,) + (1,) * (a0.ndim - 1)
    half = np.reshape(angles, shape) * 0.5
    if kind == "RZ":
        psi[i0] = a0 * np.exp(-1j * half)
        psi[i1] = a1 * np.exp(1j * half)
        return
    c = np.cos(half)
    s = np.sin(half)
    if kind == "RY":
        n0 = c * a0 - s * a1
        n1 = s * a0 + c * a1
    else:  # RX
        n0 = c * a0 - 1j * s * a1
        n1 = c * a1 - 1j * s * a0
    psi[i0] = n0
    psi[i1] = n1


def _apply(psi, n, gate, angles):
    """Apply ``gate`` in place to the C-contiguous batch ``psi`` of shape ``(R, 2, ..., 2)``.

    Work happens on low-rank reshaped views so numpy's inner loops run over
    long contiguous blocks rather than size-2 axes.
    """
    if not psi.flags.c_contiguous:
        raise SimulationError("state batch must be C-contiguous")
    R = psi.shape[0]
    kind = gate.kind
    if kind in ("H", "RX", "RY", "RZ"):
        ax = _axis(n, gate.targets[0])
        v = psi.reshape(R, 1 << (ax - 1), 2, 1 << (n - ax))
        if kind == "H":
            a0 = v[:, :, 0].copy()
            a1 = v[:, :, 1]
            v[:, :, 0] = (a0 + a1) * (1 / math.sqrt(2))
            v[:, :, 1] = (a0 - a1) * (1 / math.sqrt(2))
        elif kind == "RZ":
            _rotate(v, 2, kind, angles)
        else:
            # one 2x2 matrix per batch row; matmul beats elementwise updates here
            half = np.asarray(angles, dtype=float).reshape(R) * 0.5
            c, s = np.cos(half), np.sin(half)
            M = np.empty((R, 1, 2, 2), dtype=complex)
            M[:, 0, 0, 0] = c
            M[:, 0, 1, 1] = c
            if kind == "RY":
                M[:, 0, 0, 1] = -s
                M[:, 0, 1, 0] = s
            else:
                M[:, 0, 0, 1] = -1j * s
                M[:, 0, 1, 0] = -1j * s
            v[...] = M @ v
        return
    control, target = gate.targets
    cax, tax = _axis(n, control), _axis(n, target)
    lo, hi = min(cax, tax), max(cax, tax)
    v = psi.reshape(R, 1 << (lo - 1), 2, 1 << (hi - lo - 1), 2, 1 << (n - hi))
    cdim, tdim = (2, 4) if cax == lo else (4, 2)
    idx = [slice(None)] * 6
    idx[cdim] = 1
    sub = v[tuple(idx)]  # view on the control=1 subspace
    sub_tax = tdim - 1 if tdim > cdim else tdim
    if kind == "CX":
        i0, i1 = _halves(sub, sub_tax)
        tmp = sub[i0].copy()
        sub[i0] = sub[i1]
        sub[i1] = tmp
    elif kind == "CZ":
        _, i1 = _halves(sub, sub_tax)
        sub[i1] *= -1
    else:
        _rotate(sub, sub_tax, kind[1:], angles)


def _angle_rows(gate, X, thetas, n_rows):
    """Resolved angles for every (theta-row, feature-row) pair, flattened to ``(B*N,)``."""
    B, N = thetas.shape[0], X.shape[0]
    base = np.full((B, N), gate.angle)
    if gate.feature is not None:
        base = base + X[None, :, gate.feature]
    if gate.trainable is not None:
        base = base + thetas[:, gate.trainable][:, None]
    return (gate.scale * base).reshape(n_rows)


def run_batch(circuit: Circuit, X, thetas, shift_gate=None, shift_delta=None) -> np.ndarray:
    """Simulate every combination of trainable row and feature row.

    ``X`` is ``(N, n_features)``, ``thetas`` is ``(B, n_trainable)``. The optional
    ``shift_gate``/``shift_delta`` arrays (length B) add ``shift_delta[b]`` to the
    resolved angle of gate ``shift_gate[b]`` for theta-row b (-1 means no shift).
    Returns amplitudes shaped ``(B, N, 2**n)``.
    """
    n = circuit.n_qubits
    X = np.asarray(X, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if X.ndim != 2 or X.shape[1] != circuit.n_features:
        raise SimulationError(f"features must be (N, {circuit.n_features}), got {X.shape}")
    if thetas.ndim != 2 or thetas.shape[1] != circuit.n_trainable:
        raise SimulationError(f"trainables must be (B, {circuit.n_trainable}), got {thetas.shape}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(thetas)):
        raise SimulationError("non-finite feature or trainable angle")
    B, N = thetas.shape[0], X.shape[0]
    R = B * N
    psi = np.zeros((R,) + (2,) * n, dtype=complex)
    psi[(slice(None),) + (0,) * n] = 1.0
    for g, gate in enumerate(circuit.gates):
        angles = None
        if gate.is_rotation:
            angles = _angle_rows(gate, X, thetas, R)
            if shift_gate is not None:
                delta = np.where(np.asarray(shift_gate) == g, shift_delta, 0.0)
                angles = angles + np.repeat(delta, N)
        _apply(psi, n, gate, angles)
    return psi.reshape(B, N, 2**n)


def simulate_batch(circuit: Circuit, X, trainables=None) -> np.ndarray:
    """States for each row of ``X`` with a single trainable vector; shape ``(N, 2**n)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != circuit.n_features:
        raise SimulationError(f"expected {circuit.n_features} features, got {X.shape[1]}")
    theta = np.zeros(circuit.n_trainable) if trainables is None else np.asarray(trainables, float)
    if theta.size != circuit.n_trainable:
        raise SimulationError(f"expected {circuit.n_trainable} trainables, got {theta.size}")
    out = []
    step = max(1, _CHUNK_AMPLITUDES >> circuit.n_qubits)
    for start in range(0, X.shape[0], step):
        check_deadline()
        out.append(run_batch(circuit, X[start:start + step], theta[None, :])[0])
    if not out:
        return np.zeros((0, 2**circuit.n_qubits), dtype=complex)
    return np.concatenate(out, axis=0)


def _pauli_apply(psi, n, paulis):
    out = psi.copy()
    for q, p in paulis.items():
        ax = _axis(n, q)
        i0, i1 = _halves(out, ax)
        if p == "Z":
            out[i1] *= -1
        else:
            a0 = out[i0].copy()
            a1 = out[i1]
            if p == "X":
                out[i0] = a1
                out[i1] = a0
            else:  # Y = [[0, -i], [i, 0]]
                out[i0] = -1j * a1
                out[i1] = 1j * a0
    return out


def expectation_batch(states, obs: PauliObservable, n_qubits: int) -> np.ndarray:
    """<psi|O|psi> for each row of ``states`` (shape ``(R, 2**n)``)."""
    if obs._max_qubit >= n_qubits:
        raise SimulationError(f"observable acts on qubit {obs._max_qubit} of a {n_qubits}-qubit state")
    states = np.asarray(states).reshape(-1, 2**n_qubits)
    psi = states.reshape((-1,) + (2,) * n_qubits)
    total = np.full(states.shape[0], obs.identity, dtype=complex) * np.sum(np.abs(states) ** 2, axis=1)
    for coef, paulis in obs.terms:
        if all(p == "Z" for p in paulis.values()):
            sign = np.ones((1,) + (2,) * n_qubits)
            for q in paulis:
                shape = [1] * (n_qubits + 1)
                shape[_axis(n_qubits, q)] = 2
                sign = sign * np.array([1.0, -1.0]).reshape(shape)
            val = np.sum((np.abs(psi) ** 2) * sign, axis=tuple(range(1, n_qubits + 1)))
        else:
            phi = _pauli_apply(psi, n_qubits, paulis)
            val = np.sum(np.conj(psi) * phi, axis=tuple(range(1, n_qubits + 1)))
        total = total + coef * val
    residue = np.max(np.abs(total.imag)) if total.size else 0.0
    if residue > 1e-10:
        raise SimulationError(f"expectation has imaginary residue {residue:.3e}")
    return total.real


def single_qubit_expectations(states, n_qubits: int, paulis=PAULIS) -> np.ndarray:
    """Per-qubit Pauli expectations, columns ordered qubit-major: ``[P_0 for P in paulis], ...``.

    Uses the reduced single-qubit density matrix of each qubit, so the cost is
    one pass over the amplitudes per qubit instead of one per observable.
    """
    states = np.asarray(states).reshape(-1, 2**n_qubits)
    R = states.shape[0]
    out = np.empty((R, n_qubits * len(paulis)))
    col = 0
    for q in range(n_qubits):
        v = states.reshape(R, 2 ** (n_qubits - q - 1), 2, 2**q)
        a0 = v[:, :, 0, :]
        a1 = v[:, :, 1, :]
        for p in paulis:
            if p == "Z":
                val = np.sum(np.abs(a0) ** 2 - np.abs(a1) ** 2, axis=(1, 2))
            else:
                cross = np.sum(np.conj(a0) * a1, axis=(1, 2))
                val = 2 * (cross.real if p == "X" else cross.imag)
            out[:, col] = val
            col += 1
    return np.clip(out, -1.0, 1.0)


# ---------------------------------------------------------------------------
# single-state API


def apply_gate(state: StateVector, gate: Gate, angle: float = 0.0) -> StateVector:
    if max(gate.targets) >= state.n_qubits:
        raise SimulationError(f"gate {gate.kind}{gate.targets} out of range for {state.n_qubits} qubits")
    if gate.is_rotation and not math.isfinite(angle):
        raise SimulationError("non-finite angle")
    psi = state.amplitudes.reshape((1,) + (2,) * state.n_qubits).copy()
    _apply(psi, state.n_qubits, gate, np.array([angle], dtype=float))
    return StateVector(state.n_qubits, psi.reshape(-1))


def simulate(circuit: Circuit, features=(), trainables=()) -> StateVector:
    x = np.asarray(features, dtype=float).ravel()
    theta = np.asarray(trainables, dtype=float).ravel()
    if x.size != circuit.n_features:
        raise SimulationError(f"expected {circuit.n_features} features, got {x.size}")
    if theta.size != circuit.n_trainable:
        raise SimulationError(f"expected {circuit.n_trainable} trainables, got {theta.size}")
    amps = run_batch(circuit, x[None, :], theta[None, :])[0, 0]
    return StateVector(circuit.n_qubits, amps)


def expectation(state: StateVector, obs: PauliObservable) -> float:
    return float(expectation_batch(state.amplitudes[None, :], obs, state.n_qubits)[0])


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n_qubits != b.n_qubits:
        raise SimulationError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    if f > 1 + 1e-12:
        raise SimulationError(f"fidelity {f} exceeds 1; states not normalized")
    return float(min(f, 1.0))


# ---------------------------------------------------------------------------
# parameter-shift gradients

# controlled rotations have generator eigenvalues {0, +-1/2}: four-term rule
_C_PLUS = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_C_MINUS = (math.sqrt(2) - 1) / (4 * math.sqrt(2))


def _shift_plan(circuit: Circuit):
    """(gate index, trainable index, angle shift, coefficient) for every shifted evaluation."""
    plan = []
    for g, gate in enumerate(circuit.gates):
        if gate.trainable is None:
            continue
        if not gate.is_rotation:
            raise SimulationError(f"trainable parameter attached to non-rotation gate {gate.kind}")
        if gate.scale == 0.0:
            continue
        s = gate.scale
        j = gate.trainable
        if gate.kind in ("RX", "RY", "RZ"):
            plan.append((g, j, math.pi / 2, s / 2))
            plan.append((g, j, -math.pi / 2, -s / 2))
        else:
            plan.append((g, j, math.pi / 2, s * _C_PLUS))
            plan.append((g, j, -math.pi / 2, -s * _C_PLUS))
            plan.append((g, j, 3 * math.pi / 2, -s * _C_MINUS))
            plan.append((g, j, -3 * math.pi / 2, s * _C_MINUS))
    return plan


def param_shift_jacobian(circuit: Circuit, X, trainables, obs: PauliObservable) -> np.ndarray:
    """d<O>/d theta_j for every feature row; shape ``(N, n_trainable)``.

    Each occurrence of a trainable index is shifted separately and the
    contributions summed. Shifts are applied to the resolved gate angle, which
    equals shifting theta by ``shift / scale``. Shifted evaluations branch off
    the unshifted state just before their gate, so the common prefix is
    simulated once.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    theta = np.asarray(trainables, dtype=float).ravel()
    if theta.size != circuit.n_trainable:
        raise SimulationError(f"expected {circuit.n_trainable} trainables, got {theta.size}")
    if X.shape[1] != circuit.n_features:
        raise SimulationError(f"expected {circuit.n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(theta)):
        raise SimulationError("non-finite feature or trainable angle")
    groups: dict[int, list] = {}
    for g, j, delta, coef in _shift_plan(circuit):
        groups.setdefault(g, []).append((j, delta, coef))
    N = X.shape[0]
    n = circuit.n_qubits
    jac = np.zeros((N, circuit.n_trainable))
    if not groups:
        return jac
    gates = circuit.gates
    widest = max(len(v) for v in groups.values())
    step = max(1, _CHUNK_AMPLITUDES // (widest << n))
    for lo in range(0, N, step):
        check_deadline()
        Xc = X[lo:lo + step]
        Nc = Xc.shape[0]
        angles = [
            _angle_rows(gate, Xc, theta[None, :], Nc) if gate.is_rotation else None for gate in gates
        ]
        psi = np.zeros((Nc,) + (2,) * n, dtype=complex)
        psi[(slice(None),) + (0,) * n] = 1.0
        for g, gate in enumerate(gates):
            if g in groups:
                shifts = groups[g]
                S = len(shifts)
                branch = np.repeat(psi[None], S, axis=0).reshape((S * Nc,) + (2,) * n)
                deltas = np.repeat([d for _, d, _ in shifts], Nc)
                _apply(branch, n, gate, np.tile(angles[g], S) + deltas)
                for h in range(g + 1, len(gates)):
                    a = None if angles[h] is None else np.tile(angles[h], S)
                    _apply(branch, n, gates[h], a)
                vals = expectation_batch(branch.reshape(S * Nc, -1), obs, n).reshape(S, Nc)
                for k, (j, _, coef) in enumerate(shifts):
                    jac[lo:lo + Nc, j] += coef * vals[k]
            _apply(psi, n, gate, angles[g])
    return jac


def param_shift_gradient(circuit: Circuit, features, trainables, obs: PauliObservable) -> np.ndarray:
    x = np.asarray(features, dtype=float).reshape(1, -1)
    return param_shift_jacobian(circuit, x, trainables, obs)[0]
