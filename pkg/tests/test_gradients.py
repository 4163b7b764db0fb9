import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qautoml import qsim
from qautoml.qsim import Circuit, Gate, PauliObservable


def random_circuit(rng, n=4, n_gates=10, n_trainable=5, n_features=2):
    kinds = ["RX", "RY", "RZ", "CRX", "CRZ", "CX", "CZ", "H"]
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in qsim.TWO_QUBIT_KINDS:
            a, b = rng.choice(n, 2, replace=False)
            targets = (int(a), int(b))
        else:
            targets = (int(rng.integers(n)),)
        if kind in qsim.ROTATION_KINDS:
            gates.append(Gate(kind, targets, feature=int(rng.integers(n_features)), trainable=int(rng.integers(n_trainable)),
                              angle=float(rng.uniform(-1, 1)), scale=float(rng.uniform(0.5, 2.0))))
        else:
            gates.append(Gate(kind, targets))
    return Circuit(n, gates, n_features, n_trainable)


def finite_difference(c, x, theta, obs, h=1e-5):
    out = np.zeros_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        up = qsim.expectation(qsim.simulate(c, x, theta + e), obs)
        dn = qsim.expectation(qsim.simulate(c, x, theta - e), obs)
        out[j] = (up - dn) / (2 * h)
    return out


def test_single_rotation_derivative():
    c = Circuit(1, (Gate("RY", (0,), trainable=0),), n_trainable=1)
    obs = PauliObservable.single("Z", 0)
    for t in np.linspace(-3, 3, 7):
        g = qsim.param_shift_gradient(c, [], [t], obs)
        assert g[0] == pytest.approx(-math.sin(t), abs=1e-12)


@given(st.integers(0, 10_000))
def test_shift_rule_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng)
    x = rng.uniform(-1, 1, 2)
    theta = rng.uniform(-math.pi, math.pi, 5)
    obs = PauliObservable(((1.0, {0: "Z"}), (0.5, {1: "X", 2: "Y"})))
    exact = qsim.param_shift_gradient(c, x, theta, obs)
    fd = finite_difference(c, x, theta, obs)
    np.testing.assert_allclose(exact, fd, atol=1e-8)


def test_jacobian_rows_match_per_sample_gradients(rng):
    c = random_circuit(rng)
    X = rng.uniform(-1, 1, (4, 2))
    theta = rng.uniform(-1, 1, 5)
    obs = PauliObservable.single("Z", 3)
    J = qsim.param_shift_jacobian(c, X, theta, obs)
    for i in range(4):
        np.testing.assert_allclose(J[i], qsim.param_shift_gradient(c, X[i], theta, obs), atol=1e-13)


def test_untrained_parameter_has_zero_gradient():
    c = Circuit(1, (Gate("RX", (0,), trainable=0),), n_trainable=2)
    g = qsim.param_shift_gradient(c, [], [0.3, 0.9], PauliObservable.single("Z", 0))
    assert g[1] == 0.0
