import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qautoml.encoding import EncodingCircuitSpec
from qautoml.estimators import (
    QGPR,
    QKRR,
    QNN,
    QRC,
    QSVC,
    QSVR,
    NotFittedError,
    estimator_from_dict,
    qnn_observable,
)
from qautoml.estimators.qrc import pauli_pool, random_observables, ridge_fit
from qautoml.qkernels import KernelSpec, OuterKernelSpec, RBFKernel

FQK = KernelSpec("FQK", EncodingCircuitSpec("YZ_CX", 3, 1, 1.0))
PQK = KernelSpec("PQK", EncodingCircuitSpec("MULTI_CONTROL", 3, 2, 0.8), ("X", "Z"), OuterKernelSpec("GAUSSIAN", gamma=1.0))


def blobs(seed, n=30, classes=2):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % classes
    centres = np.array([[np.cos(2 * np.pi * k / classes), np.sin(2 * np.pi * k / classes), 0.0] for k in range(classes)])
    return centres[y] * 0.8 + 0.1 * rng.normal(size=(n, 3)), y


def roundtrip(model):
    return estimator_from_dict(json.loads(json.dumps(model.to_dict())))


# RX-only feature rotations give <Z> even in x, so blobs mirrored through the
# origin need a sign-sensitive encoding: RY rotations put sin(x) into <X>
PQK_RY = KernelSpec("PQK", EncodingCircuitSpec("HW_EFFICIENT", 3, 1, 1.0), ("X", "Z"), OuterKernelSpec("GAUSSIAN", gamma=2.0))


@pytest.mark.parametrize("kernel", [FQK, PQK_RY, RBFKernel(2.0)])
def test_qsvc_fits_separable_blobs(kernel):
    X, y = blobs(0)
    m = QSVC(kernel, C=100.0).fit(X, y)
    assert np.mean(m.predict(X) == y) == 1.0


def test_qsvc_multiclass_and_string_labels():
    X, y = blobs(1, n=42, classes=3)
    labels = np.array(["a", "b", "c"])[y]
    m = QSVC(RBFKernel(3.0), C=10.0).fit(X, labels)
    assert set(m.predict(X)) <= {"a", "b", "c"}
    assert np.mean(m.predict(X) == labels) > 0.9
    np.testing.assert_array_equal(roundtrip(m).predict(X), m.predict(X))


@given(st.integers(0, 100))
def test_kernel_models_are_training_permutation_invariant(seed):
    X, y = blobs(seed)
    perm = np.random.default_rng(seed).permutation(len(y))
    Xt = np.random.default_rng(seed + 1).normal(size=(5, 3))
    for make in (lambda: QSVC(RBFKernel(1.0), 5.0), lambda: QKRR(RBFKernel(1.0), 1e-3), lambda: QSVR(RBFKernel(1.0), 5.0, 0.1)):
        a = make().fit(X, y).predict(Xt)
        b = make().fit(X[perm], y[perm]).predict(Xt)
        np.testing.assert_array_equal(a, b)


def test_qkrr_interpolates_with_tiny_ridge():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, (12, 3))
    y = rng.normal(size=12)
    m = QKRR(FQK, alpha=1e-10).fit(X, y)
    np.testing.assert_allclose(m.predict(X), y, atol=1e-4)


def test_qgpr_variance_small_at_training_points_and_nonnegative():
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, (10, 3))
    y = np.sin(X[:, 0])
    m = QGPR(PQK, noise=1e-6).fit(X, y)
    mean, var = m.predict_with_variance(X)
    np.testing.assert_allclose(mean, y, atol=1e-3)
    assert np.all(var >= 0) and var.max() < 1e-3
    _, var_far = m.predict_with_variance(rng.uniform(-3, 3, (5, 3)))
    assert var_far.mean() > var.mean()


@pytest.mark.parametrize(
    "make",
    [
        lambda: QSVC(PQK, 3.0),
        lambda: QSVR(FQK, 3.0, 0.05),
        lambda: QKRR(PQK, 1e-3),
        lambda: QGPR(FQK, 1e-3),
        lambda: QRC(EncodingCircuitSpec("HW_EFFICIENT", 3, 2), 10, 1e-4, seed=5),
        lambda: QNN(EncodingCircuitSpec("YZ_CX", 2, 1), "PAULI_SUM", ("Z",), epochs=3, seed=1),
    ],
)
def test_serialization_roundtrip_is_exact(make):
    rng = np.random.default_rng(9)
    X = rng.uniform(-1, 1, (16, 3))
    m = make()
    y = (X[:, 0] > 0).astype(int) if isinstance(m, QSVC) else X[:, 0] - X[:, 1]
    m.fit(X, y)
    Xt = rng.uniform(-1, 1, (7, 3))
    np.testing.assert_array_equal(roundtrip(m).predict(Xt), m.predict(Xt))


@pytest.mark.parametrize("model", [QSVC(FQK), QKRR(FQK), QGPR(FQK), QSVR(FQK), QRC(EncodingCircuitSpec()), QNN(EncodingCircuitSpec())])
def test_predict_before_fit_raises(model):
    with pytest.raises(NotFittedError):
        model.predict(np.zeros((1, 3)))


def test_qnn_training_never_ends_worse_than_it_started():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, (20, 2))
    y = np.sin(2 * X[:, 0])
    m = QNN(EncodingCircuitSpec("YZ_CX", 2, 2), "PAULI_SUM", ("Z",), "regression", epochs=30, learning_rate=0.1, seed=0).fit(X, y)
    assert m.final_loss_ <= m.loss_history_[0]
    assert m.final_loss_ < 0.5 * m.loss_history_[0]


def test_qnn_classifier_binary_and_ising():
    X, y = blobs(5, n=24)
    m = QNN(EncodingCircuitSpec("HW_EFFICIENT", 3, 1), "ISING", task="classification", epochs=25, learning_rate=0.1, seed=0)
    m.fit(X, y)
    assert m.final_loss_ <= m.loss_history_[0]
    assert set(m.predict(X)) <= {0, 1}


def test_qnn_multiclass_predicts_known_labels():
    X, y = blobs(6, n=30, classes=3)
    m = QNN(EncodingCircuitSpec("YZ_CX", 2, 1), "PAULI_SUM", ("X", "Z"), "classification", epochs=5, seed=0).fit(X, y)
    assert set(m.predict(X)) <= {0, 1, 2}


def test_qnn_observables():
    obs = qnn_observable("ISING", 3)
    assert len(obs.terms) == 5
    assert len(qnn_observable("PAULI_SUM", 3, ("X", "Y")).terms) == 6
    with pytest.raises(ValueError):
        qnn_observable("PAULI_SUM", 3, ())


def test_qrc_is_seeded_and_reservoir_is_fixed():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (20, 3))
    y = X[:, 0]
    enc = EncodingCircuitSpec("YZ_CX", 3, 1)
    a = QRC(enc, 12, 1e-6, seed=3).fit(X, y).predict(X)
    b = QRC(enc, 12, 1e-6, seed=3).fit(X, y).predict(X)
    c = QRC(enc, 12, 1e-6, seed=4).fit(X, y).predict(X)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_qrc_observable_pool():
    pool = pauli_pool(3)
    assert len(pool) == 9 + 27
    obs = random_observables(3, 54, np.random.default_rng(0))
    assert len(obs) == 54 and all(1 <= len(o) <= 2 for o in obs)


def test_ridge_fit_recovers_linear_map(rng):
    F = rng.normal(size=(50, 4))
    W = rng.normal(size=(4, 2))
    Y = F @ W + 0.3
    W_hat, b_hat = ridge_fit(F, Y, 1e-10)
    np.testing.assert_allclose(W_hat, W, atol=1e-6)
    np.testing.assert_allclose(b_hat, [0.3, 0.3], atol=1e-6)


def test_tampered_payload_rejected():
    X, y = blobs(0)
    d = QKRR(FQK, 1e-3).fit(X, y.astype(float)).to_dict()
    d["kernel"]["encoding"]["n_qubits"] = 99
    with pytest.raises(ValueError):
        estimator_from_dict(d)
    with pytest.raises(ValueError):
        estimator_from_dict({"type": "nope"})
