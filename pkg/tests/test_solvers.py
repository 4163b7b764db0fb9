import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qautoml.estimators.solvers import (
    SolverError,
    gpr_fit,
    gpr_predict,
    kkt_violation,
    krr_fit,
    krr_predict,
    svm_decision,
    svm_dual_solve,
    svr_dual_solve,
)
from qautoml.qkernels import RBFKernel


def separable(seed, n=30, d=2, margin=0.5):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)
    X = rng.uniform(-2, 2, (4 * n, d))
    s = X @ w
    keep = np.abs(s) > margin
    X, s = X[keep][:n], s[keep][:n]
    y = np.where(s > 0, 1.0, -1.0)
    if abs(y.sum()) == len(y):
        y[0] = -y[0]
        X[0] = -X[0]
    return X, y


def test_two_point_textbook_solution():
    sol = svm_dual_solve(np.eye(2), [1, -1], C=10.0)
    np.testing.assert_allclose(sol.alpha, [1, 1], atol=1e-6)
    assert sol.intercept == pytest.approx(0.0, abs=1e-6)


@given(st.integers(0, 500))
def test_linear_svm_separates_constructed_sets(seed):
    X, y = separable(seed)
    K = X @ X.T
    sol = svm_dual_solve(K, y, C=1e3)
    assert sol.converged
    assert np.all(np.sign(svm_decision(K, sol)) == y)
    assert kkt_violation(K, y, sol, 1e3) <= 1e-3
    assert abs(sol.alpha @ y) < 1e-8
    assert np.all(sol.alpha >= -1e-12) and np.all(sol.alpha <= 1e3 + 1e-9)


def test_soft_margin_respects_box(rng):
    X = rng.normal(size=(40, 2))
    y = np.where(rng.uniform(size=40) > 0.5, 1.0, -1.0)
    K = RBFKernel(0.5).gram(X)
    sol = svm_dual_solve(K, y, C=0.5)
    assert np.all(sol.alpha <= 0.5 + 1e-12)
    assert kkt_violation(K, y, sol, 0.5) <= 1e-3


@given(st.integers(0, 500), st.integers(3, 30), st.floats(1e-6, 1.0))
def test_krr_matches_dense_inverse(seed, n, alpha):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = rng.normal(size=n)
    K = RBFKernel(0.4).gram(X)
    w = krr_fit(K, y, alpha)
    oracle = np.linalg.inv(K + alpha * np.eye(n)) @ y
    np.testing.assert_allclose(w, oracle, rtol=1e-8, atol=1e-8 * np.abs(oracle).max())
    Xs = rng.normal(size=(4, 3))
    Ks = RBFKernel(0.4).gram(Xs, X)
    np.testing.assert_allclose(krr_predict(Ks, w), Ks @ oracle, rtol=1e-8, atol=1e-10)


@given(st.integers(0, 500), st.integers(3, 30), st.floats(1e-4, 1e-1))
def test_gpr_matches_dense_posterior(seed, n, noise):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = rng.normal(size=n)
    k = RBFKernel(0.7)
    K = k.gram(X)
    Xs = rng.normal(size=(5, 2))
    Ks = k.gram(Xs, X)
    mean, var = gpr_predict(gpr_fit(K, y, noise), Ks, k.diag(Xs))
    inv = np.linalg.inv(K + noise * np.eye(n))
    np.testing.assert_allclose(mean, Ks @ inv @ y, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(var, np.maximum(1.0 - np.sum(Ks @ inv * Ks, axis=1), 0), rtol=1e-6, atol=1e-9)
    assert np.all(var >= 0)


def test_svr_fits_within_epsilon_tube(rng):
    X = np.linspace(-1, 1, 25)[:, None]
    y = np.sin(2 * X[:, 0])
    K = RBFKernel(2.0).gram(X)
    sol = svr_dual_solve(K, y, C=100.0, epsilon=0.05)
    resid = np.abs(svm_decision(K, sol) - y)
    assert resid.max() <= 0.05 + 1e-2
    assert np.all(sol.alpha >= -1e-12) and np.all(sol.alpha <= 100 + 1e-9)


def test_nonconvergence_warns():
    X, y = separable(0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        sol = svm_dual_solve(X @ X.T, y, C=1e3, max_passes=0)
    assert not sol.converged and any("SMO" in str(x.message) for x in w)


@pytest.mark.parametrize(
    "call",
    [
        lambda: svm_dual_solve(np.eye(2), [1, 2], 1.0),
        lambda: svm_dual_solve(np.eye(2), [1, -1], 0.0),
        lambda: svm_dual_solve(np.ones((2, 3)), [1, -1], 1.0),
        lambda: krr_fit(np.eye(2), [1, 2], 0.0),
        lambda: gpr_fit(np.eye(2), [1, 2], -1.0),
        lambda: krr_fit(-np.eye(2), [1, 2], 1e-3),
    ],
)
def test_solver_errors(call):
    with pytest.raises(SolverError):
        call()
