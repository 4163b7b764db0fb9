import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qautoml.preprocess import (
    PCA,
    Downsample,
    Impute,
    MinMaxSym,
    NotFittedTransform,
    OneHot,
    OutlierIQR,
    PreprocessError,
    Standardize,
    sliding_window,
    transform_from_dict,
)

matrices = st.integers(3, 20).flatmap(
    lambda n: arrays(np.float64, (n, 4), elements=st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False))
)


def roundtrip(t):
    return transform_from_dict(json.loads(json.dumps(t.to_dict())))


@given(matrices)
def test_minmax_maps_training_range_onto_symmetric_interval(X):
    Z = MinMaxSym().fit_transform(X)
    assert np.all(Z >= -1 - 1e-12) and np.all(Z <= 1 + 1e-12)
    span = X.max(axis=0) - X.min(axis=0)
    for j in range(X.shape[1]):
        if span[j] > 0:
            assert Z[:, j].min() == pytest.approx(-1) and Z[:, j].max() == pytest.approx(1)
        else:
            assert np.all(Z[:, j] == 0)


def test_minmax_clamps_out_of_range():
    t = MinMaxSym().fit(np.array([[0.0], [1.0]]))
    np.testing.assert_allclose(t.transform(np.array([[10.0], [-10.0], [0.75]])), [[1.5], [-1.5], [0.5]])


@given(matrices)
def test_standardize_zero_mean_unit_variance(X):
    Z = Standardize().fit_transform(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-9)
    std = X.std(axis=0)
    for j in range(X.shape[1]):
        if std[j] > 1e-9 * max(1.0, np.abs(X[:, j]).max()):
            assert Z[:, j].std() == pytest.approx(1, rel=1e-6)


@given(st.integers(0, 1000), st.integers(1, 5))
def test_pca_components_orthonormal_and_variance_ordered(seed, k):
    X = np.random.default_rng(seed).normal(size=(30, 6)) @ np.diag([5, 4, 3, 2, 1, 0.5])
    p = PCA(k).fit(X)
    np.testing.assert_allclose(p.components_ @ p.components_.T, np.eye(k), atol=1e-10)
    evr = p.explained_variance_ratio_
    assert np.all(np.diff(evr) <= 1e-12) and 0 < evr.sum() <= 1 + 1e-12


def test_pca_full_rank_inverse_recovers_input(rng):
    X = rng.normal(size=(10, 4))
    p = PCA(4).fit(X)
    np.testing.assert_allclose(p.inverse_transform(p.transform(X)), X, atol=1e-10)


def test_pca_sign_is_deterministic(rng):
    X = rng.normal(size=(12, 3))
    a = PCA(2).fit(X).components_
    b = PCA(2).fit(X[::-1]).components_
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_pca_too_many_components():
    with pytest.raises(PreprocessError):
        PCA(5).fit(np.zeros((3, 4)))


def test_pca_rejects_tampered_components(rng):
    d = PCA(2).fit(rng.normal(size=(8, 3))).to_dict()
    d["state"]["components"][0] = [1.0, 1.0, 1.0]
    with pytest.raises(PreprocessError):
        transform_from_dict(d)


def test_impute_fills_numeric_and_categorical():
    df = pd.DataFrame({"a": [1.0, np.nan, 3.0], "c": ["x", None, "x"]})
    out = Impute("mean", ("c",)).fit_transform(df)
    assert out["a"].tolist() == [1.0, 2.0, 3.0]
    assert out["c"].tolist() == ["x", "x", "x"]
    assert Impute("median").fit(pd.DataFrame({"a": [1.0, 2.0, 10.0, np.nan]})).fill_["a"] == 2.0


def test_onehot_sorted_indicators_and_unseen_zero():
    df = pd.DataFrame({"n": [1.0, 2.0, 3.0], "c": ["b", "a", "b"]})
    t = OneHot(("c",)).fit(df)
    out = t.transform(df)
    assert list(out.columns) == ["n", "c=a", "c=b"]
    new = t.transform(pd.DataFrame({"n": [0.0], "c": ["zzz"]}))
    assert new[["c=a", "c=b"]].to_numpy().tolist() == [[0.0, 0.0]]
    assert t.unseen_count_ == 1


def test_onehot_rejects_high_cardinality():
    with pytest.raises(PreprocessError):
        OneHot(("c",)).fit(pd.DataFrame({"c": [str(i) for i in range(65)]}))


def test_outlier_mask_flags_extremes_only_at_fit(rng):
    X = rng.normal(size=(50, 2))
    X[7, 1] = 100.0
    t = OutlierIQR(3.0).fit(X)
    assert not t.row_mask_[7] and t.row_mask_.sum() == 49
    np.testing.assert_array_equal(t.transform(X), X)


def test_outlier_ignores_zero_iqr_indicator_columns():
    X = np.zeros((20, 2))
    X[:, 0] = np.arange(20)
    X[3, 1] = 1.0
    t = OutlierIQR(1.5).fit(X)
    assert t.row_mask_.all()
    assert np.array_equal(roundtrip(t).transform(X), X)


@given(st.integers(1, 60), st.sampled_from([0.25, 0.5, 1.0]), st.integers(0, 99))
def test_downsample_keeps_requested_fraction(n, ratio, seed):
    t = Downsample(ratio, seed).fit(np.zeros((n, 2)))
    assert t.row_mask_.sum() == max(1, int(round(ratio * n)))


def test_sliding_window_shapes():
    X, y = sliding_window(np.arange(10.0), 4)
    assert X.shape == (6, 4) and y.tolist() == [4, 5, 6, 7, 8, 9]
    assert X[0].tolist() == [0, 1, 2, 3]
    with pytest.raises(PreprocessError):
        sliding_window(np.arange(4.0), 4)


@pytest.mark.parametrize("make", [MinMaxSym, Standardize, lambda: PCA(2), lambda: OutlierIQR(1.5), lambda: Downsample(0.5, 1)])
def test_numeric_transforms_roundtrip(make, rng):
    X = rng.normal(size=(15, 3))
    t = make().fit(X)
    np.testing.assert_array_equal(roundtrip(t).transform(X), t.transform(X))


@pytest.mark.parametrize("make", [MinMaxSym, Standardize, lambda: PCA(2)])
def test_width_mismatch_and_unfitted(make, rng):
    with pytest.raises(NotFittedTransform):
        make().transform(np.zeros((2, 3)))
    t = make().fit(rng.normal(size=(6, 3)))
    with pytest.raises(PreprocessError):
        t.transform(np.zeros((2, 4)))
