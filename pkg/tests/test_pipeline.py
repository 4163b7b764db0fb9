import json

import numpy as np
import pandas as pd
import pytest

from qautoml._deadline import TrialTimeout
from qautoml.encoding import EncodingError
from qautoml.estimators.base import NotFittedError
from qautoml.estimators.qnn import QNNTrainingError
from qautoml.estimators.solvers import SolverError
from qautoml.pipeline import (
    TASKS,
    PipelineError,
    SchemaError,
    TemplateError,
    default_space,
    deserialize,
    instantiate,
    preset_models,
    search,
    serialize,
)
from qautoml.pipeline.reference import WINNING, reference_pipeline
from qautoml.pipeline.templates import PAULI_SUBSETS
from qautoml.preprocess import PreprocessError
from qautoml.qkernels import KernelError
from qautoml.qsim import SimulationError
from qautoml.search import Budget

# failures a trial may legitimately report; anything else is a bug
DECLARED = (
    PipelineError, PreprocessError, KernelError, SolverError, SimulationError,
    EncodingError, QNNTrainingError, TrialTimeout,
)
FUZZ_SAMPLES = 1000


def toy_data(task, seed=0, n=20):
    rng = np.random.default_rng(seed)
    if task == "ts_forecasting":
        return np.sin(0.4 * np.arange(n + 4)) + 0.05 * rng.normal(size=n + 4), None
    X = pd.DataFrame(rng.normal(size=(n, 5)), columns=list("abcde"))
    if "classification" in task:
        y = np.arange(n) % 2
        X["a"] += 2.0 * y
    else:
        y = X["a"].to_numpy() - 0.5 * X["b"].to_numpy()
    return X, y


@pytest.mark.parametrize("task", TASKS)
def test_fuzz_instantiate_and_fit(task):
    X, y = toy_data(task)
    space = default_space(task, "all", None if task == "ts_forecasting" else 5, False)
    rng = np.random.default_rng(42)
    failures = 0
    for _ in range(FUZZ_SAMPLES):
        cfg = space.sample_random(rng)
        if "m.qnn.epochs" in cfg:
            cfg["m.qnn.epochs"] = min(space.by_id["m.qnn.epochs"].options)  # keeps the fuzz affordable
        pipe = instantiate(cfg, task)
        try:
            pipe.fit(X, y)
        except DECLARED:
            failures += 1
            continue
        pred = pipe.predict(X)
        assert len(pred) == (len(X) - 4 if task == "ts_forecasting" else len(X))
        assert pipe.describe()[-1].startswith(cfg["model"].upper())
    assert failures < FUZZ_SAMPLES // 10


def test_presets_restrict_models():
    for preset in ("quantum_regression", "classical_regression"):
        with pytest.raises(TemplateError):
            default_space("tabular_classification", preset, 4, False)
    reg = preset_models("tabular_regression", "quantum_regression")
    assert set(reg) == {"qkrr", "qgpr", "qsvr", "qnn", "qrc"}
    with pytest.raises(TemplateError):
        default_space("tabular_regression", "nope", 4, False)
    assert {"XZ", "XYZ", "XY"} <= set(PAULI_SUBSETS)


def test_pca_range_follows_feature_count():
    space = default_space("tabular_classification", "all", 3, False)
    assert space.by_id["prep.pca.k"].hi == 3
    space = default_space("ts_classification", "all", 210, False)
    assert space.by_id["prep.pca.k"].hi == 10
    assert "clean.impute" not in default_space("tabular_regression", "all", 4, False).by_id
    assert "clean.impute" in default_space("tabular_regression", "all", 4, True).by_id


def test_winning_configs_describe_as_expected():
    reg = reference_pipeline("tabular_regression")
    assert reg.describe() == ["MINMAX_SYM", "QKRR(PQK)"]
    ts = reference_pipeline("ts_classification")
    assert ts.describe() == ["PCA", "MINMAX_SYM", "QSVC(FQK)"]
    fc = reference_pipeline("ts_forecasting")
    assert fc.describe() == ["SLIDING_WINDOW(4)", "MINMAX_SYM", "QGPR(PQK)"]


def test_winning_regression_serializes_encoding():
    X, y = toy_data("tabular_regression")
    pipe = reference_pipeline("tabular_regression").fit(X.iloc[:, :4], y)
    enc = json.loads(serialize(pipe))["predictor"]["kernel"]["encoding"]
    assert (enc["family"], enc["n_qubits"], enc["n_layers"]) == ("MULTI_CONTROL", 8, 3)


def test_minimal_config_is_scaler_then_predictor():
    cfg = {"prep.scaler": "STANDARDIZE", "model": "krr_rbf", "m.krr_rbf.gamma": 0.5, "m.krr_rbf.alpha": 1e-3}
    pipe = instantiate(cfg, "tabular_regression")
    assert pipe.describe() == ["STANDARDIZE", "KRR_RBF"]


def test_qkrr_interpolates_training_targets():
    X, y = toy_data("tabular_regression", n=12)
    cfg = {
        "prep.scaler": "MINMAX_SYM",
        "model": "qkrr",
        "m.qkrr.kernel": "FQK",
        "m.qkrr.enc.family": "YZ_CX",
        "m.qkrr.enc.n_qubits": 5,
        "m.qkrr.enc.n_layers": 2,
        "m.qkrr.enc.bandwidth": 1.0,
        "m.qkrr.alpha": 1e-10,
    }
    pipe = instantiate(cfg, "tabular_regression").fit(X, y)
    np.testing.assert_allclose(pipe.predict(X), y, atol=1e-5)


def test_predict_before_fit_raises():
    pipe = reference_pipeline("tabular_classification")
    with pytest.raises(NotFittedError):
        pipe.predict(np.zeros((2, 8)))
    with pytest.raises(NotFittedError):
        serialize(pipe)


@pytest.mark.parametrize("task", TASKS)
def test_row_permutation_at_predict(task):
    X, y = toy_data(task, n=24)
    pipe = instantiate(WINNING[task] | {"prep.pca": "off"} if "prep.pca" in WINNING[task] else WINNING[task], task)
    if task == "ts_forecasting":
        pipe.fit(X)
        return
    pipe.fit(X, y)
    perm = np.random.default_rng(1).permutation(len(X))
    np.testing.assert_array_equal(pipe.predict(X.iloc[perm]), pipe.predict(X)[perm])


def test_training_row_permutation_invariance():
    X, y = toy_data("tabular_regression", n=24)
    cfg = dict(WINNING["tabular_regression"])
    perm = np.random.default_rng(3).permutation(len(X))
    a = instantiate(cfg, "tabular_regression").fit(X, y).predict(X)
    b = instantiate(cfg, "tabular_regression").fit(X.iloc[perm], y[perm]).predict(X)
    np.testing.assert_allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("task", TASKS)
def test_round_trip_bit_stable(task):
    X, y = toy_data(task, n=24)
    space = default_space(task, "all", None if task == "ts_forecasting" else 5, False)
    rng = np.random.default_rng(7)
    done = 0
    while done < 6:
        cfg = space.sample_random(rng)
        if "m.qnn.epochs" in cfg:
            cfg["m.qnn.epochs"] = 20
        try:
            pipe = instantiate(cfg, task).fit(X, y)
        except DECLARED:
            continue
        text = serialize(pipe)
        back = deserialize(text)
        assert serialize(back) == text
        np.testing.assert_allclose(back.predict(X), pipe.predict(X), rtol=0, atol=1e-12)
        kinds = json.loads(text)["steps"]
        assert kinds and kinds[-1]["kind"] in ("MINMAX_SYM", "STANDARDIZE")
        done += 1


def test_tampered_documents_rejected():
    X, y = toy_data("tabular_regression")
    doc = json.loads(serialize(reference_pipeline("tabular_regression").fit(X.iloc[:, :4], y)))
    bad = json.loads(json.dumps(doc))
    bad["predictor"]["kernel"]["encoding"]["n_qubits"] = 99
    with pytest.raises(SchemaError):
        deserialize(json.dumps(bad))
    bad = dict(doc, schema_version=2)
    with pytest.raises(SchemaError, match="schema version"):
        deserialize(json.dumps(bad))
    with pytest.raises(SchemaError):
        deserialize("{not json")
    bad = json.loads(json.dumps(doc))
    del bad["predictor"]["X_train"]
    with pytest.raises(SchemaError):
        deserialize(json.dumps(bad))


def test_missing_columns_rejected_and_order_ignored():
    X, y = toy_data("tabular_classification")
    pipe = instantiate(WINNING["tabular_classification"] | {"prep.pca.k": 4}, "tabular_classification").fit(X, y)
    shuffled = X[["e", "d", "c", "b", "a"]]
    np.testing.assert_array_equal(pipe.predict(shuffled), pipe.predict(X))
    with pytest.raises(SchemaError):
        pipe.predict(X.drop(columns=["c"]))


def test_categorical_and_missing_values_flow_through_cleaning():
    rng = np.random.default_rng(0)
    X = pd.DataFrame({"a": rng.normal(size=30), "site": rng.choice(["x", "y", "z"], 30)})
    X.loc[3, "a"] = np.nan
    y = X["a"].fillna(0).to_numpy() + (X["site"] == "x")
    space = default_space("tabular_regression", "classical_regression", 4, True)
    cfg = space.sample_random(rng) | {"clean.impute": "median"}
    pipe = instantiate(cfg, "tabular_regression", categorical=("site",)).fit(X, y)
    assert pipe.describe()[:2] == ["IMPUTE", "ONE_HOT"]
    assert np.all(np.isfinite(pipe.predict(X)))


def test_single_class_rejected():
    X, _ = toy_data("tabular_classification")
    with pytest.raises(PipelineError):
        reference_pipeline("tabular_classification").fit(X, np.zeros(len(X)))


def test_search_returns_refit_pipeline_deterministically():
    X, y = toy_data("tabular_classification", n=40)
    a = search("tabular_classification", X, y, "classical_classification", budget=Budget(max_trials=6), seed=1)
    b = search("tabular_classification", X, y, "classical_classification", budget=Budget(max_trials=6), seed=1)
    assert serialize(a.pipeline) == serialize(b.pipeline)
    assert a.pipeline.config == a.result.best_config
    assert len(a.result.history) == 6
