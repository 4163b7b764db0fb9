import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qautoml.search import (
    Budget,
    NoResultError,
    SearchSpace,
    SpaceError,
    TrialRecord,
    best_so_far,
    categorical,
    history_to_csv,
    int_uniform,
    log_uniform,
    optimize,
    split_good_bad,
    tpe_suggest,
    uniform,
)
from qautoml.search.tpe import ParzenCategorical, ParzenNumeric
from qautoml._deadline import check_deadline
from toy import toy_loss, toy_space


@given(st.integers(0, 10_000))
def test_random_samples_validate_and_respect_conditions(seed):
    space = toy_space()
    cfg = space.sample_random(np.random.default_rng(seed))
    space.validate(cfg)
    assert ("scale" in cfg) == (cfg["branch"] == "deep")
    assert 1e-3 <= cfg.get("scale", 1.0) <= 10
    assert isinstance(cfg.get("k", 1), int)


@pytest.mark.parametrize(
    "params",
    [
        [uniform("x", 1, 0)],
        [log_uniform("x", 0, 1)],
        [categorical("c", ())],
        [uniform("x", 0, 1), uniform("x", 0, 1)],
        [uniform("y", 0, 1, ("missing", ("a",)))],
        [categorical("c", ("a",)), uniform("y", 0, 1, ("c", ("b",)))],
        [uniform("p", 0, 1), uniform("y", 0, 1, ("p", (0.5,)))],
    ],
)
def test_malformed_spaces_rejected(params):
    with pytest.raises(SpaceError):
        SearchSpace(params)


def test_validate_rejects_inactive_and_out_of_domain():
    space = toy_space()
    with pytest.raises(SpaceError):
        space.validate({"x": 0.5, "c": "a", "branch": "flat", "k": 3})
    with pytest.raises(SpaceError):
        space.validate({"x": 2.0, "c": "a", "branch": "flat"})
    with pytest.raises(SpaceError):
        space.validate({"c": "a", "branch": "flat"})


def test_int_and_log_parameters_stay_in_range():
    space = SearchSpace([int_uniform("k", 2, 4), log_uniform("g", 1e-2, 1e2)])
    rng = np.random.default_rng(0)
    samples = [space.sample_random(rng) for _ in range(400)]
    assert {s["k"] for s in samples} == {2, 3, 4}
    logs = np.log10([s["g"] for s in samples])
    assert logs.min() >= -2 and logs.max() <= 2 and abs(np.median(logs)) < 0.4


def test_split_good_bad_uses_quantile_and_stable_ties():
    good, bad = split_good_bad([3, 1, 2, 1, 5, 4, 0, 9], 0.25)
    assert list(good) == [6, 1]
    assert len(bad) == 6
    good, _ = split_good_bad([1.0, 1.0, 1.0, 1.0], 0.25)
    assert list(good) == [0]


def test_parzen_densities_normalize():
    p = uniform("x", 0, 1)
    dens = ParzenNumeric(p, [0.2, 0.25, 0.9])
    xs = np.linspace(0, 1, 2001)
    integral = np.trapezoid([math.exp(dens.log_density(x)) for x in xs], xs)
    assert integral == pytest.approx(1.0, abs=1e-3)
    cat = ParzenCategorical(categorical("c", ("a", "b", "c")), ["a", "a"])
    assert sum(math.exp(cat.log_density(o)) for o in "abc") == pytest.approx(1.0)
    assert cat.log_density("a") > cat.log_density("b")


def hist(space, losses_and_configs):
    return [TrialRecord(i, c, l, "OK") for i, (l, c) in enumerate(losses_and_configs)]


def test_tpe_concentrates_near_optimum():
    space = SearchSpace([uniform("x", 0, 1)])
    rng = np.random.default_rng(0)
    history = []
    for i in range(60):
        cfg = tpe_suggest(space, history, rng)
        history.append(TrialRecord(i, cfg, (cfg["x"] - 0.3) ** 2, "OK"))
    late = [t.config["x"] for t in history[-20:]]
    assert abs(np.mean(late) - 0.3) < 0.1


def test_tpe_falls_back_to_random_on_flat_losses():
    space = toy_space()
    rng = np.random.default_rng(1)
    configs = [space.sample_random(rng) for _ in range(12)]
    history = hist(space, [(1.0, c) for c in configs])
    cfg = tpe_suggest(space, history, np.random.default_rng(2))
    space.validate(cfg)


@given(st.integers(0, 1000))
def test_tpe_suggestions_always_valid(seed):
    space = toy_space()
    rng = np.random.default_rng(seed)
    history = []
    for i in range(14):
        cfg = tpe_suggest(space, history, rng)
        space.validate(cfg)
        history.append(TrialRecord(i, cfg, toy_loss(cfg), "OK"))


def test_optimize_is_deterministic_and_monotone():
    space = toy_space()
    a = optimize(space, toy_loss, Budget(max_trials=30), seed=5)
    b = optimize(space, toy_loss, Budget(max_trials=30), seed=5)
    assert history_to_csv(a.history) == history_to_csv(b.history)
    trace = a.best_so_far()
    assert all(x >= y for x, y in zip(trace, trace[1:]))
    assert a.best_loss == trace[-1] == min(t.loss for t in a.history)


def test_short_run_is_prefix_of_long_run():
    space = toy_space()
    short = optimize(space, toy_loss, Budget(max_trials=12), seed=3)
    long = optimize(space, toy_loss, Budget(max_trials=30), seed=3)
    assert [t.config for t in short.history] == [t.config for t in long.history[:12]]


def test_failures_and_timeouts_are_recorded():
    def objective(cfg):
        if cfg["c"] == "a":
            raise RuntimeError("boom")
        if cfg["c"] == "b":
            while True:
                check_deadline()
        return toy_loss(cfg)

    res = optimize(toy_space(), objective, Budget(max_trials=20), seed=0, trial_timeout=0.02)
    statuses = {t.status for t in res.history}
    assert statuses == {"OK", "FAILED", "TIMEOUT"}
    assert all(math.isinf(t.loss) for t in res.history if t.status != "OK")
    assert any("boom" in t.error for t in res.history)


def test_no_successful_trial_raises():
    with pytest.raises(NoResultError):
        optimize(toy_space(), lambda c: float("nan"), Budget(max_trials=3))


def test_time_budget_stops_search():
    start = time.monotonic()
    res = optimize(toy_space(), lambda c: (time.sleep(0.01), toy_loss(c))[1], Budget(max_seconds=0.3))
    assert time.monotonic() - start < 2.0
    assert 1 <= len(res.history) < 100


def test_parallel_workers_complete_budget():
    res = optimize(toy_space(), toy_loss, Budget(max_trials=8), seed=0, workers=2)
    assert sorted(t.index for t in res.history) == list(range(8))


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget()
    with pytest.raises(ValueError):
        Budget(max_trials=0)
    assert Budget(max_seconds=100).default_trial_timeout() == 5


def test_trials_csv_columns_and_timing_flag():
    res = optimize(toy_space(), toy_loss, Budget(max_trials=5), seed=0)
    lines = history_to_csv(res.history).splitlines()
    assert lines[0].startswith("index,status,loss,")
    assert "seconds" not in lines[0]
    assert history_to_csv(res.history, timing=True).splitlines()[0].startswith("index,status,loss,seconds,")
    assert len(lines) == 6


def test_best_so_far_skips_non_finite():
    assert best_so_far([math.inf, 3.0, 4.0, 1.0, math.inf]) == [math.inf, 3.0, 3.0, 1.0, 1.0]
