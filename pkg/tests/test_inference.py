import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset
from mediation import AnalysisConfig, Intervention, bootstrap_effects, mediation_analysis, quantile_ci
from mediation.errors import BootstrapFailure, ConfigError
from mediation.inference import bootstrap_pvalue, summarize
from mediation.sim import SURVIVAL_INTERVENTION, SurvivalSimConfig, gen_survival


def test_quantile_ci_on_1_to_100():
    lo, hi = quantile_ci(np.arange(1.0, 101.0), 0.95)
    assert lo == pytest.approx(3.475, abs=1e-12)
    assert hi == pytest.approx(97.525, abs=1e-12)


def test_quantile_ci_constant_and_two_points():
    assert quantile_ci(np.full(7, 2.5)) == (2.5, 2.5)
    a, b = 1.0, 3.0
    lo, hi = quantile_ci([b, a], 0.95)
    assert lo == pytest.approx(a + 0.025 * (b - a))
    assert hi == pytest.approx(b - 0.025 * (b - a))


def test_quantile_ci_rejects_bad_level():
    with pytest.raises(ValueError):
        quantile_ci([1.0, 2.0], 1.0)


def test_degenerate_replicates_give_point_interval_and_unit_pvalue():
    reps = np.full((200, 3), 0.7)
    est = mediation_analysis(random_dataset(np.random.default_rng(0), "linear"), "linear")
    res = summarize(est, reps, 0.95, seed=0, null_value=0.7)
    assert res.intervals[1] == (0.7, 0.7)
    assert res.p_values == (1.0, 1.0, 1.0)


def test_pvalue_without_ties_is_twice_smaller_tail():
    s = np.arange(1.0, 101.0) - 10.5  # 10 below zero, 90 above
    assert bootstrap_pvalue(s, 0.0) == pytest.approx(0.2, abs=1e-15)
    assert bootstrap_pvalue(s + 1000, 0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=5, max_size=60), st.floats(0.01, 20), st.floats(0.01, 20))
def test_pvalue_monotone_in_shift(samples, a, b):
    s = np.array(samples) - np.max(samples)  # all replicates at or below 0
    near, far = sorted((a, b))
    assert bootstrap_pvalue(s - far, 0.0) <= bootstrap_pvalue(s - near, 0.0)


def _estimate():
    return mediation_analysis(random_dataset(np.random.default_rng(1), "linear"), "linear")


def test_failed_replicates_are_dropped_and_counted():
    reps = np.random.default_rng(2).standard_normal((100, 3))
    reps[:10] = np.nan
    res = summarize(_estimate(), reps, 0.95, seed=0)
    assert res.failed_replicates == 10
    assert res.successful.shape == (90, 3)


def test_too_many_failures_raise():
    reps = np.random.default_rng(2).standard_normal((100, 3))
    reps[:11] = np.nan
    with pytest.raises(BootstrapFailure):
        summarize(_estimate(), reps, 0.95, seed=0)


def test_minimum_B(rng):
    ds = random_dataset(rng, "linear")
    with pytest.raises(ConfigError):
        bootstrap_effects(ds, AnalysisConfig("linear"), B=50)


def test_result_independent_of_worker_count(rng):
    ds = random_dataset(rng, "cox", n=80)
    cfg = AnalysisConfig("cox", L=2.0, seed=3)
    iv = Intervention(0, -1.0, 1.0)
    a = bootstrap_effects(ds, cfg, B=100, iv=iv, workers=1)
    b = bootstrap_effects(ds, cfg, B=100, iv=iv, workers=2)
    assert np.array_equal(a.replicates, b.replicates, equal_nan=True)
    assert a.to_dict() == b.to_dict()


def test_bootstrap_interval_contains_estimate(rng):
    ds = random_dataset(rng, "logistic", n=200)
    res = bootstrap_effects(ds, AnalysisConfig("logistic", seed=1), B=100, iv=Intervention(0, 0.0, 1.0))
    for k in range(3):
        lo, hi = res.intervals[k]
        assert lo <= res.estimate.as_tuple()[k] <= hi
    assert res.null_value == 1.0


@pytest.mark.slow
def test_interval_width_shrinks_with_n():
    def median_width(n):
        cfg = SurvivalSimConfig.design("strong", n, 5)
        widths = []
        for run in range(100):
            ds = gen_survival(cfg, seed=run)
            res = bootstrap_effects(ds, AnalysisConfig("cox", L=cfg.horizon, seed=run), B=100, iv=SURVIVAL_INTERVENTION)
            lo, hi = res.intervals[1]
            widths.append(hi - lo)
        return np.median(widths)

    assert median_width(800) < median_width(200)
