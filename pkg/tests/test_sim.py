import numpy as np
import pytest

from mediation.approx import large_sample_truth
from mediation.sim import (
    LogisticSimConfig,
    SurvivalSimConfig,
    censoring_rate,
    gen_logistic,
    gen_pathway_example,
    gen_survival,
    k_for_prevalence,
    prevalence,
    true_effects_oracle,
)


def test_very_low_intercept_gives_rare_outcome():
    cfg = LogisticSimConfig(n=1000, k=-20.0)
    assert prevalence(cfg) < 0.01
    assert gen_logistic(cfg, 0).outcome.values.mean() < 0.01


@pytest.mark.parametrize("target", [0.05, 0.25, 0.5])
def test_k_hits_target_prevalence(target):
    k = k_for_prevalence(target)
    assert prevalence(LogisticSimConfig(k=k)) == pytest.approx(target, abs=1e-8)
    ds = gen_logistic(LogisticSimConfig(n=10_000, k=k), seed=1)
    assert abs(ds.outcome.values.mean() - target) < 0.03


def test_generator_is_deterministic():
    cfg = SurvivalSimConfig.design("strong", 50, 7)
    a, b = gen_survival(cfg, 4), gen_survival(cfg, 4)
    assert np.array_equal(a.mediators, b.mediators) and np.array_equal(a.outcome.time, b.outcome.time)
    assert not np.array_equal(a.mediators, gen_survival(cfg, 5).mediators)


def test_survival_generator_calibration():
    cfg = SurvivalSimConfig.design("strong", 100_000, 10)
    ds = gen_survival(cfg, seed=2)
    x = ds.exposures[:, 0]
    n = ds.n
    for j in range(5):
        r2 = np.corrcoef(x, ds.mediators[:, j])[0, 1] ** 2
        assert abs(r2 - 0.2) < 0.02
    assert abs(1 - ds.outcome.event.mean() - 0.5) < 0.03
    for j in range(5, 10):
        noise = ds.mediators[:, j]
        assert abs(np.corrcoef(noise, x)[0, 1]) < 3 / np.sqrt(n)
        assert abs(np.corrcoef(noise, np.log(ds.outcome.time))[0, 1]) < 3 / np.sqrt(n)


def test_censoring_rate_is_positive_and_cached():
    cfg = SurvivalSimConfig()
    assert censoring_rate(cfg) > 0
    assert censoring_rate(cfg) is censoring_rate(SurvivalSimConfig())
    assert censoring_rate(SurvivalSimConfig(censoring_fraction=0.0)) == 0.0


def test_null_oracle_has_no_indirect_effect():
    est = true_effects_oracle(SurvivalSimConfig.design("null", 400, 5), draws=10_000)
    assert est.indirect == 0.0
    assert est.direct < 0  # positive log-hazard shortens restricted survival


def test_logistic_oracle_without_mediator_path():
    est = true_effects_oracle(LogisticSimConfig(y_m=0.0), draws=10_000)
    assert est.indirect == 1.0


@pytest.mark.parametrize("strength, target", [("strong", -695.0), ("weak", -429.0)])
def test_survival_oracle_hits_calibration_targets(strength, target):
    est = true_effects_oracle(SurvivalSimConfig.design(strength, 800, 5))
    assert abs(est.indirect - target) <= 0.1 * abs(target)


def test_large_sample_truth_agrees_with_generator_oracle():
    cfg = LogisticSimConfig(k=k_for_prevalence(0.3))
    oracle = true_effects_oracle(cfg)
    truth = large_sample_truth(cfg, seed=1)
    assert truth.de_odds == pytest.approx(oracle.direct, rel=0.03)
    assert truth.ie_odds == pytest.approx(oracle.indirect, rel=0.03)


def test_pathway_example_shape():
    ds = gen_pathway_example(470, seed=0)
    assert (ds.n, ds.p, ds.r, ds.q) == (470, 5, 5, 0)
    assert 0.15 < ds.outcome.event.mean() < 0.6
