"""Closed-form baselines for odds-scale effects with a logistic outcome."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .effects import CounterfactualTriple, effects_from_triple, estimate_triple
from .glm import fit_logistic, fit_mediators

# logistic(z) ~ Phi(z / PROBIT_SCALE)
PROBIT_SCALE = 1.7


@dataclass(frozen=True)
class ApproxEffects:
    method: str
    de_odds: float
    ie_odds: float
    extension: bool = False  # multivariate generalisation of a univariate formula
    triple: CounterfactualTriple = None

    def __post_init__(self):
        if not (self.de_odds > 0 and self.ie_odds > 0):
            raise ValueError("odds-scale effects must be positive")


def rare_disease_effects(med, out, iv):
    """exp(alpha_x * dx) and exp(beta_x' alpha_m * dx)."""
    i, dx = iv.exposure_index, iv.delta
    de = float(np.exp(out.alpha_x[i] * dx))
    ie = float(np.exp(med.beta_x[:, i] @ out.alpha_m * dx))
    return ApproxEffects("rare_disease", de, ie, extension=med.r > 1)


def probit_effects(med, out, iv, ds, scale=PROBIT_SCALE):
    """Probit approximation with the normal mediator integrated out exactly.

    P(y=1 | x, c, mediator level a)
        = Phi((lp(x, c) + alpha_m' mu(a, c)) / sqrt(s^2 + alpha_m' Sigma alpha_m)),
    averaged over the observed rows to give the counterfactual triple.
    """
    X, C = ds.exposures, ds.covariates
    i = iv.exposure_index
    levels = (iv.x_low, iv.x_high)
    Xs = []
    for a in levels:
        Xa = X.copy()
        Xa[:, i] = a
        Xs.append(Xa)
    denom = np.sqrt(scale ** 2 + out.alpha_m @ med.sigma_eps @ out.alpha_m)

    def e(a, b):
        lp = Xs[b] @ out.alpha_x + C @ out.alpha_c + out.alpha_0 + med.mean(Xs[a], C) @ out.alpha_m
        return float(norm.cdf(lp / denom).mean())

    t = CounterfactualTriple(e(0, 0), e(0, 1), e(1, 1), "probability", 0, 0)
    est = effects_from_triple(t, "odds_ratio", iv)
    return ApproxEffects("probit", est.direct, est.indirect, extension=med.r > 1, triple=t)


def numeric_effects(ds, iv, draws=1, seed=0, med=None, out=None):
    """The Monte Carlo estimator on the odds scale, for side-by-side comparison."""
    med = med or fit_mediators(ds)
    out = out or fit_logistic(ds)
    t = estimate_triple(ds, med, out, iv, draws=draws, seed=seed)
    est = effects_from_triple(t, "odds_ratio", iv)
    return ApproxEffects("numeric", est.direct, est.indirect, triple=t)


def all_methods(ds, iv, draws=1, seed=0):
    med = fit_mediators(ds)
    out = fit_logistic(ds)
    return (
        numeric_effects(ds, iv, draws, seed, med, out),
        rare_disease_effects(med, out, iv),
        probit_effects(med, out, iv, ds),
    )


def large_sample_truth(cfg, seed=0, n=200_000, draws=8):
    """Reference effects from one very large numeric run on the generator."""
    from .sim import LOGISTIC_INTERVENTION, gen_logistic, LogisticSimConfig

    big = LogisticSimConfig(**{**cfg.__dict__, "n": n})
    ds = gen_logistic(big, seed)
    return numeric_effects(ds, LOGISTIC_INTERVENTION, draws=draws, seed=seed)
