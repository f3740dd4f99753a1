"""Data generators for the logistic bias study and the survival coverage/power studies."""

import functools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from . import rng as rngmod
from .dataset import Binary, Dataset, Intervention, Survival
from .effects import CounterfactualTriple, effects_from_triple

# mediator level and exposure level both run 0 -> 1 in every simulation study
LOGISTIC_INTERVENTION = Intervention(0, 0.0, 1.0)
SURVIVAL_INTERVENTION = Intervention(0, 0.0, 1.0)
REFERENCE_DRAWS = 1_000_000


@dataclass(frozen=True)
class LogisticSimConfig:
    """c ~ N(0.12, 0.75^2), x ~ N(0.4, 0.75^2), m | x,c ~ N(0.1 + 0.5x + 0.4c, 0.75^2),
    logit P(y=1 | x,m,c) = k + 0.4x + 0.5m + 0.25c."""

    n: int = 500
    k: float = 0.0
    c_mean: float = 0.12
    c_sd: float = 0.75
    x_mean: float = 0.4
    x_sd: float = 0.75
    m_intercept: float = 0.1
    m_x: float = 0.5
    m_c: float = 0.4
    m_sd: float = 0.75
    y_x: float = 0.4
    y_m: float = 0.5
    y_c: float = 0.25

    def __post_init__(self):
        if self.n < 10:
            raise ValueError("n must be at least 10")

    def to_dict(self):
        return {"design": "logistic", **asdict(self)}


def gen_logistic(cfg, seed):
    g = rngmod.stream(seed, rngmod.SIM)
    n = cfg.n
    c = g.normal(cfg.c_mean, cfg.c_sd, n)
    x = g.normal(cfg.x_mean, cfg.x_sd, n)
    m = g.normal(cfg.m_intercept + cfg.m_x * x + cfg.m_c * c, cfg.m_sd)
    prob = expit(cfg.k + cfg.y_x * x + cfg.y_m * m + cfg.y_c * c)
    y = (g.random(n) < prob).astype(float)
    return Dataset(x[:, None], m[:, None], Binary(y), c[:, None],
                   exposure_names=("x",), mediator_names=("m",), covariate_names=("c",))


@functools.lru_cache(maxsize=8)
def _logistic_reference(cfg, draws=REFERENCE_DRAWS):
    """Linear predictor without k on a fixed reference population."""
    g = rngmod.stream(0, rngmod.ORACLE, 1)
    c = g.normal(cfg.c_mean, cfg.c_sd, draws)
    x = g.normal(cfg.x_mean, cfg.x_sd, draws)
    m = g.normal(cfg.m_intercept + cfg.m_x * x + cfg.m_c * c, cfg.m_sd)
    return cfg.y_x * x + cfg.y_m * m + cfg.y_c * c


def _with_k(cfg, k):
    return LogisticSimConfig(**{**asdict(cfg), "k": k, "n": 10})


def prevalence(cfg):
    """Population P(y=1) by Monte Carlo on a fixed reference sample."""
    return float(expit(cfg.k + _logistic_reference(_with_k(cfg, 0.0))).mean())


def k_for_prevalence(target, cfg=None, lo=-30.0, hi=10.0, tol=1e-10):
    """Intercept ``k`` giving population prevalence ``target`` (bisection)."""
    if not 0 < target < 1:
        raise ValueError("target prevalence must be in (0, 1)")
    base = _logistic_reference(_with_k(cfg or LogisticSimConfig(), 0.0))

    def prev(k):
        return expit(k + base).mean()

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if prev(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SurvivalSimConfig:
    """Binary exposure, linear mediators, exponential survival, exponential censoring.

    True mediators are ``slope * x + mediator_noise_sd * z`` with the slope
    chosen so that each has regression R^2 ``mediator_r2`` on the exposure.
    Noise mediators are standard normal and unrelated to everything else.
    Hazard is ``baseline_rate * exp(direct_coef * x + coef * sum(true mediators))``.
    """

    n: int = 400
    n_true_mediators: int = 5
    n_noise_mediators: int = 0
    exposure_prevalence: float = 0.5
    mediator_r2: float = 0.2
    direct_coef: float = 0.5
    mediator_response_coef: float = 0.2
    censoring_fraction: float = 0.5
    # time scale (rate and horizon) set so the strong / weak oracle IEs sit near -695 / -429
    baseline_rate: float = 1 / 1900
    mediator_noise_sd: float = 1.0
    horizon: float = 3800.0

    def __post_init__(self):
        if not 0 < self.mediator_r2 < 1:
            raise ValueError("mediator_r2 must be in (0, 1)")
        if min(self.n_true_mediators, self.n_noise_mediators) < 0:
            raise ValueError("mediator counts must be nonnegative")
        if self.n_true_mediators + self.n_noise_mediators < 1:
            raise ValueError("need at least one mediator")
        if not 0 < self.exposure_prevalence < 1:
            raise ValueError("exposure_prevalence must be in (0, 1)")
        if not 0 <= self.censoring_fraction < 1:
            raise ValueError("censoring_fraction must be in [0, 1)")
        if self.n < 10:
            raise ValueError("n must be at least 10")

    @classmethod
    def design(cls, strength, n, n_mediators, **kw):
        """Preset: strength in {null, weak, strong}; ``n_mediators`` counts 5 true + noise."""
        coef = {"null": 0.0, "weak": 0.1, "strong": 0.2}[strength]
        return cls(n=n, n_true_mediators=5, n_noise_mediators=n_mediators - 5, mediator_response_coef=coef, **kw)

    @property
    def slope(self):
        sd_x = math.sqrt(self.exposure_prevalence * (1 - self.exposure_prevalence))
        return self.mediator_noise_sd * math.sqrt(self.mediator_r2 / (1 - self.mediator_r2)) / sd_x

    @property
    def r(self):
        return self.n_true_mediators + self.n_noise_mediators

    def to_dict(self):
        return {"design": "survival", **asdict(self)}


def _hazard(cfg, x, m_true):
    return cfg.baseline_rate * np.exp(cfg.direct_coef * x + cfg.mediator_response_coef * m_true.sum(axis=1))


@functools.lru_cache(maxsize=64)
def censoring_rate(cfg):
    """Exponential censoring rate giving P(censored) = ``censoring_fraction``.

    Solved on a fixed reference population, where
    P(censored | hazard h) = rate / (rate + h).
    """
    if cfg.censoring_fraction == 0:
        return 0.0
    g = rngmod.stream(0, rngmod.ORACLE, 2)
    N = 200_000
    x = (g.random(N) < cfg.exposure_prevalence).astype(float)
    m = cfg.slope * x[:, None] + cfg.mediator_noise_sd * g.standard_normal((N, cfg.n_true_mediators))
    h = _hazard(cfg, x, m)

    def gap(log_rate):
        rate = math.exp(log_rate)
        return float((rate / (rate + h)).mean()) - cfg.censoring_fraction

    return math.exp(brentq(gap, -40.0, 20.0, xtol=1e-12))


def gen_survival(cfg, seed):
    g = rngmod.stream(seed, rngmod.SIM)
    n = cfg.n
    x = (g.random(n) < cfg.exposure_prevalence).astype(float)
    m_true = cfg.slope * x[:, None] + cfg.mediator_noise_sd * g.standard_normal((n, cfg.n_true_mediators))
    m_noise = g.standard_normal((n, cfg.n_noise_mediators))
    t_event = g.exponential(1.0, n) / _hazard(cfg, x, m_true)
    rate = censoring_rate(cfg)
    t_cens = g.exponential(1.0, n) / rate if rate > 0 else np.full(n, np.inf)
    time = np.minimum(t_event, t_cens)
    event = (t_event <= t_cens).astype(float)
    M = np.hstack([m_true, m_noise])
    names = tuple(f"m{j + 1}" for j in range(cfg.r))
    return Dataset(x[:, None], M, Survival(time, event), exposure_names=("x",), mediator_names=names)


def _rmst_exponential(hazard, L):
    return -np.expm1(-hazard * L) / hazard


def true_effects_oracle(cfg, L=None, draws=REFERENCE_DRAWS, seed=0):
    """Population effects by brute-force Monte Carlo on the generating model.

    Survival designs return restricted-mean differences at horizon ``L``
    (default ``cfg.horizon``); the logistic design returns odds ratios for
    the intervention x: 0 -> 1. Mediator noise is shared across levels.
    """
    g = rngmod.stream(seed, rngmod.ORACLE, 3)
    if isinstance(cfg, LogisticSimConfig):
        c = g.normal(cfg.c_mean, cfg.c_sd, draws)
        z = g.standard_normal(draws)
        iv = LOGISTIC_INTERVENTION
        levels = (iv.x_low, iv.x_high)

        def e(a, b):
            m = cfg.m_intercept + cfg.m_x * levels[a] + cfg.m_c * c + cfg.m_sd * z
            return float(expit(cfg.k + cfg.y_x * levels[b] + cfg.y_m * m + cfg.y_c * c).mean())

        t = CounterfactualTriple(e(0, 0), e(0, 1), e(1, 1), "probability", draws, seed)
        return effects_from_triple(t, "odds_ratio", iv)
    L = cfg.horizon if L is None else L
    z = g.standard_normal((draws, cfg.n_true_mediators))
    iv = SURVIVAL_INTERVENTION
    levels = (iv.x_low, iv.x_high)

    def e(a, b):
        m = cfg.slope * levels[a] + cfg.mediator_noise_sd * z
        return float(_rmst_exponential(_hazard(cfg, np.full(draws, levels[b]), m), L).mean())

    t = CounterfactualTriple(e(0, 0), e(0, 1), e(1, 1), "restricted_mean", draws, seed)
    return effects_from_triple(t, "restricted_mean_difference", iv)


def gen_pathway_example(n=470, seed=0, horizon=2000.0):
    """Five correlated exposures, five mediators, censored survival.

    Shaped like a multi-omic pathway study: standardized exposure scores
    sharing a latent factor, mediators driven by the exposures, roughly a
    third of subjects with observed deaths.
    """
    g = rngmod.stream(seed, rngmod.SIM, 9)
    p = r = 5
    h = g.standard_normal(n)
    X = 0.5 * h[:, None] + g.standard_normal((n, p))
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    beta_x = np.array([
        [0.5, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.4, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.6, 0.0, 0.0],
        [0.0, 0.0, 0.3, 0.4, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.5],
    ])
    chol = np.linalg.cholesky(0.5 * np.eye(r) + 0.5 * np.full((r, r), 0.3) + 0.15 * np.eye(r))
    M = X @ beta_x.T + g.standard_normal((n, r)) @ chol.T
    lp = X @ np.array([0.15, -0.2, 0.3, 0.0, 0.2]) + M @ np.array([0.0, 0.0, -0.3, 0.1, 0.0])
    t_event = g.exponential(1.0, n) / (np.exp(lp) / 4000.0)
    t_cens = g.uniform(500.0, 3000.0, n)
    time = np.minimum(t_event, t_cens)
    event = (t_event <= t_cens).astype(float)
    names_x = ("PTEN", "TCA_cycle", "Fatty_acid_synthesis", "AMPK", "Pentose_phosphate")
    names_m = ("AMPK_alpha", "AMPK_pT172", "ACC_pS79", "ACC", "PTEN_protein")
    return Dataset(X, M, Survival(time, event), exposure_names=names_x, mediator_names=names_m)
