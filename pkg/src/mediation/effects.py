"""Monte Carlo counterfactual expectations and natural direct/indirect effects.

``e(a, b)`` is the outcome expectation with exposure ``i`` set to ``b`` and
mediators drawn from their fitted distribution under exposure ``a``,
averaged over the observed rows of the other exposures and covariates.
"""

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import rng as rngmod
from .dataset import Intervention, default_intervention
from .errors import ConfigError, DataError
from .glm import fit_linear, fit_logistic, fit_mediators
from .survival import fit_cox

FAMILIES = ("linear", "logistic", "cox")
SCALES = ("mean_difference", "odds_ratio", "restricted_mean_difference")
BASIS = {"linear": "expectation", "logistic": "probability", "cox": "restricted_mean"}
DEFAULT_SCALE = {"linear": "mean_difference", "logistic": "odds_ratio", "cox": "restricted_mean_difference"}
PROB_CLIP = 1e-12
FAMILY_FOR_OUTCOME = {"continuous": "linear", "binary": "logistic", "survival": "cox"}
NULL_VALUE = {"mean_difference": 0.0, "odds_ratio": 1.0, "restricted_mean_difference": 0.0}


@dataclass(frozen=True)
class CounterfactualTriple:
    e_low_low: float  # e(x', x')
    e_low_high: float  # e(x', x'')
    e_high_high: float  # e(x'', x'')
    scale_basis: str
    mc_draws_per_sample: int = 1
    seed: int = 0

    def values(self):
        return (self.e_low_low, self.e_low_high, self.e_high_high)


@dataclass(frozen=True)
class EffectEstimate:
    scale: str
    direct: float
    indirect: float
    total: float
    triple: CounterfactualTriple
    intervention: Intervention = None

    def as_tuple(self):
        return (self.direct, self.indirect, self.total)

    def to_dict(self):
        return {
            "scale": self.scale,
            "direct": self.direct,
            "indirect": self.indirect,
            "total": self.total,
            "e_triple": {
                "e_low_low": self.triple.e_low_low,
                "e_low_high": self.triple.e_low_high,
                "e_high_high": self.triple.e_high_high,
                "basis": self.triple.scale_basis,
            },
            "intervention": None if self.intervention is None else self.intervention.to_dict(),
            "seed": self.triple.seed,
            "draws": self.triple.mc_draws_per_sample,
        }


def fit_outcome(ds, family, max_iter=50, tol=1e-8):
    if family == "linear":
        return fit_linear(ds)
    if family == "logistic":
        return fit_logistic(ds, max_iter=max_iter, tol=tol)
    if family == "cox":
        return fit_cox(ds, max_iter=max_iter, tol=tol)
    raise ConfigError(f"unknown outcome family {family!r}; expected one of {FAMILIES}")


def _check_dims(ds, med, out):
    p, q, r = ds.p, ds.q, ds.r
    if med.beta_x.shape != (r, p) or med.beta_c.shape != (r, q):
        raise DataError(f"mediator model is {med.beta_x.shape[0]}x{med.beta_x.shape[1]}, data have r={r}, p={p}")
    if (out.alpha_x.shape[0], out.alpha_m.shape[0], out.alpha_c.shape[0]) != (p, r, q):
        raise DataError("outcome model dimensions do not match the dataset")


def _noise(med, n, seed, draw, level=None):
    path = (rngmod.MC, draw) if level is None else (rngmod.MC, draw, level)
    z = rngmod.stream(seed, *path).standard_normal((n, med.r))
    return z @ med.cholesky_factor.lower.T


def estimate_triple(ds, med, out, iv, L=None, draws=1, seed=0, crn=True):
    """Monte Carlo estimates of e(x',x'), e(x',x''), e(x'',x'').

    For each observed row the mediator vector is simulated as
    ``beta_x x(a) + beta_c c + beta_0 + eps`` with ``eps ~ N(0, sigma_eps)``
    and plugged into the closed-form conditional mean of the outcome model.
    With ``crn=True`` the same ``eps`` is reused for both mediator levels.
    Results for ``draws > 1`` average independent repetitions.
    """
    basis = BASIS[out.family]
    if out.family == "cox" and (L is None or not L > 0):
        raise ConfigError("Cox outcome requires a positive restriction horizon L")
    if draws < 1:
        raise ConfigError("draws must be at least 1")
    _check_dims(ds, med, out)
    i = iv.exposure_index
    if not 0 <= i < ds.p:
        raise ConfigError(f"exposure index {i} out of range for p={ds.p}")
    X, C, n = ds.exposures, ds.covariates, ds.n
    levels = (iv.x_low, iv.x_high)
    Xs = []
    for a in levels:
        Xa = X.copy()
        Xa[:, i] = a
        Xs.append(Xa)
    mu = [med.mean(Xa, C) for Xa in Xs]
    lp_base = [Xa @ out.alpha_x + C @ out.alpha_c + out.alpha_0 for Xa in Xs]
    pairs = ((0, 0), (0, 1), (1, 1))

    per_draw = np.empty((draws, 3))
    for d in range(draws):
        if crn:
            eps = _noise(med, n, seed, d)
            eps = (eps, eps)
        else:
            eps = (_noise(med, n, seed, d, 0), _noise(med, n, seed, d, 1))
        mbar = [mu[k] + eps[k] for k in range(2)]
        lp = np.concatenate([lp_base[b] + mbar[a] @ out.alpha_m for a, b in pairs])
        vals = out.conditional_mean(lp, L) if basis == "restricted_mean" else out.conditional_mean(lp)
        per_draw[d] = vals.reshape(3, n).mean(axis=1)
    e = per_draw.mean(axis=0)
    return CounterfactualTriple(float(e[0]), float(e[1]), float(e[2]), basis, int(draws), int(seed))


def odds(u):
    return u / (1.0 - u)


def _clip_probs(values):
    v = np.asarray(values, dtype=float)
    if np.any((v < PROB_CLIP) | (v > 1 - PROB_CLIP)):
        warnings.warn("counterfactual probability at the boundary; clipped before taking odds", RuntimeWarning, stacklevel=3)
        v = np.clip(v, PROB_CLIP, 1 - PROB_CLIP)
    return v


def effects_from_triple(t, scale, iv=None):
    """Direct, indirect and total effects from a counterfactual triple.

    Difference scales: DE = e(x',x'') - e(x',x'), IE = e(x'',x'') - e(x',x''),
    TE = DE + IE. Odds scale: the same contrasts as odds ratios, with
    TE = DE * IE.
    """
    ll, lh, hh = t.values()
    if scale == "odds_ratio":
        if t.scale_basis != "probability":
            raise ConfigError(f"odds scale needs a probability basis, got {t.scale_basis}")
        ll, lh, hh = _clip_probs([ll, lh, hh])
        de = float(odds(lh) / odds(ll))
        ie = float(odds(hh) / odds(lh))
        return EffectEstimate(scale, de, ie, de * ie, t, iv)
    if scale == "restricted_mean_difference":
        if t.scale_basis != "restricted_mean":
            raise ConfigError(f"restricted-mean scale needs a restricted_mean basis, got {t.scale_basis}")
    elif scale == "mean_difference":
        if t.scale_basis not in ("expectation", "probability"):
            raise ConfigError(f"mean-difference scale is undefined for a {t.scale_basis} basis")
    else:
        raise ConfigError(f"unknown scale {scale!r}; expected one of {SCALES}")
    de = lh - ll
    ie = hh - lh
    return EffectEstimate(scale, de, ie, de + ie, t, iv)


def check_compatible(family, scale):
    if family not in FAMILIES:
        raise ConfigError(f"unknown outcome family {family!r}; expected one of {FAMILIES}")
    if scale not in SCALES:
        raise ConfigError(f"unknown scale {scale!r}; expected one of {SCALES}")
    ok = {
        "linear": ("mean_difference",),
        "logistic": ("odds_ratio", "mean_difference"),
        "cox": ("restricted_mean_difference",),
    }[family]
    if scale not in ok:
        raise ConfigError(f"scale {scale!r} is incompatible with the {family} outcome family")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything needed to turn a dataset into one effect estimate."""

    family: str
    scale: str = None
    exposure: int = 0
    x_low: float = None  # None -> 2.5th percentile
    x_high: float = None  # None -> 97.5th percentile
    L: float = None
    draws: int = 1
    seed: int = 0
    covariance_mode: str = "full"
    crn: bool = True
    max_iter: int = 50
    tol: float = 1e-8

    def __post_init__(self):
        if self.scale is None:
            object.__setattr__(self, "scale", DEFAULT_SCALE.get(self.family))
        check_compatible(self.family, self.scale)
        if self.family == "cox" and (self.L is None or not self.L > 0):
            raise ConfigError("restricted-mean scale needs a positive horizon L")
        if (self.x_low is None) != (self.x_high is None):
            raise ConfigError("give both x_low and x_high, or neither")
        if self.covariance_mode not in ("full", "diagonal"):
            raise ConfigError(f"covariance_mode must be full or diagonal, got {self.covariance_mode!r}")
        if self.draws < 1:
            raise ConfigError("draws must be at least 1")

    def intervention(self, ds):
        if self.x_low is None:
            return default_intervention(ds, self.exposure)
        return Intervention(self.exposure, float(self.x_low), float(self.x_high))

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return AnalysisConfig(**d)

    def to_dict(self):
        return asdict(self)


def mediation_analysis(ds, family, scale=None, iv=None, L=None, draws=1, seed=0, covariance_mode="full", crn=True,
                       max_iter=50, tol=1e-8):
    """Fit both models on ``ds`` and return the effect estimate. Deterministic given ``seed``."""
    scale = scale or DEFAULT_SCALE.get(family)
    check_compatible(family, scale)
    if iv is None:
        iv = default_intervention(ds, 0)
    med = fit_mediators(ds, covariance_mode)
    out = fit_outcome(ds, family, max_iter=max_iter, tol=tol)
    t = estimate_triple(ds, med, out, iv, L=L, draws=draws, seed=seed, crn=crn)
    return effects_from_triple(t, scale, iv)


def run_config(ds, cfg, iv=None, seed=None):
    """:func:`mediation_analysis` driven by an :class:`AnalysisConfig`."""
    iv = cfg.intervention(ds) if iv is None else iv
    return mediation_analysis(
        ds, cfg.family, cfg.scale, iv, L=cfg.L, draws=cfg.draws,
        seed=cfg.seed if seed is None else seed,
        covariance_mode=cfg.covariance_mode, crn=cfg.crn, max_iter=cfg.max_iter, tol=cfg.tol,
    )
