"""Mediator regression system and the linear / logistic outcome models."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConvergenceError, DataError, RankDeficiencyError, SeparationError
from .mvn import CholeskyFactor, cholesky, lstsq_qr

SEPARATION_NORM = 1e3
MAX_HALVINGS = 20


def mediator_design(X, C):
    n = X.shape[0]
    return np.hstack([X, C, np.ones((n, 1))])


def outcome_design(X, M, C, intercept=True):
    n = X.shape[0]
    blocks = [X, M, C] + ([np.ones((n, 1))] if intercept else [])
    return np.hstack(blocks)


def _design_names(ds, with_mediators, intercept=True):
    names = list(ds.exposure_names)
    if with_mediators:
        names += list(ds.mediator_names)
    names += list(ds.covariate_names)
    return names + (["(intercept)"] if intercept else [])


def _arr(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MediatorModel:
    """m = beta_x x + beta_c c + beta_0 + eps,  eps ~ N(0, sigma_eps)."""

    beta_x: np.ndarray  # (r, p)
    beta_c: np.ndarray  # (r, q)
    beta_0: np.ndarray  # (r,)
    sigma_eps: np.ndarray  # (r, r)
    cholesky_factor: CholeskyFactor
    covariance_mode: str = "full"

    @property
    def r(self):
        return self.beta_x.shape[0]

    def mean(self, X, C):
        """Conditional mediator means, shape (n, r)."""
        return X @ self.beta_x.T + C @ self.beta_c.T + self.beta_0

    def to_dict(self):
        return {
            "type": "mediator",
            "covariance_mode": self.covariance_mode,
            "beta_x": self.beta_x.tolist(),
            "beta_c": self.beta_c.tolist(),
            "beta_0": self.beta_0.tolist(),
            "sigma_eps": self.sigma_eps.tolist(),
            "cholesky_jitter": self.cholesky_factor.jitter_applied,
        }

    @classmethod
    def from_dict(cls, d):
        r = len(d["beta_0"])
        sigma = np.array(d["sigma_eps"], dtype=float).reshape(r, r)
        return cls(
            _arr(np.array(d["beta_x"], dtype=float).reshape(r, -1)),
            _arr(np.array(d["beta_c"], dtype=float).reshape(r, -1)),
            _arr(d["beta_0"]),
            _arr(sigma),
            cholesky(sigma),
            d.get("covariance_mode", "full"),
        )


def _ols(D, y, names):
    coef = lstsq_qr(D, y, names=names)
    return coef, y - D @ coef


def fit_mediators(ds, mode="full"):
    """Least-squares fit of each mediator on ``[X | C | 1]``.

    The residual covariance uses divisor ``n - (p + q + 1)``. With
    ``mode="diagonal"`` off-diagonal entries are zeroed, which is the same
    as fitting each mediator in its own univariate regression.
    """
    if mode not in ("full", "diagonal"):
        raise ValueError(f"covariance mode must be 'full' or 'diagonal', got {mode!r}")
    D = mediator_design(ds.exposures, ds.covariates)
    n, k = D.shape
    dof = n - k
    if dof <= 0:
        raise RankDeficiencyError(f"n={n} rows leave no residual degrees of freedom for {k} mediator-model terms")
    names = _design_names(ds, with_mediators=False)
    coefs, resid = [], []
    for j in range(ds.r):
        b, e = _ols(D, ds.mediators[:, j], names)
        coefs.append(b)
        resid.append(e)
    B = np.array(coefs)  # (r, k)
    R = np.column_stack(resid)
    sigma = R.T @ R / dof
    sigma = 0.5 * (sigma + sigma.T)
    if mode == "diagonal":
        sigma = np.diag(np.diag(sigma))
    p, q = ds.p, ds.q
    return MediatorModel(
        beta_x=_arr(B[:, :p]),
        beta_c=_arr(B[:, p:p + q]),
        beta_0=_arr(B[:, -1]),
        sigma_eps=_arr(sigma),
        cholesky_factor=cholesky(sigma),
        covariance_mode=mode,
    )


class _OutcomeBase:
    def linear_predictor(self, X, M, C):
        """x'alpha_x + m'alpha_m + c'alpha_c (+ alpha_0 where defined)."""
        return X @ self.alpha_x + M @ self.alpha_m + C @ self.alpha_c + self.alpha_0

    def _coef_dict(self):
        return {
            "alpha_x": self.alpha_x.tolist(),
            "alpha_m": self.alpha_m.tolist(),
            "alpha_c": self.alpha_c.tolist(),
            "alpha_0": float(self.alpha_0),
        }


def _split(coef, p, r, q):
    return (
        _arr(coef[:p]),
        _arr(coef[p:p + r]),
        _arr(coef[p + r:p + r + q]),
        float(coef[p + r + q]) if coef.shape[0] > p + r + q else 0.0,
    )


@dataclass(frozen=True)
class LinearOutcome(_OutcomeBase):
    alpha_x: np.ndarray
    alpha_m: np.ndarray
    alpha_c: np.ndarray
    alpha_0: float
    sigma_delta: float
    family = "linear"

    def conditional_mean(self, lp):
        return lp

    def to_dict(self):
        return {"type": "linear", **self._coef_dict(), "sigma_delta": self.sigma_delta}

    @classmethod
    def from_dict(cls, d):
        return cls(_arr(d["alpha_x"]), _arr(d["alpha_m"]), _arr(d["alpha_c"]), float(d["alpha_0"]), float(d["sigma_delta"]))


def fit_linear(ds):
    if ds.outcome_kind != "continuous":
        raise DataError(f"linear outcome model needs a continuous outcome, got {ds.outcome_kind}")
    D = outcome_design(ds.exposures, ds.mediators, ds.covariates)
    y = ds.outcome.values
    coef, resid = _ols(D, y, _design_names(ds, with_mediators=True))
    dof = D.shape[0] - D.shape[1]
    sigma = float(np.sqrt(resid @ resid / dof)) if dof > 0 else 0.0
    return LinearOutcome(*_split(coef, ds.p, ds.r, ds.q), sigma_delta=sigma)


@dataclass(frozen=True)
class LogisticOutcome(_OutcomeBase):
    alpha_x: np.ndarray
    alpha_m: np.ndarray
    alpha_c: np.ndarray
    alpha_0: float
    converged: bool = True
    iterations: int = 0
    family = "logistic"

    def conditional_mean(self, lp):
        return expit(lp)

    def to_dict(self):
        return {"type": "logistic", **self._coef_dict(), "converged": self.converged, "iterations": self.iterations}

    @classmethod
    def from_dict(cls, d):
        return cls(
            _arr(d["alpha_x"]), _arr(d["alpha_m"]), _arr(d["alpha_c"]), float(d["alpha_0"]),
            bool(d.get("converged", True)), int(d.get("iterations", 0)),
        )


def logistic_loglik(beta, D, y):
    eta = D @ beta
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def logistic_score(beta, D, y):
    return D.T @ (y - expit(D @ beta))


def logistic_information(beta, D):
    mu = expit(D @ beta)
    w = mu * (1.0 - mu)
    return D.T @ (D * w[:, None])


def irls(D, y, max_iter=50, tol=1e-8):
    """Newton / IRLS maximisation of the Bernoulli log-likelihood.

    Returns ``(beta, converged, iterations)``. Each step is halved (up to
    ``MAX_HALVINGS`` times) until the log-likelihood does not decrease.
    Converges when the max-norm of the score drops below ``tol`` or when a
    step gains less than ``tol`` in log-likelihood.
    """
    n, k = D.shape
    beta = np.zeros(k)
    ll = logistic_loglik(beta, D, y)
    for it in range(1, max_iter + 1):
        score = logistic_score(beta, D, y)
        if np.abs(score).max() < tol:
            return beta, True, it - 1
        info = logistic_information(beta, D)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise SeparationError("information matrix became singular; likely separation") from None
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            ll_new = logistic_loglik(cand, D, y)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            return beta, True, it
        gain = ll_new - ll
        beta, ll = cand, ll_new
        if np.abs(beta).max() > SEPARATION_NORM:
            raise SeparationError(f"coefficient norm exceeded {SEPARATION_NORM:g}; data appear separated")
        if ll > -1e-8 * n:
            raise SeparationError("fitted probabilities reproduce every label; data are completely separated")
        if gain < tol and np.abs(logistic_score(beta, D, y)).max() < np.sqrt(tol):
            return beta, True, it
    if np.abs(beta).max() > 25:
        raise SeparationError(f"no convergence in {max_iter} iterations with |beta| = {np.abs(beta).max():.1f}; likely separation")
    raise ConvergenceError(f"logistic fit did not converge in {max_iter} iterations")


def fit_logistic(ds, max_iter=50, tol=1e-8):
    if ds.outcome_kind != "binary":
        raise DataError(f"logistic outcome model needs a binary outcome, got {ds.outcome_kind}")
    y = ds.outcome.values
    if y.min() == y.max():
        raise DataError("binary outcome has a single class")
    D = outcome_design(ds.exposures, ds.mediators, ds.covariates)
    # rank check before iterating
    lstsq_qr(D, np.zeros(D.shape[0]), names=_design_names(ds, with_mediators=True))
    beta, converged, its = irls(D, y, max_iter=max_iter, tol=tol)
    return LogisticOutcome(*_split(beta, ds.p, ds.r, ds.q), converged=converged, iterations=its)
