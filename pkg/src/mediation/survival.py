"""Cox proportional hazards (Breslow ties), Breslow baseline, restricted means."""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DataError, SeparationError
from .glm import MAX_HALVINGS, SEPARATION_NORM, _arr, _design_names, _OutcomeBase, outcome_design
from .mvn import lstsq_qr


@dataclass(frozen=True)
class BaselineHazard:
    """Right-continuous step function H0(t); zero before the first event time."""

    times: np.ndarray
    cum_hazard: np.ndarray

    def __post_init__(self):
        t = _arr(self.times)
        h = _arr(self.cum_hazard)
        if t.shape != h.shape:
            raise ValueError("times and cum_hazard differ in length")
        if t.size and (np.any(np.diff(t) <= 0) or np.any(np.diff(h) < 0) or h[0] < 0):
            raise ValueError("baseline must have increasing times and nondecreasing hazard")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "cum_hazard", h)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.times, t, side="right")
        padded = np.concatenate([[0.0], self.cum_hazard])
        return padded[k]


@dataclass(frozen=True)
class SurvivalCurve:
    """S(t) = exp(-H0(t) exp(lp)) as a step function."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        k = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        return np.concatenate([[1.0], self.values])[k]


def _risk_index(time):
    """Sort order and, per sorted row, the first row of its risk set."""
    order = np.argsort(time, kind="stable")
    ts = time[order]
    first = np.searchsorted(ts, ts, side="left")
    return order, ts, first


def _revcumsum(a):
    return np.cumsum(a[::-1], axis=0)[::-1]


class _CoxData:
    """Sorted data with precomputed risk-set indices for repeated evaluation."""

    def __init__(self, time, event, Z):
        time = np.asarray(time, dtype=float)
        order, self.ts, first = _risk_index(time)
        self.Z = np.asarray(Z, dtype=float)[order]
        ev = np.asarray(event, dtype=float)[order] == 1
        self.ev_rows = np.flatnonzero(ev)
        self.ev_first = first[ev]
        self.Zev = self.Z[ev]
        self.outer = self.Z[:, :, None] * self.Z[:, None, :]

    def terms(self, beta, order=2):
        eta = self.Z @ beta
        shift = eta.max() if eta.size else 0.0
        w = np.exp(eta - shift)
        S0 = _revcumsum(w)[self.ev_first]
        ll = float((eta[self.ev_rows] - shift).sum() - np.log(S0).sum())
        if order == 0:
            return ll
        S1 = _revcumsum(w[:, None] * self.Z)[self.ev_first]
        E1 = S1 / S0[:, None]
        score = (self.Zev - E1).sum(axis=0)
        if order == 1:
            return ll, score
        S2 = _revcumsum(w[:, None, None] * self.outer)[self.ev_first]
        info = (S2 / S0[:, None, None]).sum(axis=0) - E1.T @ E1
        return ll, score, info


def cox_partial_loglik(beta, time, event, Z):
    """Breslow-ties log partial likelihood."""
    return _CoxData(time, event, Z).terms(np.asarray(beta, dtype=float), order=0)


def cox_score(beta, time, event, Z):
    return _CoxData(time, event, Z).terms(np.asarray(beta, dtype=float), order=1)[1]


def cox_information(beta, time, event, Z):
    return _CoxData(time, event, Z).terms(np.asarray(beta, dtype=float), order=2)[2]


def breslow_baseline(time, event, lp):
    """Breslow cumulative baseline hazard evaluated at linear predictors ``lp``.

    With ``lp = 0`` this is the Nelson-Aalen estimator.
    """
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    order, ts, first = _risk_index(time)
    w = np.exp(np.asarray(lp, dtype=float)[order])
    ev = event[order] == 1
    S0 = _revcumsum(w)
    uniq, start, counts = np.unique(ts[ev], return_index=True, return_counts=True)
    denom = S0[first[ev][start]]
    return BaselineHazard(uniq, np.cumsum(counts / denom))


def nelson_aalen(time, event):
    """Nelson-Aalen estimate: sum over event times of d_k / (number at risk)."""
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    uniq = np.unique(time[event == 1])
    d = np.array([np.sum((time == t) & (event == 1)) for t in uniq], dtype=float)
    at_risk = np.array([np.sum(time >= t) for t in uniq], dtype=float)
    return BaselineHazard(uniq, np.cumsum(d / at_risk))


def restricted_mean_lp(baseline, lp, L):
    """Exact integral over [0, L] of exp(-H0(t) exp(lp)) for each entry of ``lp``."""
    if not L > 0:
        raise ValueError(f"restriction horizon must be positive, got {L}")
    keep = baseline.times < L
    t = baseline.times[keep]
    widths = np.diff(np.concatenate([[0.0], t, [L]]))
    H = np.concatenate([[0.0], baseline.cum_hazard[keep]])
    risk = np.exp(np.asarray(lp, dtype=float))
    return np.exp(-np.multiply.outer(risk, H)) @ widths


@dataclass(frozen=True)
class CoxOutcome(_OutcomeBase):
    alpha_x: np.ndarray
    alpha_m: np.ndarray
    alpha_c: np.ndarray
    baseline: BaselineHazard
    converged: bool = True
    iterations: int = 0
    family = "cox"
    alpha_0 = 0.0

    def conditional_mean(self, lp, L):
        return restricted_mean_lp(self.baseline, lp, L)

    def to_dict(self):
        d = self._coef_dict()
        d.pop("alpha_0")
        return {
            "type": "cox",
            **d,
            "converged": self.converged,
            "iterations": self.iterations,
            "baseline": {"times": self.baseline.times.tolist(), "cum_hazard": self.baseline.cum_hazard.tolist()},
        }

    @classmethod
    def from_dict(cls, d):
        b = d["baseline"]
        return cls(
            _arr(d["alpha_x"]), _arr(d["alpha_m"]), _arr(d["alpha_c"]),
            BaselineHazard(b["times"], b["cum_hazard"]),
            bool(d.get("converged", True)), int(d.get("iterations", 0)),
        )


def _lp(model, x, m, c):
    x, m, c = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x, m, c))
    return float(x @ model.alpha_x + m @ model.alpha_m + c @ model.alpha_c)


def survival_curve(model, x, m, c=()):
    lp = _lp(model, x, m, c)
    values = np.exp(-model.baseline.cum_hazard * np.exp(lp))
    return SurvivalCurve(model.baseline.times, values)


def restricted_mean(model, x, m, c=(), L=2000.0):
    return float(restricted_mean_lp(model.baseline, [_lp(model, x, m, c)], L)[0])


def newton_cox(cd, k, max_iter=50, tol=1e-8):
    """Newton-Raphson with step halving from beta = 0."""
    beta = np.zeros(k)
    ll = cd.terms(beta, order=0)
    for it in range(1, max_iter + 1):
        _, score, info = cd.terms(beta)
        if np.abs(score).max() < tol:
            return beta, it - 1
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise SeparationError("singular information matrix in Cox fit") from None
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            ll_new = cd.terms(cand, order=0)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            return beta, it
        gain = ll_new - ll
        beta, ll = cand, ll_new
        if np.abs(beta).max() > SEPARATION_NORM:
            raise SeparationError("Cox coefficients diverge: monotone partial likelihood")
        if gain < tol and np.abs(cd.terms(beta, order=1)[1]).max() < np.sqrt(tol):
            return beta, it
    if np.abs(beta).max() > 25:
        raise SeparationError(f"Cox fit did not converge; |beta| = {np.abs(beta).max():.1f} suggests a monotone likelihood")
    raise ConvergenceError(f"Cox fit did not converge in {max_iter} iterations")


def fit_cox(ds, max_iter=50, tol=1e-8):
    """Cox fit on [X | M | C] followed by the Breslow baseline at the fit.

    Constant columns are not identifiable without an intercept; their
    coefficients are fixed at zero.
    """
    if ds.outcome_kind != "survival":
        raise DataError(f"Cox model needs a survival outcome, got {ds.outcome_kind}")
    time, event = ds.outcome.time, ds.outcome.event
    Z = outcome_design(ds.exposures, ds.mediators, ds.covariates, intercept=False)
    varying = np.ptp(Z, axis=0) > 0
    beta = np.zeros(Z.shape[1])
    its = 0
    if varying.any():
        Zv = Z[:, varying]
        Zv = Zv - Zv.mean(axis=0)
        names = [nm for nm, v in zip(_design_names(ds, True, intercept=False), varying) if v]
        lstsq_qr(Zv, np.zeros(Zv.shape[0]), names=names)
        bv, its = newton_cox(_CoxData(time, event, Zv), Zv.shape[1], max_iter, tol)
        beta[varying] = bv
    baseline = breslow_baseline(time, event, Z @ beta)
    p, r = ds.p, ds.r
    return CoxOutcome(
        _arr(beta[:p]), _arr(beta[p:p + r]), _arr(beta[p + r:]), baseline, converged=True, iterations=its,
    )
