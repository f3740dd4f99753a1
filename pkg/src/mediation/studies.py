"""Simulation sweeps: estimator bias for logistic outcomes, bootstrap
coverage and power for survival outcomes.

Every run draws its own seed from ``(root seed, cell, run)``, and results are
collected in run order, so a sweep gives the same numbers for any number of
worker processes.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import rng as rngmod
from .approx import all_methods, large_sample_truth
from .effects import AnalysisConfig
from .errors import MediationError
from .inference import bootstrap_effects
from .sim import (
    LOGISTIC_INTERVENTION,
    SURVIVAL_INTERVENTION,
    LogisticSimConfig,
    SurvivalSimConfig,
    gen_logistic,
    gen_survival,
    k_for_prevalence,
    true_effects_oracle,
)

METHODS = ("numeric", "rare_disease", "probit")


def _pmap(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))


def parse_grid(spec):
    """``"0.05:0.5:10"`` -> 10 evenly spaced values; ``"0.1,0.2"`` -> list."""
    if ":" in spec:
        lo, hi, num = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
    return [float(v) for v in spec.split(",") if v.strip()]


# ---------------------------------------------------------------- bias study


def _bias_run(task):
    cfg, seed = task
    ds = gen_logistic(cfg, seed)
    try:
        res = all_methods(ds, LOGISTIC_INTERVENTION, seed=seed)
    except MediationError:
        return None
    return [(a.de_odds, a.ie_odds) for a in res]


def bias_study(prevalences, n=500, runs=500, seed=0, workers=1, truth_n=200_000, truth_draws=8):
    """Mean estimate minus reference truth for each method and prevalence.

    Returns one row per (prevalence, method) with keys ``method``,
    ``prevalence``, ``de_bias``, ``ie_bias``, ``n_runs`` and the supporting
    values.
    """
    rows = []
    for g, prev in enumerate(prevalences):
        k = k_for_prevalence(prev)
        cfg = LogisticSimConfig(n=n, k=k)
        truth = large_sample_truth(cfg, seed=rngmod.derive_seed(seed, rngmod.ORACLE, g), n=truth_n, draws=truth_draws)
        tasks = [(cfg, rngmod.derive_seed(seed, rngmod.RUN, g, b)) for b in range(runs)]
        results = [r for r in _pmap(_bias_run, tasks, workers) if r is not None]
        est = np.array(results)  # (runs, method, 2)
        for j, method in enumerate(METHODS):
            de_mean, ie_mean = est[:, j, 0].mean(), est[:, j, 1].mean()
            rows.append({
                "method": method,
                "prevalence": prev,
                "de_bias": float(de_mean - truth.de_odds),
                "ie_bias": float(ie_mean - truth.ie_odds),
                "n_runs": len(results),
                "k": k,
                "de_truth": truth.de_odds,
                "ie_truth": truth.ie_odds,
                "de_mean": float(de_mean),
                "ie_mean": float(ie_mean),
            })
    return rows


# ------------------------------------------------------- coverage and power


def _coverage_run(task):
    cfg, seed, B, ci_level, truth = task
    ds = gen_survival(cfg, seed)
    acfg = AnalysisConfig("cox", L=cfg.horizon, seed=seed)
    try:
        res = bootstrap_effects(ds, acfg, B=B, ci_level=ci_level, iv=SURVIVAL_INTERVENTION)
    except MediationError as e:
        return {"failed": True, "error": type(e).__name__}
    lo, hi = res.intervals[1]
    return {
        "failed": False,
        "ie": res.estimate.indirect,
        "ci_low": lo,
        "ci_high": hi,
        "p_value": res.p_values[1],
        "se": res.standard_errors[1],
        "covered": bool(lo <= truth <= hi),
        "failed_replicates": res.failed_replicates,
    }


def coverage_study(strength, n, n_mediators, runs=500, B=1000, seed=0, workers=1, ci_level=0.95, alpha=0.05,
                   truth=None, **cfg_kw):
    """Bootstrap CI coverage of the true IE and power of the IE test.

    ``strength`` is ``null``, ``weak`` or ``strong``. The true IE is 0 for
    the null design and the generator oracle otherwise.
    """
    cfg = SurvivalSimConfig.design(strength, n, n_mediators, **cfg_kw)
    if truth is None:
        truth = 0.0 if strength == "null" else true_effects_oracle(cfg).indirect
    tasks = [(cfg, rngmod.derive_seed(seed, rngmod.RUN, b), B, ci_level, truth) for b in range(runs)]
    records = _pmap(_coverage_run, tasks, workers)
    ok = [r for r in records if not r["failed"]]
    ies = np.array([r["ie"] for r in ok])
    summary = {
        "study": "null" if strength == "null" else "power",
        "strength": strength,
        "n": n,
        "n_mediators": n_mediators,
        "runs": runs,
        "B": B,
        "coverage": float(np.mean([r["covered"] for r in ok])) if ok else float("nan"),
        "power": float(np.mean([r["p_value"] < alpha for r in ok])) if ok else float("nan"),
        "mean_ie": float(ies.mean()) if ok else float("nan"),
        "true_ie": float(truth),
        "failed_runs": len(records) - len(ok),
    }
    return summary, records


def recovery_fraction(records, truth, n_se=3.0):
    """Share of runs whose IE estimate lies within ``n_se`` bootstrap SEs of ``truth``."""
    ok = [r for r in records if not r["failed"]]
    return float(np.mean([abs(r["ie"] - truth) <= n_se * r["se"] for r in ok]))

