"""Nonparametric bootstrap: quantile intervals and two-sided p-values."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .dataset import quantile
from .effects import NULL_VALUE, run_config
from .errors import BootstrapFailure, ConfigError, MediationError

MAX_FAILED_FRACTION = 0.10
EFFECTS = ("direct", "indirect", "total")


def quantile_ci(samples, level=0.95):
    """Equal-tailed interval from the ``(1-level)/2`` and ``(1+level)/2`` sample quantiles."""
    s = np.asarray(samples, dtype=float)
    s = s[np.isfinite(s)]
    if s.size == 0:
        raise ValueError("no finite samples")
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    a = 1.0 - level
    lo, hi = quantile(s, [a / 2, 1 - a / 2])
    return float(lo), float(hi)


def tail_fractions(samples, null):
    """Fractions of samples strictly below, strictly above, and equal to ``null``."""
    s = np.asarray(samples, dtype=float)
    s = s[np.isfinite(s)]
    n = s.size
    below = np.count_nonzero(s < null)
    above = np.count_nonzero(s > null)
    return below / n, above / n, (n - below - above) / n


def bootstrap_pvalue(samples, null):
    """Two-sided p-value ``2 min(p_L, p_U)``; ties with ``null`` count half to each tail."""
    below, above, tied = tail_fractions(samples, null)
    return float(min(1.0, 2.0 * min(below, above) + tied))


@dataclass(frozen=True)
class BootstrapResult:
    estimate: object  # EffectEstimate on the full data
    replicates: np.ndarray  # (B, 3): DE, IE, TE; NaN rows for failed fits
    ci_level: float
    intervals: tuple
    p_values: tuple
    null_value: float
    B: int
    failed_replicates: int
    seed: int

    @property
    def successful(self):
        return self.replicates[np.isfinite(self.replicates).all(axis=1)]

    @property
    def standard_errors(self):
        return tuple(float(v) for v in self.successful.std(axis=0, ddof=1))

    def to_dict(self):
        out = {
            "point": self.estimate.to_dict(),
            "ci_level": self.ci_level,
            "null_value": self.null_value,
            "B": self.B,
            "failed_replicates": self.failed_replicates,
            "bootstrap_seed": self.seed,
        }
        for k, name in enumerate(EFFECTS):
            out[name] = {
                "estimate": self.estimate.as_tuple()[k],
                "ci_low": self.intervals[k][0],
                "ci_high": self.intervals[k][1],
                "p_value": self.p_values[k],
                "bootstrap_se": self.standard_errors[k],
            }
        return out


def summarize(estimate, replicates, ci_level, seed, null_value=None):
    replicates = np.asarray(replicates, dtype=float)
    B = replicates.shape[0]
    ok = np.isfinite(replicates).all(axis=1)
    failed = int(B - ok.sum())
    if failed > MAX_FAILED_FRACTION * B:
        raise BootstrapFailure(f"{failed} of {B} bootstrap replicates failed to fit; results would be unreliable")
    null = NULL_VALUE[estimate.scale] if null_value is None else null_value
    good = replicates[ok]
    intervals = tuple(quantile_ci(good[:, k], ci_level) for k in range(3))
    pvals = tuple(bootstrap_pvalue(good[:, k], null) for k in range(3))
    return BootstrapResult(estimate, replicates, ci_level, intervals, pvals, null, B, failed, seed)


def _replicate(ds, cfg, iv, seed, b):
    idx = rngmod.stream(seed, rngmod.BOOT, b).integers(0, ds.n, ds.n)
    try:
        est = run_config(ds.take(idx), cfg, iv=iv, seed=rngmod.derive_seed(seed, rngmod.BOOT, b))
    except MediationError:
        return (np.nan, np.nan, np.nan)
    return est.as_tuple()


def _replicate_block(args):
    ds, cfg, iv, seed, bs = args
    return [_replicate(ds, cfg, iv, seed, b) for b in bs]


def bootstrap_replicates(ds, cfg, iv, B, seed, workers=1):
    """(B, 3) replicate matrix; row ``b`` depends only on ``(seed, b)``."""
    if workers <= 1:
        rows = [_replicate(ds, cfg, iv, seed, b) for b in range(B)]
    else:
        blocks = [range(s, min(s + 25, B)) for s in range(0, B, 25)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_replicate_block, [(ds, cfg, iv, seed, blk) for blk in blocks])
            rows = [row for part in parts for row in part]
    return np.array(rows, dtype=float).reshape(B, 3)


def bootstrap_effects(ds, cfg, B=1000, ci_level=0.95, seed=None, workers=1, iv=None, min_B=100):
    """Resample rows with replacement, refit everything, and collect DE/IE/TE.

    Replicates whose fits fail (separation, rank loss, no events, ...) are
    dropped and counted; more than 10% failures raises
    :class:`BootstrapFailure`.
    """
    if B < min_B:
        raise ConfigError(f"B must be at least {min_B}, got {B}")
    seed = cfg.seed if seed is None else seed
    iv = cfg.intervention(ds) if iv is None else iv
    estimate = run_config(ds, cfg, iv=iv)
    reps = bootstrap_replicates(ds, cfg, iv, B, seed, workers)
    return summarize(estimate, reps, ci_level, seed)
