"""Dense linear-algebra kernels and multivariate normal sampling."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CholeskyError, RankDeficiencyError

JITTER_STEPS = (1e-10, 1e-8, 1e-6)


@dataclass(frozen=True)
class CholeskyFactor:
    lower: np.ndarray
    jitter_applied: float = 0.0

    @property
    def dim(self):
        return self.lower.shape[0]

    def reconstruct(self):
        return self.lower @ self.lower.T


def cholesky(S, symmetry_tol=1e-12):
    """Lower Cholesky factor of a symmetric PSD matrix.

    On failure the diagonal is inflated by ``step * trace(S) / r`` for each
    step in ``JITTER_STEPS``; the amount used is recorded on the result.
    An all-zero matrix factors to the zero matrix without jitter.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    r = S.shape[0]
    if S.shape != (r, r):
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise CholeskyError("matrix has non-finite entries")
    scale = max(np.abs(S).max(), 1.0)
    if np.abs(S - S.T).max() > symmetry_tol * scale:
        raise CholeskyError("matrix is not symmetric")
    S = 0.5 * (S + S.T)
    if not np.any(S):
        return CholeskyFactor(np.zeros_like(S), 0.0)
    try:
        return CholeskyFactor(np.linalg.cholesky(S), 0.0)
    except np.linalg.LinAlgError:
        pass
    base = np.trace(S) / r
    if base <= 0:
        raise CholeskyError("matrix has nonpositive trace")
    for step in JITTER_STEPS:
        jitter = step * base
        try:
            return CholeskyFactor(np.linalg.cholesky(S + jitter * np.eye(r)), jitter)
        except np.linalg.LinAlgError:
            continue
    raise CholeskyError(f"Cholesky failed after jitter {JITTER_STEPS[-1] * base:.3g}")


def sample_mvn(mean, chol, rng, size=None):
    """Draw ``mean + L z`` with ``z`` standard normal from ``rng``.

    ``size=None`` returns one vector; otherwise an array of shape
    ``(size, r)`` whose rows are independent draws.
    """
    mean = np.asarray(mean, dtype=float)
    r = chol.dim
    if mean.shape[-1] != r:
        raise ValueError(f"mean has dimension {mean.shape[-1]}, factor has {r}")
    if size is None:
        return mean + chol.lower @ rng.standard_normal(r)
    z = rng.standard_normal((size, r))
    return mean + z @ chol.lower.T


def lstsq_qr(A, b, rank_tol=1e-10, names=None):
    """Least squares through a reduced QR decomposition.

    Parameters
    ----------
    A : (n, k) array
    b : (n,) or (n, m) array
    rank_tol : float
        Columns whose R diagonal falls below ``rank_tol * max|diag R|``
        are reported as rank deficient.
    names : sequence of str, optional
        Column labels used in the error message.

    Returns
    -------
    coef : (k,) or (k, m) array
    """
    A = np.asarray(A, dtype=float)
    n, k = A.shape
    if n < k:
        raise RankDeficiencyError(f"{n} rows cannot determine {k} coefficients")
    # scale columns so the rank test is unit-free
    norms = np.sqrt((A * A).sum(axis=0))
    norms[norms == 0] = 1.0
    Q, R = np.linalg.qr(A / norms)
    d = np.abs(np.diag(R))
    bad = np.flatnonzero(d < rank_tol * max(d.max(), 1e-300))
    if bad.size or not np.any(d):
        j = int(bad[0]) if bad.size else 0
        label = names[j] if names is not None else j
        raise RankDeficiencyError(f"design matrix is rank deficient at column {label}", column=j)
    coef = solve_triangular(R, Q.T @ b, lower=False)
    return coef / (norms if coef.ndim == 1 else norms[:, None])
