import numpy as np
import pytest

from mediation import Binary, Continuous, Dataset, Survival

# criterion id -> "PASS|FAIL  detail", filled in by test_acceptance.py
ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    print(ACCEPTANCE[criterion])
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=str):
        terminalreporter.write_line(ACCEPTANCE[key])


def random_dataset(g, family, n=60, p=None, r=None, q=None):
    """Small random dataset with real dependence between the layers."""
    p = p or int(g.integers(1, 3))
    r = r or int(g.integers(1, 4))
    q = int(g.integers(0, 3)) if q is None else q
    X = g.standard_normal((n, p))
    C = g.standard_normal((n, q))
    M = X @ g.normal(0, 0.7, (p, r)) + C @ g.normal(0, 0.3, (q, r)) + g.standard_normal((n, r))
    lp = 0.4 * X.sum(axis=1) + 0.3 * M.sum(axis=1) / np.sqrt(r) + 0.2 * C.sum(axis=1)
    if family == "linear":
        out = Continuous(lp + g.standard_normal(n))
    elif family == "logistic":
        y = (g.random(n) < 1 / (1 + np.exp(-0.6 * lp))).astype(float)
        y[:2] = (0.0, 1.0)
        out = Binary(y)
    else:
        t = g.exponential(1.0, n) / np.exp(0.5 * lp)
        c = g.exponential(2.0, n)
        ev = (t <= c).astype(float)
        ev[0] = 1.0
        out = Survival(np.minimum(t, c), ev)
    return Dataset(X, M, out, C)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
