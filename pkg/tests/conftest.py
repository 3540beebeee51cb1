import numpy as np
import pytest


def random_corr(k, rng, lo=0.0, hi=0.6):
    """Random unit-diagonal PD matrix with off-diagonals in [lo, hi] (rejection sampled)."""
    while True:
        c = np.eye(k)
        iu = np.triu_indices(k, 1)
        c[iu] = rng.uniform(lo, hi, size=iu[0].size)
        c = c + np.triu(c, 1).T
        if np.linalg.eigvalsh(c)[0] > 0.05:
            return c


def random_pd(k, rng):
    """Random PD correlation matrix with correlations of both signs."""
    a = rng.standard_normal((k, k + 2))
    s = a @ a.T
    d = np.sqrt(np.diag(s))
    return s / np.outer(d, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[ac])
