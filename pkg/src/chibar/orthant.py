"""Gaussian orthant probabilities ``Pr{N_d(0, Γ) ∈ R_+^d}``.

Dimensions 1-3 use closed forms; higher dimensions use randomized
quasi-Monte Carlo on the Genz separation-of-variables transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import kernels
from .numkit import cholesky, correlation_from_cov

DEFAULT_POINTS = 2 ** 13
DEFAULT_RANDOMIZATIONS = 8
MC_CHUNK = 250_000


@dataclass(frozen=True)
class OrthantEstimate:
    value: float
    std_error: float
    method: str  # exact1 | exact2 | exact3 | qmc | mc

    @property
    def exact(self) -> bool:
        return self.method.startswith("exact")


def seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce an int, tuple of ints or ``SeedSequence`` to a ``SeedSequence``."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    return np.random.SeedSequence(int(seed))


def orthant_prob(gamma, budget: int = DEFAULT_POINTS, seed=0,
                 randomizations: int = DEFAULT_RANDOMIZATIONS,
                 closed_form: bool = True) -> OrthantEstimate:
    """Probability that a centred Gaussian with covariance ``gamma`` is componentwise positive.

    Parameters
    ----------
    gamma : array_like, shape (d, d)
        Positive-definite covariance; only its correlation matrix matters.
    budget : int
        QMC points per randomization (rounded up to a power of two).
    seed : int, tuple or SeedSequence
        Root seed for the scrambling of the randomizations.
    randomizations : int
        Number of independent scramblings used for the standard error.
    closed_form : bool
        Use the arcsine formulas for ``d <= 3``; ``False`` sends every
        ``d >= 2`` through the QMC integrator (for checking it).

    Raises
    ------
    NotPositiveDefinite
    """
    g = np.asarray(gamma, dtype=float)
    d = g.shape[0]
    if d == 0:
        return OrthantEstimate(1.0, 0.0, "exact1")
    corr = correlation_from_cov(g)
    L = cholesky(corr)
    if d == 1:
        return OrthantEstimate(0.5, 0.0, "exact1")
    if d == 2 and closed_form:
        r = float(np.clip(corr[0, 1], -1.0, 1.0))
        return OrthantEstimate(0.25 + math.asin(r) / (2 * math.pi), 0.0, "exact2")
    if d == 3 and closed_form:
        s = sum(math.asin(float(np.clip(corr[i, j], -1.0, 1.0)))
                for i, j in ((0, 1), (0, 2), (1, 2)))
        return OrthantEstimate(0.125 + s / (4 * math.pi), 0.0, "exact3")
    if randomizations < 2:
        raise ValueError("need at least two randomizations for a standard error")
    m = max(1, int(math.ceil(math.log2(max(2, budget)))))
    children = seed_sequence(seed).spawn(randomizations)
    means = np.empty(randomizations)
    for r, child in enumerate(children):
        engine = qmc.Sobol(d - 1, scramble=True, seed=np.random.default_rng(child))
        means[r] = kernels.genz_orthant_mean(L, engine.random_base2(m))
    value = float(np.clip(means.mean(), 0.0, 1.0))
    se = float(means.std(ddof=1) / math.sqrt(randomizations))
    return OrthantEstimate(value, se, "qmc")


def orthant_prob_mc(gamma, n: int = 1_000_000, seed=0) -> OrthantEstimate:
    """Plain Monte Carlo estimate; an independent check on :func:`orthant_prob`."""
    if n < 1000:
        raise ValueError("plain MC oracle needs n >= 1000")
    L = cholesky(np.asarray(gamma, dtype=float))
    d = L.shape[0]
    rng = np.random.default_rng(seed_sequence(seed))
    hits = 0
    left = n
    while left > 0:
        b = min(left, MC_CHUNK)
        x = rng.standard_normal((b, d)) @ L.T
        hits += int(np.count_nonzero(np.all(x > 0, axis=1)))
        left -= b
    p = hits / n
    return OrthantEstimate(p, math.sqrt(p * (1 - p) / n), "mc")
