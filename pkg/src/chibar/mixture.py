"""The chi-bar-squared distribution: a finite mixture of chi-square laws."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import chi2_cdf
from .structs import WeightVector


@dataclass(frozen=True, eq=False)
class MixtureDist:
    """``Σ_j w_j χ²_j`` with ``χ²_0`` the point mass at zero."""

    weights: WeightVector

    @classmethod
    def from_weights(cls, w, method: str = "orthogonal") -> "MixtureDist":
        if isinstance(w, WeightVector):
            return cls(w)
        return cls(WeightVector.from_raw(w, method))

    @property
    def k(self) -> int:
        return self.weights.k

    @property
    def dofs(self) -> np.ndarray:
        return np.arange(self.k + 1)

    def cdf(self, t):
        return mixture_cdf(self, t)

    def sf(self, t):
        return 1.0 - mixture_cdf(self, t)

    def quantile(self, q: float) -> float:
        return mixture_quantile(self, q)


def mixture_cdf(dist: MixtureDist, t):
    """``Σ_j w_j P(χ²_j <= t)``; zero for negative ``t``."""
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    for j, w in enumerate(dist.weights.weights):
        if w > 0:
            out = out + w * chi2_cdf(t_arr, j)
    out = np.where(t_arr < 0, 0.0, np.minimum(out, 1.0))
    return out[()] if out.ndim == 0 else out


def mixture_quantile(dist: MixtureDist, q: float, tol: float = 1e-10) -> float:
    """Smallest ``t >= 0`` with ``F(t) >= q``, by bisection.

    Quantiles at or below the atom ``w_0`` are 0.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if q <= dist.weights.weights[0]:
        return 0.0
    lo, hi = 0.0, 10.0 + 10.0 * dist.k
    while mixture_cdf(dist, hi) < q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = mixture_cdf(dist, mid)
        if abs(f - q) <= tol:
            return mid
        if f < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
