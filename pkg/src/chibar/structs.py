"""Plain data containers passed between modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidPartition
from .numkit import as_sym

METHODS = ("orthogonal", "exact_face", "theorem1_approx", "rank_based", "mc_oracle")


@dataclass(frozen=True, eq=False)
class CovSpec:
    """Covariance ``Σ = I(θ₀)⁻¹`` of the limiting Gaussian, with provenance."""

    sigma: np.ndarray
    rho: Optional[float] = None
    label: str = "custom"

    def __post_init__(self):
        s = as_sym(self.sigma)
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    @property
    def fisher(self) -> np.ndarray:
        from .numkit import inv_pd

        return inv_pd(self.sigma)

    def is_diagonal(self) -> bool:
        return bool(np.all(self.sigma == np.diag(np.diag(self.sigma))))


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Chi-bar-squared weights ``w_0..w_K`` for degrees of freedom ``0..K``.

    ``raw_sum`` is the total before normalization; ``std_errors`` is filled
    for Monte Carlo / QMC routes and ``clipped`` records mass removed by
    clipping negative entries.
    """

    weights: np.ndarray
    method: str
    raw_sum: float = 1.0
    std_errors: Optional[np.ndarray] = None
    clipped: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown weight method {self.method!r}")
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_raw(cls, raw, method: str, std_errors=None, clipped: float = 0.0) -> "WeightVector":
        """Normalize ``raw`` to sum to one, recording the raw total."""
        raw = np.asarray(raw, dtype=float)
        total = float(raw.sum())
        if not total > 0:
            raise ValueError("raw weights have non-positive total")
        w = raw / total
        # absorb the last rounding ulp so the sum is 1 to machine precision
        w[int(np.argmax(w))] += 1.0 - w.sum()
        return cls(w, method, raw_sum=total, std_errors=std_errors, clipped=clipped)

    @property
    def k(self) -> int:
        return self.weights.size - 1

    def __len__(self):
        return self.weights.size

    def __getitem__(self, j):
        return self.weights[j]

    def padded(self, k: int) -> np.ndarray:
        out = np.zeros(k + 1)
        out[: self.weights.size] = self.weights
        return out


@dataclass(frozen=True, eq=False)
class DeltaVector:
    """Weight shifts ``Δ_j``; they always sum to zero."""

    deltas: np.ndarray

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        if abs(d.sum()) > 1e-12:
            raise ValueError("deltas must sum to zero")
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)


@dataclass(frozen=True)
class PartitionSpec:
    """Split of ``{0..K-1}`` into parameters of interest and boundary nuisances.

    Indices are 0-based.
    """

    poi: tuple
    nuisance: tuple = field(default=())

    def __post_init__(self):
        poi = tuple(sorted(int(i) for i in self.poi))
        nuis = tuple(sorted(int(i) for i in self.nuisance))
        object.__setattr__(self, "poi", poi)
        object.__setattr__(self, "nuisance", nuis)
        allidx = poi + nuis
        if len(set(allidx)) != len(allidx):
            raise InvalidPartition("parameters of interest and nuisances overlap")
        if sorted(allidx) != list(range(len(allidx))):
            raise InvalidPartition("partition must cover 0..K-1 exactly")

    @classmethod
    def last(cls, k: int, m: int) -> "PartitionSpec":
        """The last ``m`` of ``k`` coordinates are nuisances."""
        if not 0 <= m <= k:
            raise InvalidPartition(f"need 0 <= m <= k, got m={m}, k={k}")
        return cls(tuple(range(k - m)), tuple(range(k - m, k)))

    @classmethod
    def from_sets(cls, poi: Sequence[int], nuisance: Sequence[int]) -> "PartitionSpec":
        return cls(tuple(poi), tuple(nuisance))

    @property
    def k(self) -> int:
        return len(self.poi) + len(self.nuisance)

    @property
    def p(self) -> int:
        return len(self.poi)

    @property
    def m(self) -> int:
        return len(self.nuisance)

    @property
    def nuisance_mask(self) -> int:
        mask = 0
        for i in self.nuisance:
            mask |= 1 << i
        return mask
