"""Covariance generators: identity, equicorrelation and random correlation matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GenerationFailed, NegativeCorrelation
from .numkit import as_sym, equicorrelation, sym_eig
from .structs import CovSpec

EIG_FLOOR = 1e-3
MAX_ATTEMPTS = 100
MILD = (0.0, 0.5)
STRONG = (0.5, 0.9)


@dataclass(frozen=True)
class CovGenSpec:
    kind: str          # identity | equicorr | uniform_range
    k: int
    rho: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.kind == "equicorr":
            if self.rho < 0:
                raise NegativeCorrelation("equicorrelation needs rho >= 0")
            if not (self.k == 1 or -1.0 / (self.k - 1) < self.rho) or not self.rho < 1:
                raise ValueError("equicorrelation needs -1/(K-1) < rho < 1")
        elif self.kind == "uniform_range":
            if not 0 <= self.lo <= self.hi < 1:
                raise ValueError("uniform_range needs 0 <= lo <= hi < 1")
        elif self.kind != "identity":
            raise ValueError(f"unknown covariance kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class Generated:
    cov: CovSpec
    attempts: int = 1
    floor: Optional[float] = None
    repaired: bool = False


def _repair(c: np.ndarray, floor: float = EIG_FLOOR):
    """Floor the spectrum and rescale to unit diagonal.

    The floor is raised until the rescaled matrix itself keeps its smallest
    eigenvalue at or above ``floor``.
    """
    w, v = sym_eig(c)
    if w[-1] >= floor:
        return c, None
    f = floor
    for _ in range(60):
        r = (v * np.maximum(w, f)) @ v.T
        d = np.sqrt(np.diag(r))
        r = r / np.outer(d, d)
        r = 0.5 * (r + r.T)
        np.fill_diagonal(r, 1.0)
        lo = sym_eig(r).eigvalues[-1]
        if lo >= floor:
            return r, f
        f *= 1.05 * floor / max(lo, 1e-12)
    raise GenerationFailed("eigenvalue repair did not reach the floor")


def generate(spec: CovGenSpec) -> Generated:
    """Build the covariance described by ``spec`` (with repair metadata)."""
    if spec.kind == "identity":
        return Generated(CovSpec(np.eye(spec.k), rho=0.0, label="identity"))
    if spec.kind == "equicorr":
        return Generated(CovSpec(equicorrelation(spec.k, spec.rho), rho=spec.rho,
                                 label=f"equicorr:{spec.rho:g}"))
    k = spec.k
    iu = np.triu_indices(k, 1)
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), attempt]))
        c = np.eye(k)
        c[iu] = rng.uniform(spec.lo, spec.hi, size=iu[0].size)
        c = c + np.triu(c, 1).T
        r, f = _repair(c)
        off = r[iu]
        if off.min() >= 0.0 and off.max() <= spec.hi + 1e-12:
            label = f"uniform[{spec.lo:g},{spec.hi:g}]:{spec.seed}"
            return Generated(CovSpec(as_sym(r), label=label), attempt + 1, f, f is not None)
    raise GenerationFailed(f"no valid matrix after {MAX_ATTEMPTS} attempts")


def gen_covariance(spec: CovGenSpec) -> CovSpec:
    return generate(spec).cov


def mild(k: int, seed: int) -> CovGenSpec:
    return CovGenSpec("uniform_range", k, lo=MILD[0], hi=MILD[1], seed=seed)


def strong(k: int, seed: int) -> CovGenSpec:
    return CovGenSpec("uniform_range", k, lo=STRONG[0], hi=STRONG[1], seed=seed)


def load_matrix(path) -> np.ndarray:
    """Read K lines of K whitespace-separated reals."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                rows.append([float(x) for x in line.split()])
    a = np.array(rows, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {a.shape}")
    return as_sym(a)
