"""Geometry of the whitened alternative cone.

For ``Z ~ N(0, Σ)`` and Fisher information ``I = Σ⁻¹ = P D Pᵀ`` the map
``z ↦ D^{1/2} Pᵀ z`` makes ``Z`` isotropic and sends the orthant to the
simplicial cone generated by the columns of ``A = D^{1/2} Pᵀ``.  Faces of
that cone are indexed by bitmasks over the generators.

Two conventions for the Gaussian angles of a face ``F_S`` are available:

``classical``
    internal angle from ``(G_SS)⁻¹``, external angle from ``(H_TT)⁻¹``,
    ``T`` the complement of ``S``.  This is what the projection oracle
    reproduces and is the default.
``direct``
    internal angle from ``H_SS``, external angle from ``Ĥ_TT``.  Kept for
    comparison; off the orthant its face masses do not sum to one.
"""
from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from . import kernels
from .errors import DimensionTooLarge, NegativeCorrelation, NoConvergence
from .numkit import cholesky, inv_pd, sym_eig
from .orthant import DEFAULT_POINTS, DEFAULT_RANDOMIZATIONS, OrthantEstimate, orthant_prob
from .streams import DEFAULT_BLOCK, block_layout, map_blocks
from .structs import CovSpec, WeightVector

CONVENTIONS = ("classical", "direct")
ANGLE_CONVENTION = "classical"
MAX_K = 20
MAX_K_EXACT = 12
POS_THRESH = 1e-10
NEG_CORR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Cone:
    """Whitened cone ``{A u : u >= 0}`` and the matrices derived from it."""

    k: int
    generators: np.ndarray   # A, columns are the generators a_i
    gram: np.ndarray         # G = AᵀA (equals the Fisher information)
    h: np.ndarray            # H = G⁻¹
    polar_gram: np.ndarray   # Ĝ = D_H^{-1/2} H D_H^{-1/2}
    polar_h: np.ndarray      # Ĥ = Ĝ⁻¹
    sigma: np.ndarray

    @property
    def fisher(self) -> np.ndarray:
        return self.gram

    @property
    def full_mask(self) -> int:
        return (1 << self.k) - 1


@dataclass(frozen=True)
class FaceMass:
    face: int
    internal: OrthantEstimate
    external: OrthantEstimate

    @property
    def mass(self) -> float:
        return self.internal.value * self.external.value

    @property
    def dim(self) -> int:
        return popcount(self.face)

    @property
    def variance(self) -> float:
        a, b = self.internal, self.external
        return (b.value * a.std_error) ** 2 + (a.value * b.std_error) ** 2


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_to_indices(mask: int, k: int) -> List[int]:
    return [i for i in range(k) if mask >> i & 1]


def indices_to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def _freeze(a: np.ndarray) -> np.ndarray:
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


def build_cone(sigma) -> Cone:
    """Whiten ``Σ`` and build its alternative cone.

    Raises
    ------
    NotPositiveDefinite
    NegativeCorrelation
        If any off-diagonal covariance entry is negative.
    DimensionTooLarge
        If ``K > 20``.
    """
    cov = sigma if isinstance(sigma, CovSpec) else CovSpec(np.asarray(sigma, dtype=float))
    s = cov.sigma
    k = s.shape[0]
    if k > MAX_K:
        raise DimensionTooLarge(f"K={k} exceeds the supported maximum of {MAX_K}")
    cholesky(s)
    off = s[~np.eye(k, dtype=bool)]
    if off.size and off.min() < -NEG_CORR_TOL:
        raise NegativeCorrelation(
            "covariance has negative entries; the chi-bar-squared mixture "
            "representation only holds under non-negative correlation")
    fisher = inv_pd(s)
    d, P = sym_eig(fisher)
    A = np.sqrt(d)[:, None] * P.T
    G = A.T @ A
    H = inv_pd(G)
    dh = np.sqrt(np.diag(H))
    Gp = H / np.outer(dh, dh)
    np.fill_diagonal(Gp, 1.0)
    Hp = inv_pd(Gp)
    A.setflags(write=False)
    return Cone(k, A, _freeze(G), _freeze(H), _freeze(Gp), _freeze(Hp), s)


def _convention(convention: Optional[str]) -> str:
    c = ANGLE_CONVENTION if convention is None else convention
    if c not in CONVENTIONS:
        raise ValueError(f"unknown angle convention {c!r}")
    return c


def _face_seed(seed, mask: int, which: int):
    return (int(seed), int(mask), int(which))


def internal_angle_cov(cone: Cone, s: int, convention: Optional[str] = None) -> np.ndarray:
    idx = mask_to_indices(s, cone.k)
    if _convention(convention) == "direct":
        return cone.h[np.ix_(idx, idx)]
    return inv_pd(cone.gram[np.ix_(idx, idx)])


def external_angle_cov(cone: Cone, s: int, convention: Optional[str] = None) -> np.ndarray:
    idx = mask_to_indices(cone.full_mask & ~s, cone.k)
    if _convention(convention) == "direct":
        return cone.polar_h[np.ix_(idx, idx)]
    return inv_pd(cone.h[np.ix_(idx, idx)])


def internal_angle(cone: Cone, s: int, budget: int = DEFAULT_POINTS, seed=0,
                   convention: Optional[str] = None,
                   randomizations: int = DEFAULT_RANDOMIZATIONS) -> OrthantEstimate:
    """Gaussian internal angle of the face generated by the bitmask ``s``."""
    if s == 0:
        return OrthantEstimate(1.0, 0.0, "exact1")
    gamma = internal_angle_cov(cone, s, convention)
    return orthant_prob(gamma, budget, _face_seed(seed, s, 0), randomizations)


def external_angle(cone: Cone, s: int, budget: int = DEFAULT_POINTS, seed=0,
                   convention: Optional[str] = None,
                   randomizations: int = DEFAULT_RANDOMIZATIONS) -> OrthantEstimate:
    """Gaussian external angle of the face ``s``; uses the complement block."""
    if s == cone.full_mask:
        return OrthantEstimate(1.0, 0.0, "exact1")
    gamma = external_angle_cov(cone, s, convention)
    return orthant_prob(gamma, budget, _face_seed(seed, s, 1), randomizations)


_MASS_CACHE: "OrderedDict[tuple, Tuple[FaceMass, ...]]" = OrderedDict()
_MASS_CACHE_SIZE = 64


def face_masses(cone: Cone, budget: int = DEFAULT_POINTS, seed=0,
                convention: Optional[str] = None,
                randomizations: int = DEFAULT_RANDOMIZATIONS) -> Tuple[FaceMass, ...]:
    """``α(F_S) β(F_S)`` for every face, indexed by bitmask ``0..2^K-1``.

    Results are memoized on the cone's Gram matrix and the budget/seed, so
    repeated calls for the same covariance are free.
    """
    if cone.k > MAX_K_EXACT:
        raise DimensionTooLarge(
            f"exact face enumeration supports K <= {MAX_K_EXACT}, got {cone.k}; "
            "use intrinsic_volumes_mc instead")
    conv = _convention(convention)
    key = (cone.gram.tobytes(), cone.k, int(budget), int(seed), conv, int(randomizations))
    hit = _MASS_CACHE.get(key)
    if hit is not None:
        _MASS_CACHE.move_to_end(key)
        return hit
    out = tuple(
        FaceMass(s,
                 internal_angle(cone, s, budget, seed, conv, randomizations),
                 external_angle(cone, s, budget, seed, conv, randomizations))
        for s in range(1 << cone.k))
    _MASS_CACHE[key] = out
    if len(_MASS_CACHE) > _MASS_CACHE_SIZE:
        _MASS_CACHE.popitem(last=False)
    return out


def intrinsic_volumes(cone: Cone, budget: int = DEFAULT_POINTS, seed=0,
                      convention: Optional[str] = None,
                      randomizations: int = DEFAULT_RANDOMIZATIONS) -> WeightVector:
    """Conic intrinsic volumes ``v_0..v_K`` from the face-angle formula.

    These are the exact point-null chi-bar-squared weights (up to QMC error
    in faces of dimension >= 4).  The raw total is kept in ``raw_sum``; a
    warning is issued when it is more than 0.01 away from one.
    """
    raw = np.zeros(cone.k + 1)
    var = np.zeros(cone.k + 1)
    for fm in face_masses(cone, budget, seed, convention, randomizations):
        raw[fm.dim] += fm.mass
        var[fm.dim] += fm.variance
    wv = WeightVector.from_raw(raw, "exact_face", std_errors=np.sqrt(var))
    if abs(wv.raw_sum - 1.0) > 0.01:
        warnings.warn(f"face masses sum to {wv.raw_sum:.4f}; check the angle convention",
                      RuntimeWarning, stacklevel=2)
    return wv


def project_cone(cone: Cone, z, active: Optional[Iterable[int]] = None) -> Tuple[np.ndarray, int]:
    """Euclidean projection of ``z`` onto the cone spanned by the ``active`` generators.

    ``active=None`` means all generators (the alternative cone), a nuisance
    index set gives the null cone, and an empty set gives the origin.

    Returns
    -------
    point : ndarray
        The projection ``A λ``.
    face : int
        Bitmask of the strictly positive coefficients ``λ_i > 1e-10``.
    """
    z = np.asarray(z, dtype=float)
    allowed = np.ones(cone.k, dtype=np.int32)
    if active is not None:
        allowed[:] = 0
        allowed[list(active)] = 1
    c = np.ascontiguousarray(cone.generators.T @ z)
    G = np.ascontiguousarray(cone.gram)
    lam, it = kernels.nnls_gram(G, c, allowed, 10 * cone.k)
    if it < 0:
        raise NoConvergence("NNLS projection did not terminate (degenerate generators?)")
    face = indices_to_mask(np.flatnonzero(lam > POS_THRESH))
    return cone.generators @ lam, face


def projection_coefficients(cone: Cone, z, active: Optional[Iterable[int]] = None) -> np.ndarray:
    """Generator coefficients ``λ >= 0`` of :func:`project_cone`."""
    allowed = np.ones(cone.k, dtype=np.int32)
    if active is not None:
        allowed[:] = 0
        allowed[list(active)] = 1
    c = np.ascontiguousarray(cone.generators.T @ np.asarray(z, dtype=float))
    lam, it = kernels.nnls_gram(np.ascontiguousarray(cone.gram), c, allowed, 10 * cone.k)
    if it < 0:
        raise NoConvergence("NNLS projection did not terminate (degenerate generators?)")
    return lam


def intrinsic_volumes_mc(cone: Cone, n: int = 100_000, seed=0, jobs: int = 1,
                         block: int = DEFAULT_BLOCK) -> WeightVector:
    """Intrinsic volumes by projecting standard Gaussian draws onto the cone.

    ``v_j`` is the frequency with which the projection lands in the relative
    interior of a ``j``-dimensional face.  Independent of the angle formulas.
    """
    if n < 10_000:
        raise ValueError("projection oracle needs n >= 10_000")
    G = np.ascontiguousarray(cone.gram)
    A = cone.generators
    no_null = np.zeros(cone.k, dtype=np.int32)
    max_iter = 10 * cone.k

    def run(size, ss):
        z = np.random.default_rng(ss).standard_normal((size, cone.k))
        _, dims, _, status = kernels.lrs_batch(G, np.ascontiguousarray(z @ A), no_null, max_iter)
        if status < 0:
            raise NoConvergence("NNLS projection did not terminate")
        return np.bincount(dims, minlength=cone.k + 1)

    counts = sum(map_blocks(run, block_layout(seed, n, block), jobs))
    p = counts / n
    return WeightVector.from_raw(p, "mc_oracle", std_errors=np.sqrt(p * (1 - p) / n))
