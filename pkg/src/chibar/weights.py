"""Chi-bar-squared weight formulas and approximations.

Orthogonal closed forms (point null, demoted nuisances), the
orthogonal-difference approximation for one boundary nuisance under
correlation, and rank-based re-aggregation of face masses for several
boundary nuisances.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import List, Optional

import numpy as np

from .conegeom import build_cone, face_masses, intrinsic_volumes, mask_to_indices
from .errors import DimensionTooLarge, InvalidPartition
from .numkit import correlation_from_cov, inv_pd, inv_sqrt_pd, numerical_rank, op_norm, schur_complement
from .orthant import DEFAULT_POINTS, DEFAULT_RANDOMIZATIONS
from .structs import CovSpec, DeltaVector, PartitionSpec, WeightVector

DEFAULT_RANK_TOL = 0.1


def _check_k(k: int, kmax: int = 30):
    if not 1 <= k <= kmax:
        raise ValueError(f"k must lie in [1, {kmax}], got {k}")


def binomial_weights_exact(k: int) -> List[Fraction]:
    """``C(k, j) / 2^k`` as exact fractions."""
    return [Fraction(comb(k, j), 2 ** k) for j in range(k + 1)]


def delta_orthogonal_exact(k: int, m: int) -> List[Fraction]:
    """Exact weight shift when the last ``m`` of ``k`` orthogonal parameters become nuisances."""
    if not 1 <= m <= k - 1:
        raise InvalidPartition(f"need 1 <= m <= k-1, got m={m}, k={k}")
    scale = Fraction(1, 2 ** k)
    return [scale * (2 ** m * comb(k - m, j) - comb(k, j)) if j <= k - m
            else -scale * comb(k, j)
            for j in range(k + 1)]


def nuisance_weights_exact(k: int, m: int) -> List[Fraction]:
    if not 0 <= m <= k - 1:
        raise InvalidPartition(f"need 0 <= m <= k-1, got m={m}, k={k}")
    return [Fraction(comb(k - m, j), 2 ** (k - m)) if j <= k - m else Fraction(0)
            for j in range(k + 1)]


def weights_orthogonal_point(k: int) -> WeightVector:
    """Binomial weights ``2^-k C(k, j)`` of the orthant (point null)."""
    _check_k(k)
    return WeightVector([float(f) for f in binomial_weights_exact(k)], "orthogonal")


def delta_orthogonal(k: int, m: int = 1) -> DeltaVector:
    """Shift of the orthogonal weights caused by demoting ``m`` parameters to nuisance."""
    _check_k(k)
    return DeltaVector([float(f) for f in delta_orthogonal_exact(k, m)])


def weights_orthogonal_nuisance(k: int, m: int) -> WeightVector:
    """Orthogonal weights with ``m`` boundary nuisances, padded with zeros to length ``k+1``."""
    _check_k(k)
    return WeightVector([float(f) for f in nuisance_weights_exact(k, m)], "orthogonal")


def _as_cov(sigma) -> CovSpec:
    return sigma if isinstance(sigma, CovSpec) else CovSpec(np.asarray(sigma, dtype=float))


def normalized_gram(sigma) -> np.ndarray:
    """Fisher information ``Σ⁻¹`` rescaled to unit diagonal."""
    return correlation_from_cov(inv_pd(_as_cov(sigma).sigma))


def anisotropy_index(sigma) -> float:
    """Operator-norm distance of the unit-diagonal Gram matrix from the identity."""
    g = normalized_gram(sigma)
    return op_norm(g - np.eye(g.shape[0]))


def weights_theorem1_approx(sigma, budget: int = DEFAULT_POINTS, seed=0,
                            randomizations: int = DEFAULT_RANDOMIZATIONS,
                            convention: Optional[str] = None) -> WeightVector:
    """Ray-null weights for one boundary nuisance: exact point-null
    intrinsic volumes of the correlated cone plus the orthogonal shift.

    Negative entries are clipped and the vector renormalized; the clipped
    mass is reported in ``clipped``.
    """
    cov = _as_cov(sigma)
    k = cov.k
    if k < 2:
        raise InvalidPartition("demoting a parameter needs K >= 2")
    point = intrinsic_volumes(build_cone(cov), budget, seed, convention, randomizations)
    raw = point.weights + delta_orthogonal(k, 1).deltas
    clipped = max(0.0, float(-raw[raw < 0].sum()))
    raw = np.clip(raw, 0.0, None)
    return WeightVector.from_raw(raw, "theorem1_approx", std_errors=point.std_errors,
                                 clipped=clipped)


def face_effective_rank(fisher: np.ndarray, s_poi: List[int], s_nuis: List[int],
                        tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of active interest directions that survive partialling out the active nuisances.

    Counts eigenvalues above ``tol`` of ``I_PP^{-1/2} (I_PP - I_PN I_NN⁻¹ I_NP) I_PP^{-1/2}``;
    these lie in (0, 1] and all equal 1 when the information is block diagonal.
    """
    if not s_poi:
        return 0
    if not s_nuis:
        return len(s_poi)
    ipp = fisher[np.ix_(s_poi, s_poi)]
    face = schur_complement(fisher, s_poi, s_nuis)
    root = inv_sqrt_pd(ipp)
    M = root @ face @ root
    return numerical_rank(0.5 * (M + M.T), 1.0, tol)


def rank_based_weights(sigma, part: PartitionSpec, tol: float = DEFAULT_RANK_TOL,
                       budget: int = DEFAULT_POINTS, seed=0,
                       randomizations: int = DEFAULT_RANDOMIZATIONS,
                       convention: Optional[str] = None) -> WeightVector:
    """Approximate ray-null weights ``w_0..w_p`` by grouping face masses by effective rank."""
    cov = _as_cov(sigma)
    k = cov.k
    if part.k != k:
        raise InvalidPartition(f"partition covers {part.k} parameters, covariance has {k}")
    if part.p < 1:
        raise InvalidPartition("need at least one parameter of interest")
    if not 0 < tol < 1:
        raise ValueError("rank tolerance must lie in (0, 1)")
    cone = build_cone(cov)
    if k > 12:
        raise DimensionTooLarge(f"rank-based weights enumerate 2^K faces; K={k} > 12")
    fisher = cone.fisher
    poi = set(part.poi)
    raw = np.zeros(part.p + 1)
    var = np.zeros(part.p + 1)
    for fm in face_masses(cone, budget, seed, convention, randomizations):
        idx = mask_to_indices(fm.face, k)
        s_poi = [i for i in idx if i in poi]
        s_nuis = [i for i in idx if i not in poi]
        r = face_effective_rank(fisher, s_poi, s_nuis, tol)
        raw[r] += fm.mass
        var[r] += fm.variance
    return WeightVector.from_raw(raw, "rank_based", std_errors=np.sqrt(var))
