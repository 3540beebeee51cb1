"""Small dense symmetric linear algebra and scalar special functions.

Everything here works on plain ``numpy`` arrays of modest size (the
package never goes beyond a few dozen dimensions), so clarity and
determinism are favoured over raw speed.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import NoConvergence, NotPositiveDefinite

# relative pivot threshold; the single definition of "positive definite"
PD_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class SpectralDecomp(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""

    eigvalues: np.ndarray
    eigvectors: np.ndarray


def as_sym(m, atol: float = 1e-10) -> np.ndarray:
    """Return ``m`` as a float array, symmetrized.

    Raises ``ValueError`` if ``m`` is not square or is visibly asymmetric
    (entries differing by more than ``atol`` relative to the largest entry).
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > atol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def cholesky(m) -> np.ndarray:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is ``<= PD_RTOL * max(diag(m))``.
    """
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    L = np.zeros_like(a)
    if n == 0:
        return L
    thresh = PD_RTOL * max(float(np.max(np.diag(a))), 0.0)
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > thresh:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at index {j} is not positive")
        d = np.sqrt(pivot)
        L[j, j] = d
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / d
    return L


def is_pd(m) -> bool:
    try:
        cholesky(m)
    except NotPositiveDefinite:
        return False
    return True


def _sign_fix(vecs: np.ndarray) -> np.ndarray:
    # make the largest-magnitude component of each column positive (first index on ties)
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def sym_eig(m) -> SpectralDecomp:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back in descending order; each eigenvector is signed so
    that its largest-magnitude component is positive, which makes the output
    reproducible across runs and platforms.
    """
    a = as_sym(m)
    n = a.shape[0]
    v = np.eye(n)
    if n <= 1:
        return SpectralDecomp(np.diag(a).copy(), v)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return SpectralDecomp(np.zeros(n), v)
    tol = 1e-15 * norm
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off > tol * 1e3:
            raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return SpectralDecomp(w[order], _sign_fix(v[:, order]))


def inv_pd(m) -> np.ndarray:
    """Inverse of a positive-definite matrix via its Cholesky factor."""
    L = cholesky(m)
    n = L.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    Linv = np.linalg.solve(L, np.eye(n))
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T)


def schur_complement(m, keep: Sequence[int], out: Sequence[int]) -> np.ndarray:
    """Schur complement of the ``out`` block of ``m`` within ``keep ∪ out``.

    Returns ``m[keep, keep] - m[keep, out] @ inv(m[out, out]) @ m[out, keep]``.
    """
    keep = list(keep)
    out = list(out)
    if set(keep) & set(out):
        raise ValueError("keep and out index sets must be disjoint")
    a = np.asarray(m, dtype=float)
    kk = a[np.ix_(keep, keep)]
    if not keep or not out:
        return kk.copy()
    ko = a[np.ix_(keep, out)]
    s = kk - ko @ inv_pd(a[np.ix_(out, out)]) @ ko.T
    return 0.5 * (s + s.T)


def op_norm(m) -> float:
    """Spectral norm of a symmetric matrix (largest absolute eigenvalue)."""
    a = np.asarray(m, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(sym_eig(a).eigvalues)))


def chi2_cdf(t, dof: int):
    """CDF of the chi-square distribution; ``dof == 0`` is a point mass at 0.

    Accepts scalar or array ``t``; negative arguments give 0.
    """
    t = np.asarray(t, dtype=float)
    if dof < 0:
        raise ValueError("dof must be non-negative")
    if dof == 0:
        out = np.where(t >= 0, 1.0, 0.0)
    else:
        out = np.where(t > 0, special.gammainc(dof / 2.0, np.maximum(t, 0.0) / 2.0), 0.0)
    return out[()] if out.ndim == 0 else out


def numerical_rank(m, reference_scale: float = 1.0, tol: float = 0.1) -> int:
    """Number of eigenvalues of the PSD matrix ``m`` above ``tol * reference_scale``."""
    a = np.asarray(m, dtype=float)
    if a.size == 0:
        return 0
    if not reference_scale > 0:
        raise ValueError("reference_scale must be positive")
    return int(np.sum(sym_eig(a).eigvalues > tol * reference_scale))


def inv_sqrt_pd(m) -> np.ndarray:
    """Symmetric inverse square root of a positive-definite matrix."""
    cholesky(m)
    w, v = sym_eig(m)
    return (v / np.sqrt(w)) @ v.T


def identity(n: int) -> np.ndarray:
    return np.eye(n)


def equicorrelation(k: int, rho: float) -> np.ndarray:
    """``(1 - rho) I + rho 11ᵀ``."""
    return (1.0 - rho) * np.eye(k) + rho * np.ones((k, k))


def correlation_from_cov(m) -> np.ndarray:
    """Rescale a covariance matrix to unit diagonal."""
    a = np.asarray(m, dtype=float)
    d = np.sqrt(np.diag(a))
    c = a / np.outer(d, d)
    np.fill_diagonal(c, 1.0)
    return 0.5 * (c + c.T)
