# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop: Gram-form Lawson-Hanson NNLS cone projections.

``chibar._fallback`` mirrors every function here."""

import numpy as np

from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free

cdef double POS_THRESH = 1e-10

IMPLEMENTATION = "compiled"


cdef int _chol_solve(const double* G, int K, const int* idx, int n,
                     const double* c, double* L, double* out) noexcept nogil:
    # solve G[idx, idx] x = c[idx]; returns 0 on success, -1 if not PD
    cdef int i, j, k
    cdef double acc
    for j in range(n):
        acc = G[idx[j] * K + idx[j]]
        for k in range(j):
            acc -= L[j * K + k] * L[j * K + k]
        if acc <= 0.0:
            return -1
        L[j * K + j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = G[idx[i] * K + idx[j]]
            for k in range(j):
                acc -= L[i * K + k] * L[j * K + k]
            L[i * K + j] = acc / L[j * K + j]
    for i in range(n):
        acc = c[idx[i]]
        for k in range(i):
            acc -= L[i * K + k] * out[k]
        out[i] = acc / L[i * K + i]
    for i in range(n - 1, -1, -1):
        acc = out[i]
        for k in range(i + 1, n):
            acc -= L[k * K + i] * out[k]
        out[i] = acc / L[i * K + i]
    return 0


cdef int _nnls_gram(const double* G, int K, const double* c, const int* allowed,
                    double* lam, int* passive, int* idx, double* s, double* L,
                    int max_iter) noexcept nogil:
    """Lawson-Hanson active set for min 1/2 x'Gx - c'x, x >= 0, x[~allowed] = 0.

    Returns the number of outer iterations, -1 on hitting the cap, -2 if a
    passive-set block is not positive definite."""
    cdef int i, j, n, it = 0, best, first
    cdef double wi, bestw, alpha, ratio, cmax = 1.0, tol
    for i in range(K):
        lam[i] = 0.0
        passive[i] = 0
        if fabs(c[i]) > cmax:
            cmax = fabs(c[i])
    tol = 1e-12 * cmax * K
    while True:
        best = -1
        bestw = tol
        for i in range(K):
            if allowed[i] and not passive[i]:
                wi = c[i]
                for j in range(K):
                    wi -= G[i * K + j] * lam[j]
                if wi > bestw:
                    bestw = wi
                    best = i
        if best < 0:
            return it
        it += 1
        if it > max_iter:
            return -1
        passive[best] = 1
        first = 1
        while True:
            n = 0
            for i in range(K):
                if passive[i]:
                    idx[n] = i
                    n += 1
            if _chol_solve(G, K, idx, n, c, L, s) != 0:
                return -2
            alpha = 2.0
            for j in range(n):
                if s[j] <= 0.0:
                    ratio = lam[idx[j]] - s[j]
                    ratio = lam[idx[j]] / ratio if ratio > 0.0 else 0.0
                    if ratio < alpha:
                        alpha = ratio
            if alpha > 1.0:
                for j in range(n):
                    lam[idx[j]] = s[j]
                break
            if first and alpha <= 0.0:
                for j in range(n):
                    if idx[j] == best and s[j] <= 0.0:
                        # rounding-level multiplier: drop it and stop
                        passive[best] = 0
                        lam[best] = 0.0
                        return it
            first = 0
            for j in range(n):
                i = idx[j]
                lam[i] += alpha * (s[j] - lam[i])
                if lam[i] <= POS_THRESH * 1e-3:
                    lam[i] = 0.0
                    passive[i] = 0


def nnls_gram(const double[:, ::1] G, const double[::1] c, const int[::1] allowed, int max_iter):
    """Single projection. Returns (coefficients, iterations)."""
    cdef int K = G.shape[0]
    lam = np.zeros(K)
    cdef double[::1] lam_v = lam
    cdef int* passive = <int*> malloc(K * sizeof(int))
    cdef int* idx = <int*> malloc(K * sizeof(int))
    cdef double* s = <double*> malloc(K * sizeof(double))
    cdef double* L = <double*> malloc(K * K * sizeof(double))
    cdef int it
    try:
        with nogil:
            it = _nnls_gram(&G[0, 0], K, &c[0], &allowed[0], &lam_v[0],
                            passive, idx, s, L, max_iter)
    finally:
        free(passive); free(idx); free(s); free(L)
    return lam, it


def lrs_batch(const double[:, ::1] G, const double[:, ::1] C, const int[::1] null_allowed, int max_iter):
    """LRS for every row of ``C`` (rows are A'z for whitened draws z).

    Returns (lrs, full_face_dim, null_face_dim, status) where status is 0 on
    success or the first negative solver code encountered."""
    cdef Py_ssize_t n = C.shape[0], r
    cdef int K = G.shape[0], i, it, status = 0, dfull, dnull
    lrs = np.empty(n)
    dim_full = np.empty(n, dtype=np.int32)
    dim_null = np.empty(n, dtype=np.int32)
    cdef double[::1] lrs_v = lrs
    cdef int[::1] df_v = dim_full
    cdef int[::1] dn_v = dim_null
    cdef int* all_allowed = <int*> malloc(K * sizeof(int))
    cdef int* passive = <int*> malloc(K * sizeof(int))
    cdef int* idx = <int*> malloc(K * sizeof(int))
    cdef double* lam = <double*> malloc(K * sizeof(double))
    cdef double* s = <double*> malloc(K * sizeof(double))
    cdef double* L = <double*> malloc(K * K * sizeof(double))
    cdef double full, null, v
    cdef bint any_null = 0
    for i in range(K):
        all_allowed[i] = 1
        if null_allowed[i]:
            any_null = 1
    try:
        with nogil:
            for r in range(n):
                it = _nnls_gram(&G[0, 0], K, &C[r, 0], all_allowed, lam,
                                passive, idx, s, L, max_iter)
                if it < 0 and status == 0:
                    status = it
                full = 0.0
                dfull = 0
                for i in range(K):
                    full += C[r, i] * lam[i]
                    if lam[i] > POS_THRESH:
                        dfull += 1
                null = 0.0
                dnull = 0
                if any_null:
                    it = _nnls_gram(&G[0, 0], K, &C[r, 0], &null_allowed[0], lam,
                                    passive, idx, s, L, max_iter)
                    if it < 0 and status == 0:
                        status = it
                    for i in range(K):
                        null += C[r, i] * lam[i]
                        if lam[i] > POS_THRESH:
                            dnull += 1
                v = full - null
                lrs_v[r] = v if v > 0.0 else 0.0
                df_v[r] = dfull
                dn_v[r] = dnull
    finally:
        free(all_allowed); free(passive); free(idx); free(lam); free(s); free(L)
    return lrs, dim_full, dim_null, status
