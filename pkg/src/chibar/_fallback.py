"""Pure numpy versions of the routines in ``_kernels.pyx``.

Same signatures, same algorithms, same thresholds; used when the compiled
extension is unavailable or ``CHIBAR_PURE_PYTHON=1`` is set.
"""
import numpy as np
from scipy.special import ndtr, ndtri

IMPLEMENTATION = "python"

POS_THRESH = 1e-10


def _nnls_gram(G, c, allowed, max_iter):
    K = G.shape[0]
    lam = np.zeros(K)
    passive = np.zeros(K, dtype=bool)
    allowed = np.asarray(allowed, dtype=bool)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(c)))) * K
    it = 0
    while True:
        w = c - G @ lam
        cand = allowed & ~passive
        if not cand.any():
            return lam, it
        wc = np.where(cand, w, -np.inf)
        best = int(np.argmax(wc))
        if not wc[best] > tol:
            return lam, it
        it += 1
        if it > max_iter:
            return lam, -1
        passive[best] = True
        first = True
        while True:
            idx = np.flatnonzero(passive)
            sub = G[np.ix_(idx, idx)]
            try:
                Lc = np.linalg.cholesky(sub)
            except np.linalg.LinAlgError:
                return lam, -2
            s = np.linalg.solve(Lc.T, np.linalg.solve(Lc, c[idx]))
            neg = s <= 0.0
            if not neg.any():
                lam[idx] = s
                break
            denom = lam[idx][neg] - s[neg]
            ratios = np.where(denom > 0.0, lam[idx][neg] / np.where(denom > 0, denom, 1.0), 0.0)
            alpha = float(np.min(ratios))
            if alpha > 1.0:
                lam[idx] = s
                break
            if first and alpha <= 0.0:
                pos = np.flatnonzero(idx == best)[0]
                if s[pos] <= 0.0:
                    passive[best] = False
                    lam[best] = 0.0
                    return lam, it
            first = False
            lam[idx] += alpha * (s - lam[idx])
            drop = idx[lam[idx] <= POS_THRESH * 1e-3]
            lam[drop] = 0.0
            passive[drop] = False


def nnls_gram(G, c, allowed, max_iter):
    lam, it = _nnls_gram(np.asarray(G, float), np.asarray(c, float), allowed, max_iter)
    return lam, it


def lrs_batch(G, C, null_allowed, max_iter):
    G = np.asarray(G, float)
    C = np.asarray(C, float)
    n, K = C.shape
    null_allowed = np.asarray(null_allowed, dtype=bool)
    all_allowed = np.ones(K, dtype=bool)
    lrs = np.empty(n)
    dim_full = np.empty(n, dtype=np.int32)
    dim_null = np.empty(n, dtype=np.int32)
    status = 0
    for r in range(n):
        c = C[r]
        lam, it = _nnls_gram(G, c, all_allowed, max_iter)
        if it < 0 and status == 0:
            status = it
        full = float(c @ lam)
        dim_full[r] = int(np.sum(lam > POS_THRESH))
        null = 0.0
        dim_null[r] = 0
        if null_allowed.any():
            lam, it = _nnls_gram(G, c, null_allowed, max_iter)
            if it < 0 and status == 0:
                status = it
            null = float(c @ lam)
            dim_null[r] = int(np.sum(lam > POS_THRESH))
        v = full - null
        lrs[r] = v if v > 0.0 else 0.0
    return lrs, dim_full, dim_null, status


def genz_orthant_mean(L, U):
    L = np.asarray(L, float)
    U = np.asarray(U, float)
    d = L.shape[0]
    n = U.shape[0]
    y = np.empty((n, d))
    f = np.full(n, 0.5)
    e = np.full(n, 0.5)
    for i in range(1, d):
        u = np.maximum(U[:, i - 1] * e, 1e-300)
        y[:, i - 1] = ndtri(u)
        acc = -(y[:, :i] @ L[i, :i])
        e = ndtr(acc / L[i, i])
        f *= e
    return float(np.mean(f))
