import numpy as np
import pytest

from chibar import kernels, _fallback
from chibar.conegeom import build_cone

from conftest import random_corr

compiled = pytest.importorskip("chibar._kernels")


def _problem(k, n, seed):
    rng = np.random.default_rng(seed)
    cone = build_cone(random_corr(k, rng))
    z = rng.standard_normal((n, k))
    return cone, np.ascontiguousarray(z @ cone.generators)


def test_backend_selection():
    assert kernels.get_backend("python") is _fallback
    assert kernels.get_backend("compiled") is compiled
    assert kernels.get_backend(None).IMPLEMENTATION == kernels.IMPLEMENTATION
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("k", [1, 3, 6, 10])
def test_lrs_batch_parity(k):
    cone, c = _problem(k, 2000, k)
    G = np.ascontiguousarray(cone.gram)
    null = np.zeros(k, dtype=np.int32)
    null[k - 1:] = 1
    a = compiled.lrs_batch(G, c, null, 10 * k)
    b = _fallback.lrs_batch(G, c, null, 10 * k)
    assert a[3] >= 0 and b[3] >= 0
    np.testing.assert_allclose(a[0], b[0], rtol=1e-9, atol=1e-10)
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2], b[2])


def test_nnls_kkt_both_backends():
    cone, c = _problem(7, 200, 11)
    G = np.ascontiguousarray(cone.gram)
    allowed = np.ones(7, dtype=np.int32)
    for be in (compiled, _fallback):
        for row in c:
            lam, it = be.nnls_gram(G, np.ascontiguousarray(row), allowed, 70)
            assert it >= 0
            grad = row - G @ lam
            assert np.all(lam >= 0)
            assert np.all(grad <= 1e-9)                     # dual feasibility
            assert abs(lam @ grad) <= 1e-9               # complementary slackness


def test_nnls_respects_allowed_set():
    cone, c = _problem(5, 50, 2)
    G = np.ascontiguousarray(cone.gram)
    allowed = np.array([0, 1, 0, 1, 0], dtype=np.int32)
    for row in c:
        lam, _ = compiled.nnls_gram(G, np.ascontiguousarray(row), allowed, 50)
        assert np.all(lam[allowed == 0] == 0)


def test_genz_integrand_independent_case():
    # with identity factor every conditional probability is exactly 1/2
    u = np.random.default_rng(0).random((16, 3))
    assert _fallback.genz_orthant_mean(np.eye(4), u) == 0.5 ** 4


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys
    code = ("from chibar import kernels; from chibar.lansim import *; from chibar.structs import *;"
            "import numpy as np;"
            "s = simulate(ExperimentConfig(CovSpec(np.eye(3) * 0.5 + 0.5), PartitionSpec.last(3, 1), 2000, 1));"
            "print(kernels.IMPLEMENTATION, repr(float(s.lrs.sum())))")
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, CHIBAR_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                             check=True)
        impl, total = res.stdout.split()
        out[impl] = float(total)
    assert set(out) == {"python", "compiled"}
    assert out["python"] == pytest.approx(out["compiled"], rel=1e-12)
