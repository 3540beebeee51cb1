import numpy as np
import pytest
from scipy import optimize, stats

from chibar.mixture import MixtureDist, mixture_cdf, mixture_quantile
from chibar.weights import weights_orthogonal_point


def _oracle_cdf(w, t):
    return w[0] * (t >= 0) + sum(wj * stats.chi2.cdf(t, j) for j, wj in enumerate(w) if j > 0)


@pytest.mark.parametrize("w, expected", [
    ([0.25, 0.5, 0.25], 4.2306),   # K=2 orthant
    ([0.0, 0.5, 0.5], 5.1384),     # the familiar 1/2 chi2_1 + 1/2 chi2_2 critical value
])
def test_q95_two_dof(w, expected):
    oracle = optimize.brentq(lambda t: _oracle_cdf(w, t) - 0.95, 0.1, 20, xtol=1e-13)
    dist = MixtureDist.from_weights(w)
    assert dist.quantile(0.95) == pytest.approx(oracle, abs=1e-8)
    assert oracle == pytest.approx(expected, abs=1e-4)


def test_cdf_matches_oracle():
    w = weights_orthogonal_point(5)
    t = np.linspace(0, 25, 101)
    np.testing.assert_allclose(mixture_cdf(MixtureDist(w), t), _oracle_cdf(w.weights, t), atol=1e-14)


def test_cdf_basics():
    dist = MixtureDist.from_weights([0.3, 0.7])
    assert mixture_cdf(dist, -1.0) == 0.0
    assert mixture_cdf(dist, 0.0) == pytest.approx(0.3)
    assert dist.sf(0.0) == pytest.approx(0.7)
    t = np.linspace(0, 30, 300)
    assert np.all(np.diff(mixture_cdf(dist, t)) >= 0)


def test_quantile_at_atom():
    dist = MixtureDist.from_weights([0.5, 0.5])
    assert mixture_quantile(dist, 0.5) == 0.0
    assert mixture_quantile(dist, 0.3) == 0.0
    assert mixture_quantile(dist, 0.9) == pytest.approx(stats.chi2.ppf(0.8, 1), abs=1e-8)
    with pytest.raises(ValueError):
        mixture_quantile(dist, 1.0)


def test_quantile_inverts_cdf():
    dist = MixtureDist(weights_orthogonal_point(8))
    for q in (0.1, 0.5, 0.95, 0.999):
        assert mixture_cdf(dist, dist.quantile(q)) == pytest.approx(q, abs=1e-9)
