from itertools import combinations

import numpy as np
import pytest

from chibar.conegeom import build_cone
from chibar.lansim import (ExperimentConfig, diagnostics, ecdf_table, empirical_quantile,
                           lrt_statistic, mc_ray_weights, run_experiment, sample_mvn, simulate,
                           sup_distance, whiten)
from chibar.mixture import MixtureDist, mixture_cdf
from chibar.numkit import equicorrelation
from chibar.structs import CovSpec, PartitionSpec
from chibar.weights import weights_orthogonal_nuisance

from conftest import random_corr


def _proj_sq_bruteforce(A, z, allowed):
    """Squared norm of the projection onto cone(A[:, allowed]) by enumerating faces."""
    best = 0.0
    for r in range(1, len(allowed) + 1):
        for s in combinations(allowed, r):
            B = A[:, list(s)]
            lam, *_ = np.linalg.lstsq(B, z, rcond=None)
            if np.all(lam >= -1e-12):
                p = B @ lam
                # a feasible face projection is optimal iff the residual lies in the polar cone
                if np.all(A[:, allowed].T @ (z - p) <= 1e-9):
                    return float(p @ p)
    return best


def test_lrs_identity_closed_form():
    cov = CovSpec(np.eye(4))
    part = PartitionSpec.last(4, 1)
    sim = simulate(ExperimentConfig(cov, part, 5000, seed=3))
    z = sample_mvn(cov, 5000, seed=3)
    expected = np.sum(np.maximum(z[:, :3], 0) ** 2, axis=1)
    np.testing.assert_allclose(sim.lrs, np.where(expected < 1e-10, 0, expected), atol=1e-10)


def test_lrs_vs_bruteforce(rng):
    k = 5
    cov = CovSpec(random_corr(k, rng))
    cone = build_cone(cov)
    part = PartitionSpec.last(k, 2)
    cfg = ExperimentConfig(cov, part, 300, seed=5)
    sim = simulate(cfg, cone)
    zw = whiten(cone, sample_mvn(cov, 300, seed=5))
    A = cone.generators
    for i in range(300):
        full = _proj_sq_bruteforce(A, zw[i], list(range(k)))
        null = _proj_sq_bruteforce(A, zw[i], list(part.nuisance))
        oracle = max(full - null, 0.0)
        assert sim.lrs[i] == pytest.approx(0.0 if oracle < 1e-10 else oracle, abs=1e-9)
        assert lrt_statistic(cone, part, zw[i]) == pytest.approx(oracle, abs=1e-9)


def test_reproducible_across_jobs():
    cov = CovSpec(equicorrelation(6, 0.4))
    part = PartitionSpec.last(6, 2)
    a = simulate(ExperimentConfig(cov, part, 30_000, seed=11, streams=1))
    b = simulate(ExperimentConfig(cov, part, 30_000, seed=11, streams=4))
    assert a.lrs.tobytes() == b.lrs.tobytes()
    np.testing.assert_array_equal(a.dim_full, b.dim_full)


def test_orthogonal_regime_matches_closed_form():
    cov = CovSpec(np.eye(4))
    part = PartitionSpec.last(4, 1)
    dist = MixtureDist(weights_orthogonal_nuisance(4, 1))
    report, sim = run_experiment(ExperimentConfig(cov, part, 100_000, seed=0), dist)
    assert report.d_inf <= 0.01
    assert 0.9 < report.tail_ratio < 1.1
    w = mc_ray_weights(sim, part.p)
    np.testing.assert_allclose(w, dist.weights.weights[:4], atol=0.01)


def _sup_oracle(sample, dist):
    x = np.sort(sample)
    n = x.size
    grid = np.unique(np.concatenate([x, [0.0]]))
    best = 0.0
    for t in grid:
        right = np.sum(x <= t) / n
        best = max(best, abs(right - float(mixture_cdf(dist, t))))
        if t > 0:
            left = np.sum(x < t) / n
            best = max(best, abs(left - float(mixture_cdf(dist, t))))
    return best


def test_sup_distance_oracle():
    rng = np.random.default_rng(4)
    dist = MixtureDist.from_weights([0.25, 0.5, 0.25])
    for _ in range(5):
        s = np.where(rng.random(300) < 0.3, 0.0, rng.chisquare(1, 300))
        assert sup_distance(s, dist) == pytest.approx(_sup_oracle(s, dist), abs=1e-15)


def test_empirical_quantile():
    x = np.arange(1.0, 101.0)
    assert empirical_quantile(x, 0.95) == 95.0
    assert empirical_quantile(x, 0.5) == 50.0
    assert empirical_quantile(x, 0.001) == 1.0


def test_diagnostics_fields_and_ecdf():
    dist = MixtureDist.from_weights([0.5, 0.5])
    s = np.array([0.0, 0.0, 1e-12, 0.5, 2.0, 4.0])
    r = diagnostics(s, dist, seed=7)
    assert r.n_draws == 6 and r.seed == 7
    assert list(r.to_dict()) == ["d_inf", "tail_ratio", "q50_emp", "q50_mix", "q95_emp",
                                 "q95_mix", "n_draws", "seed"]
    tab = ecdf_table(s, dist)
    assert tab[0, 0] == 0.0 and tab[0, 1] == pytest.approx(0.5)
    assert tab[-1, 1] == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(CovSpec(np.eye(3)), PartitionSpec.last(4, 1))
    with pytest.raises(ValueError):
        ExperimentConfig(CovSpec(np.eye(3)), PartitionSpec.last(3, 1), n_draws=0)


def test_sample_mvn_covariance():
    s = equicorrelation(3, 0.6)
    z = sample_mvn(s, 200_000, seed=1)
    np.testing.assert_allclose(np.cov(z.T), s, atol=0.01)
