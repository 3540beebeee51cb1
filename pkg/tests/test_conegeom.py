import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chibar.conegeom import (build_cone, external_angle, face_masses, indices_to_mask,
                             internal_angle, intrinsic_volumes, intrinsic_volumes_mc,
                             mask_to_indices, popcount, project_cone, projection_coefficients)
from chibar.errors import DimensionTooLarge, NegativeCorrelation, NotPositiveDefinite
from chibar.numkit import equicorrelation
from chibar.weights import weights_orthogonal_point

from conftest import random_corr


def test_whitening(rng):
    s = random_corr(5, rng)
    cone = build_cone(s)
    np.testing.assert_allclose(cone.gram, np.linalg.inv(s), atol=1e-10)
    np.testing.assert_allclose(cone.generators.T @ cone.generators, cone.gram, atol=1e-10)
    np.testing.assert_allclose(cone.h, s, atol=1e-10)
    np.testing.assert_allclose(np.diag(cone.polar_gram), 1.0)


def test_build_errors():
    with pytest.raises(NotPositiveDefinite):
        build_cone(np.ones((3, 3)))
    with pytest.raises(NegativeCorrelation):
        build_cone(np.array([[1.0, -0.3], [-0.3, 1.0]]))
    with pytest.raises(DimensionTooLarge):
        build_cone(np.eye(21))
    with pytest.raises(DimensionTooLarge):
        face_masses(build_cone(np.eye(13)))


def test_mask_helpers():
    assert popcount(0b1011) == 3
    assert mask_to_indices(0b1010, 4) == [1, 3]
    assert indices_to_mask([1, 3]) == 0b1010


def test_angles_orthant():
    cone = build_cone(np.eye(4))
    for s in range(16):
        d = popcount(s)
        assert internal_angle(cone, s).value == pytest.approx(0.5 ** d)
        assert external_angle(cone, s).value == pytest.approx(0.5 ** (4 - d))


@pytest.mark.parametrize("k", [1, 3, 6])
def test_orthant_volumes_are_binomial(k):
    v = intrinsic_volumes(build_cone(np.eye(k)))
    np.testing.assert_allclose(v.weights, weights_orthogonal_point(k).weights, atol=1e-14)


def test_two_dimensional_closed_form():
    # a wedge of opening angle phi has volumes (pi - phi, pi, phi) / (2 pi)
    rho = 0.4
    cone = build_cone(np.array([[1.0, rho], [rho, 1.0]]))
    a = cone.generators
    cosphi = a[:, 0] @ a[:, 1] / np.linalg.norm(a[:, 0]) / np.linalg.norm(a[:, 1])
    phi = np.arccos(cosphi)
    v = intrinsic_volumes(cone).weights
    np.testing.assert_allclose(v, [(np.pi - phi) / (2 * np.pi), 0.5, phi / (2 * np.pi)], atol=1e-14)


@pytest.mark.parametrize("k", [3, 5])
def test_face_formula_vs_projection_oracle(k, rng):
    cone = build_cone(random_corr(k, rng))
    face = intrinsic_volumes(cone, seed=1)
    mc = intrinsic_volumes_mc(cone, 200_000, seed=2)
    z = np.abs(face.weights - mc.weights) / np.sqrt(face.std_errors ** 2 + mc.std_errors ** 2 + 1e-14)
    assert z.max() < 4.0
    assert abs(face.raw_sum - 1) < 1e-3


def test_direct_convention_does_not_sum_to_one():
    with pytest.warns(RuntimeWarning):
        v = intrinsic_volumes(build_cone(equicorrelation(3, 0.5)), convention="direct")
    assert v.raw_sum > 1.05


def test_face_masses_cached():
    cone = build_cone(equicorrelation(5, 0.3))
    assert face_masses(cone, seed=4) is face_masses(cone, seed=4)


@given(st.integers(1, 7), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_projection_properties(k, seed):
    rng = np.random.default_rng(seed)
    cone = build_cone(random_corr(k, rng))
    z = rng.standard_normal(k)
    p, face = project_cone(cone, z)
    lam = projection_coefficients(cone, z)
    assert np.all(lam >= 0)
    # Moreau: residual is orthogonal to the projection and in the polar cone
    r = z - p
    assert abs(r @ p) < 1e-9
    assert np.all(cone.generators.T @ r <= 1e-9)
    # projecting twice changes nothing
    p2, _ = project_cone(cone, p)
    np.testing.assert_allclose(p2, p, atol=1e-9)
    assert face == indices_to_mask(np.flatnonzero(lam > 1e-10))


def test_projection_subcone_and_origin(rng):
    cone = build_cone(random_corr(4, rng))
    z = rng.standard_normal(4)
    p0, f0 = project_cone(cone, z, [])
    assert f0 == 0 and np.all(p0 == 0)
    full, _ = project_cone(cone, z)
    sub, fs = project_cone(cone, z, [2, 3])
    assert fs & 0b0011 == 0
    assert sub @ sub <= full @ full + 1e-12


def test_mc_oracle_min_draws():
    with pytest.raises(ValueError):
        intrinsic_volumes_mc(build_cone(np.eye(2)), n=100)
