import math

import numpy as np
import pytest

from meshkit.errors import ArgumentError, StructuralError
from meshkit.harmonics.angles import barycentric_to_angles, direction_to_angles
from meshkit.harmonics.basis import basis_index, basis_size, real_sh_basis, sh_normalization
from meshkit.harmonics.filters import HarmonicFilter, eval_filter, eval_radial_filter, radial_profile
from meshkit.harmonics.legendre import assoc_legendre, legendre_table

Y00 = 1.0 / (2.0 * math.sqrt(math.pi))


def test_legendre_values():
    assert assoc_legendre(0, 0, 0.3) == 1.0
    assert assoc_legendre(1, 1, 0.0) == pytest.approx(1.0)
    assert assoc_legendre(2, 1, 0.5) == pytest.approx(3 * 0.5 * math.sqrt(0.75))
    assert assoc_legendre(2, 0, 0.5) == pytest.approx(0.5 * (3 * 0.25 - 1))
    assert assoc_legendre(3, 3, 0.2) == pytest.approx(15 * (1 - 0.04) ** 1.5)


def test_legendre_table_agrees_with_recurrence(rng):
    x = rng.uniform(-1, 1, size=7)
    table = legendre_table(5, x)
    for l in range(6):
        for m in range(l + 1):
            np.testing.assert_allclose(table[l, m], assoc_legendre(l, m, x), rtol=1e-12, atol=1e-12)
        assert np.all(table[l, l + 1:] == 0.0)


@pytest.mark.parametrize("l, m, x", [(1, 2, 0.0), (2, -1, 0.0), (2, 1, 1.5)])
def test_legendre_rejects(l, m, x):
    with pytest.raises(ArgumentError):
        assoc_legendre(l, m, x)


@pytest.mark.parametrize("degree", range(7))
def test_basis_size(degree):
    assert real_sh_basis(degree, 0.4, 1.1).shape == (basis_size(degree),) == ((degree + 1) ** 2,)


def test_basis_rejects_negative_degree():
    with pytest.raises(ArgumentError):
        basis_size(-1)


def test_basis_constant_term(rng):
    theta = rng.uniform(0, np.pi, size=20)
    phi = rng.uniform(0, 2 * np.pi, size=20)
    np.testing.assert_allclose(real_sh_basis(3, theta, phi)[:, 0], Y00)


def test_basis_north_pole_has_only_zonal_terms():
    values = real_sh_basis(4, 0.0, 0.7)
    zonal = [basis_index(l, 0) for l in range(5)]
    mask = np.ones(len(values), dtype=bool)
    mask[zonal] = False
    assert np.all(values[mask] == 0.0)
    np.testing.assert_allclose(values[zonal], [sh_normalization(l, 0) for l in range(5)])


def test_basis_order_within_degree():
    theta, phi = 0.9, 0.4
    values = real_sh_basis(2, theta, phi)
    radial = sh_normalization(2, 1) * assoc_legendre(2, 1, math.cos(theta))
    assert values[basis_index(2, 1, "cos")] == pytest.approx(radial * math.cos(phi))
    assert values[basis_index(2, 1, "sin")] == pytest.approx(radial * math.sin(phi))
    assert [basis_index(2, 0), basis_index(2, 1), basis_index(2, 2), basis_index(2, 1, "sin")] == [4, 5, 6, 7]


def test_basis_quadrature_orthogonality():
    degree = 4
    nodes, weights = np.polynomial.legendre.leggauss(64)
    phi = 2 * np.pi * np.arange(128) / 128
    theta = np.arccos(nodes)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.repeat(weights[:, None], 128, axis=1) * (2 * np.pi / 128)
    values = real_sh_basis(degree, tt, pp).reshape(-1, basis_size(degree))
    gram = values.T @ (values * ww.reshape(-1, 1))
    expected = np.full(basis_size(degree), 0.5)
    expected[[basis_index(l, 0) for l in range(degree + 1)]] = 1.0
    np.testing.assert_allclose(gram, np.diag(expected), atol=1e-6)


def test_filter_constant_degree_zero():
    filt = HarmonicFilter(np.array([[2.0]]))
    np.testing.assert_allclose(eval_filter(filt, 1.3, 4.0), [2.0 * Y00])


def test_zero_filter():
    filt = HarmonicFilter.zeros(3, 5)
    assert filt.degree == 3
    np.testing.assert_array_equal(eval_filter(filt, np.array([0.1, 2.0]), np.array([0.0, 5.0])), np.zeros((2, 5)))


def test_filter_rejects_non_square_rows():
    with pytest.raises(StructuralError):
        HarmonicFilter(np.zeros((5, 2)))


def test_filter_matches_term_by_term_sum(rng):
    degree, channels = 3, 4
    coefficients = rng.normal(size=(basis_size(degree), channels))
    filt = HarmonicFilter(coefficients)
    theta, phi = 1.1, 2.2
    expected = np.zeros(channels)
    x = math.cos(theta)
    for l in range(degree + 1):
        expected += coefficients[basis_index(l, 0)] * sh_normalization(l, 0) * assoc_legendre(l, 0, x)
        for m in range(1, l + 1):
            radial = sh_normalization(l, m) * assoc_legendre(l, m, x)
            expected += coefficients[basis_index(l, m, "cos")] * radial * math.cos(m * phi)
            expected += coefficients[basis_index(l, m, "sin")] * radial * math.sin(m * phi)
    np.testing.assert_allclose(eval_filter(filt, theta, phi), expected, rtol=0, atol=1e-12)


def test_filter_is_linear(rng):
    a = rng.normal(size=(16, 3))
    b = rng.normal(size=(16, 3))
    theta = rng.uniform(0, np.pi, 10)
    phi = rng.uniform(0, 2 * np.pi, 10)
    summed = eval_filter(HarmonicFilter(a + b), theta, phi)
    np.testing.assert_allclose(summed, eval_filter(HarmonicFilter(a), theta, phi) + eval_filter(HarmonicFilter(b), theta, phi), atol=1e-12)


def test_radial_filter_endpoints(rng):
    filt = HarmonicFilter(rng.normal(size=(9, 2)), c0=np.array([0.3, -1.0]), radius=0.5)
    theta, phi = np.array([0.7]), np.array([1.9])
    plain = eval_filter(filt, theta, phi)
    np.testing.assert_allclose(eval_radial_filter(filt, theta, phi, np.array([0.5])).values, plain)
    np.testing.assert_array_equal(eval_radial_filter(filt, theta, phi, np.array([0.0])).values, filt.c0[None])
    np.testing.assert_allclose(eval_radial_filter(filt, theta, phi, np.array([0.25])).values, 0.5 * (plain + filt.c0))


def test_radial_filter_is_affine_in_r(rng):
    filt = HarmonicFilter(rng.normal(size=(4, 1)), c0=np.array([0.2]), radius=1.0)
    r = np.array([0.1, 0.4, 0.7])
    values = eval_radial_filter(filt, np.full(3, 0.3), np.full(3, 0.6), r).values[:, 0]
    np.testing.assert_allclose(values[2] - values[1], values[1] - values[0], atol=1e-12)


def test_radial_profile_clamps():
    z, clamped = radial_profile(np.array([0.5, 2.0]), 1.0)
    np.testing.assert_array_equal(z, [0.5, 1.0])
    np.testing.assert_array_equal(clamped, [False, True])


def test_radial_filter_flags_clamped_radii(rng):
    filt = HarmonicFilter(rng.normal(size=(4, 2)), c0=np.array([0.3, -1.0]), radius=0.5)
    theta, phi = np.full(2, 0.7), np.full(2, 1.9)
    result = eval_radial_filter(filt, theta, phi, np.array([0.5, 3.0]))
    np.testing.assert_array_equal(result.clamped, [False, True])
    np.testing.assert_allclose(result.values[1], result.values[0])


def test_radial_filter_needs_c0():
    with pytest.raises(ArgumentError):
        eval_radial_filter(HarmonicFilter(np.zeros((1, 1))), 0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "v, theta, phi",
    [((0, 0, 1), 0.0, 0.0), ((1, 0, 0), np.pi / 2, 0.0), ((0, -1, 0), np.pi / 2, 3 * np.pi / 2), ((0, 0, -1), np.pi, 0.0)],
)
def test_direction_to_angles(v, theta, phi):
    t, p = direction_to_angles(np.array(v, dtype=float))
    assert t == pytest.approx(theta)
    assert p == pytest.approx(phi)


def test_direction_normalises_near_unit():
    t, p = direction_to_angles(np.array([0.0, 1.5, 0.0]))
    assert t == pytest.approx(np.pi / 2)
    assert p == pytest.approx(np.pi / 2)


def test_direction_rejects_far_from_unit():
    with pytest.raises(ArgumentError):
        direction_to_angles(np.array([0.0, 0.0, 3.0]))


def test_barycentric_corners_and_centroid():
    theta, phi = barycentric_to_angles(np.eye(3))
    np.testing.assert_allclose(theta, [np.pi / 2, np.pi / 2, 0.0])
    np.testing.assert_allclose(phi, [0.0, np.pi / 2, 0.0])
    t, p = barycentric_to_angles(np.full(3, 1 / 3))
    assert t == pytest.approx(math.acos(1 / math.sqrt(3)))
    assert p == pytest.approx(np.pi / 4)


def test_barycentric_rejects_zero():
    with pytest.raises(ArgumentError):
        barycentric_to_angles(np.zeros(3))
