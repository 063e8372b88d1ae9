import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fieldkernel import specialfn as sf
from fieldkernel.errors import DomainError


@given(st.floats(0.05, 60.0))
def test_gamma_matches_scipy(x):
    assert sf.gamma(x) == pytest.approx(special.gamma(x), rel=1e-13)


def test_gamma_half_integers():
    assert sf.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert sf.gamma(5) == pytest.approx(24.0, rel=1e-15)
    with pytest.raises(DomainError):
        sf.gamma(-1.0)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 13, 40])
def test_cyl_bessel_against_scipy(m):
    x = np.linspace(0.0, 60.0, 301)
    np.testing.assert_allclose(sf.cyl_bessel_j(m, x), special.jv(m, x), atol=1e-13)


def test_cyl_bessel_negative_order_and_argument():
    assert sf.cyl_bessel_j(-3, 2.5) == pytest.approx(-special.jv(3, 2.5), abs=1e-15)
    assert sf.cyl_bessel_j(3, -2.5) == pytest.approx(-special.jv(3, 2.5), abs=1e-15)


@given(st.integers(0, 30), st.one_of(st.just(0.0), st.floats(1e-6, 50.0)))
@settings(max_examples=60)
def test_spherical_jn(ell, x):
    got = sf.spherical_jn_all(ell, x)[ell]
    assert got == pytest.approx(special.spherical_jn(ell, x), abs=1e-13)


@given(st.integers(0, 12), st.floats(0.5, 50.0))
@settings(max_examples=60)
def test_hankel_pair(ell, x):
    j, h = sf.spherical_bessel_pair(ell, x)
    y = special.spherical_yn(ell, x)
    assert h.real == pytest.approx(j)
    assert h.imag == pytest.approx(y, rel=1e-11, abs=1e-13)


def test_pair_derivatives_and_wronskian():
    for ell in range(6):
        x = 3.7
        dj, dh = sf.spherical_bessel_pair_deriv(ell, x)
        assert dj == pytest.approx(special.spherical_jn(ell, x, derivative=True), abs=1e-13)
        assert dh.imag == pytest.approx(special.spherical_yn(ell, x, derivative=True), abs=1e-12)
        j, h = sf.spherical_bessel_pair(ell, x)
        # j h' - j' h = i / x^2
        assert (j * dh - dj * h) == pytest.approx(1j / x**2, abs=1e-13)


def test_hankel_needs_positive_argument():
    with pytest.raises(DomainError):
        sf.spherical_bessel_pair(1, 0.0)
    assert sf.spherical_bessel_pair(0, 0.0, hankel=False) == (1.0, None)


@pytest.mark.parametrize("ell", [0, 1, 2, 7, 20])
def test_legendre(ell):
    x = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(sf.legendre_p(ell, x), special.eval_legendre(ell, x), atol=1e-13)
    np.testing.assert_allclose(sf.legendre_p_all(ell, x)[ell], special.eval_legendre(ell, x), atol=1e-13)
    with pytest.raises(DomainError):
        sf.legendre_p(ell, 1.5)


@given(st.integers(0, 10), st.data(), st.floats(0.0, math.pi), st.floats(0.0, 2 * math.pi))
@settings(max_examples=80)
def test_sph_harm_matches_scipy(ell, data, theta, phi):
    m = data.draw(st.integers(-ell, ell))
    got = sf.sph_harm(sf.SphericalHarmonicIndex(ell, m), theta, phi)
    assert got == pytest.approx(special.sph_harm_y(ell, m, theta, phi), abs=1e-12)


def test_sph_harm_all_consistent():
    th, ph = np.array([0.3, 1.2]), np.array([2.0, 5.1])
    table = sf.sph_harm_all(5, th, ph)
    for (ell, m), v in table.items():
        np.testing.assert_allclose(v, sf.sph_harm((ell, m), th, ph), atol=1e-14)


def test_sph_harm_conjugation():
    y = sf.sph_harm((4, 3), 0.7, 1.1)
    assert sf.sph_harm((4, -3), 0.7, 1.1) == pytest.approx(-np.conj(y))


def test_index_validation():
    with pytest.raises(DomainError):
        sf.SphericalHarmonicIndex(2, 3)
    with pytest.raises(DomainError):
        sf.SphericalHarmonicIndex(-1, 0)


@pytest.mark.parametrize("D,area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_solid_angle(D, area):
    assert sf.solid_angle(D) == pytest.approx(area, rel=1e-14)


def test_double_factorial():
    assert [sf.double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]
