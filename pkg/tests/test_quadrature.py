import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fieldkernel import quadrature as q
from fieldkernel.errors import ConvergenceError, DomainError


@given(st.integers(1, 30))
def test_gauss_legendre_exact_for_polynomials(n):
    rule = q.gauss_legendre(n, 0.0, 2.0)
    deg = 2 * n - 1
    assert np.dot(rule.weights, rule.nodes**deg) == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-12)


def test_trapezoid_spectral_for_periodic():
    rule = q.trapezoid_periodic(32)
    assert np.dot(rule.weights, np.exp(np.cos(rule.nodes))) == pytest.approx(2 * math.pi * 1.2660658777520082, rel=1e-14)


def test_tanh_sinh_endpoint_singularity():
    rule = q.tanh_sinh(6)
    assert np.dot(rule.weights, 1 / np.sqrt(1 - rule.nodes**2)) == pytest.approx(math.pi, rel=1e-7)
    assert np.all(np.abs(rule.nodes) < 1)


def test_product_sphere_measure():
    rule = q.product_sphere(8, 16)
    assert rule.measure == pytest.approx(4 * math.pi, rel=1e-14)


def test_sphere_integrate_moment():
    val = q.sphere_integrate(lambda t, p: np.cos(t) ** 2)
    assert val == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_integrate_with_breakpoint():
    f = lambda x: np.abs(x - 0.3)
    assert q.integrate(f, 0.0, 1.0, breakpoints=[0.3]) == pytest.approx(0.045 + 0.245, abs=1e-14)
    assert q.integrate(np.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1), rel=1e-14)


def test_integrate_reports_stall():
    with pytest.raises(ConvergenceError):
        q.integrate(lambda x: np.sign(np.sin(1e4 * x)), 0.0, 1.0, tol=1e-14, max_level=3)


def test_rule_validation():
    with pytest.raises(DomainError):
        q.QuadratureRule(np.zeros(2), np.zeros(2), "simpson")
    with pytest.raises(DomainError):
        q.gauss_legendre(0)


def test_rk4_fourth_order():
    err = []
    for n in (50, 100):
        y = q.rk4(lambda t, y: -y, [1.0], 0.0, 1.0, n)
        err.append(abs(y[0] - math.exp(-1)))
    assert 14 < err[0] / err[1] < 18
