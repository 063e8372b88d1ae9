"""Quadrature rules and a fixed-step RK4 integrator used across the package.

Node and weight generation for Gauss-Legendre comes from
``numpy.polynomial.legendre.leggauss``; everything built on top of it
(panel doubling, sphere products, periodic rules) lives here.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

KINDS = ("gauss-legendre", "trapezoid-periodic", "product-sphere", "tanh-sinh")


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a quadrature rule.

    For ``product-sphere`` the nodes are an ``(n, 2)`` array of
    ``(theta, phi)`` pairs and the weights already include ``d(cos theta) dphi``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown quadrature kind {self.kind!r}")
        if len(self.nodes) != len(self.weights):
            raise DomainError("nodes and weights differ in length")

    @property
    def measure(self):
        return float(np.sum(self.weights))


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=-1.0, b=1.0):
    if n < 1:
        raise DomainError("need at least one node")
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, "gauss-legendre")


def trapezoid_periodic(n, a=0.0, b=2 * np.pi):
    if n < 1:
        raise DomainError("need at least one node")
    h = (b - a) / n
    return QuadratureRule(a + h * np.arange(n), np.full(n, h), "trapezoid-periodic")


def tanh_sinh(level, a=-1.0, b=1.0):
    """Double-exponential rule with step 2^-level; tolerates endpoint singularities.

    Nodes that round onto an endpoint are dropped.
    """
    h = 2.0 ** (-level)
    kmax = int(math.ceil(3.2 / h))
    u = h * np.arange(-kmax, kmax + 1)
    s = 0.5 * np.pi * np.sinh(u)
    x = np.tanh(s)
    w = h * 0.5 * np.pi * np.cosh(u) / np.cosh(s) ** 2
    half = 0.5 * (b - a)
    nodes = a + half * (1 + x)
    keep = (nodes > a) & (nodes < b) & (w > 0)
    return QuadratureRule(nodes[keep], half * w[keep], "tanh-sinh")


def product_sphere(n_theta=64, n_phi=128):
    ct = gauss_legendre(n_theta)
    ph = trapezoid_periodic(n_phi)
    theta = np.arccos(ct.nodes)
    T, P = np.meshgrid(theta, ph.nodes, indexing="ij")
    W = np.outer(ct.weights, ph.weights)
    nodes = np.column_stack([T.ravel(), P.ravel()])
    return QuadratureRule(nodes, W.ravel(), "product-sphere")


def sphere_integrate(f, tol=1e-10, n_theta=64, n_phi=128, max_doublings=4):
    """Integrate ``f(theta, phi)`` over the unit sphere.

    The grid is doubled in both directions until two successive estimates
    agree to ``tol`` (absolute, scaled by ``max(1, |I|)``).
    """
    prev = None
    for _ in range(max_doublings + 1):
        rule = product_sphere(n_theta, n_phi)
        vals = f(rule.nodes[:, 0], rule.nodes[:, 1])
        est = np.tensordot(rule.weights, np.asarray(vals), axes=(0, 0))
        if prev is not None and np.max(np.abs(est - prev)) <= tol * max(1.0, np.max(np.abs(est))):
            return est
        prev = est
        n_theta, n_phi = 2 * n_theta, 2 * n_phi
    raise ConvergenceError("sphere quadrature did not settle")


def _panels(f, a, b, npanel, order):
    x, w = _leggauss(order)
    edges = np.linspace(a, b, npanel + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    return np.dot(ww, f(pts))


def integrate(f, a, b, tol=1e-10, breakpoints=None, order=20, max_level=16):
    """Adaptive Gauss-Legendre by panel doubling.

    ``f`` must accept an array of abscissae.  Each piece between sorted
    ``breakpoints`` is refined separately; refinement stops when two
    successive panel counts agree to ``tol * max(1, |I|)``.
    """
    if b == a:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = [a]
    for c in sorted(breakpoints or ()):
        if a < c < b:
            cuts.append(c)
    cuts.append(b)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        npanel = 1
        prev = _panels(f, lo, hi, npanel, order)
        for _ in range(max_level):
            npanel *= 2
            cur = _panels(f, lo, hi, npanel, order)
            if abs(cur - prev) <= tol * max(1.0, abs(cur)):
                break
            prev = cur
        else:
            raise ConvergenceError(f"panel doubling stalled on [{lo}, {hi}]")
        total = total + cur
    return sign * total


def rk4(rhs, y0, t0, t1, nsteps, keep=False):
    """Classical fixed-step RK4 for ``y' = rhs(t, y)``."""
    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, float))
    h = (t1 - t0) / nsteps
    t = t0
    out = [y.copy()] if keep else None
    for i in range(nsteps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        if keep:
            out.append(y.copy())
    if keep:
        return np.linspace(t0, t1, nsteps + 1), np.array(out)
    return y
