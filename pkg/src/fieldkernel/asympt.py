"""Asymptotic expansions of integrals and the JWKB solution of -eps^2 psi'' + U psi = 0."""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import ConvergenceError, DomainError, TurningPointError
from .specialfn import gamma


class ClassificationError(DomainError):
    code = "classification"


@dataclass(frozen=True)
class AsymptoticSeries:
    terms: tuple
    truncation_index: int
    first_omitted_bound: float

    @property
    def value(self):
        return sum(self.terms[: self.truncation_index])


def _erf_terms(x, n):
    # l-th term is (-1)^(l-1) (2l-3)!! exp(-x^2) / (2^l x^(2l-1)); built by the
    # ratio -(2l-1)/(2x^2) so no factorial is ever formed
    lead = math.exp(-x * x) / (2 * x)
    ratio = 1.0
    out = []
    for ell in range(1, n + 1):
        out.append(lead * ratio)
        ratio *= -(2 * ell - 1) / (2 * x * x)
    return out


def erf_asymptotic(x, n):
    """Integration-by-parts series for int_x^inf exp(-t^2) dt, n terms."""
    if not x > 0:
        raise DomainError("x must be positive")
    if n < 1:
        raise DomainError("need at least one term")
    terms = _erf_terms(x, n + 1)
    return AsymptoticSeries(tuple(terms[:n]), n, abs(terms[n]))


def erf_optimal_terms(x, nmax=None):
    """Number of terms that stops just before the smallest term."""
    nmax = nmax or int(x * x) + 4
    mags = np.abs(_erf_terms(x, nmax))
    smallest = int(np.argmin(mags)) + 1
    return max(1, smallest - 1)


def erf_optimal(x):
    return erf_asymptotic(x, erf_optimal_terms(x))


def stirling(x):
    """sqrt(2 pi / x) x^x e^-x, the leading approximation to Gamma(x)."""
    if not x > 0:
        raise DomainError("x must be positive")
    return math.sqrt(2 * math.pi / x) * math.exp(x * math.log(x) - x)


def _derivs(phi, c, h, side, order=2):
    """phi', phi'' at c; one-sided (side = +-1) or central (side = 0)."""
    if side == 0:
        d1 = (phi(c + h) - phi(c - h)) / (2 * h)
        d2 = (phi(c + h) - 2 * phi(c) + phi(c - h)) / h**2
        return d1, d2
    s = side * h
    p = [phi(c + k * s) for k in range(4)]
    d1 = (-11 * p[0] + 18 * p[1] - 9 * p[2] + 2 * p[3]) / (6 * s)
    d2 = (2 * p[0] - 5 * p[1] + 4 * p[2] - p[3]) / s**2
    return d1, d2


LAPLACE_KINDS = ("interior-quadratic", "endpoint-linear", "endpoint-quadratic")


def laplace_leading(f, phi, c, kind, x, nu=1.0, side=1, h=1e-4, probe_tol=1e-5):
    """Leading term of int f(t) exp(x phi(t)) dt as x -> infinity.

    The maximum of phi sits at ``c``.  For the endpoint kinds the integral
    runs from ``c`` towards ``side`` (+1 or -1), and ``f`` may behave as
    g(t) |t - c|^(nu - 1): pass the regular factor g as ``f`` and the power
    through ``nu``.  Derivative probes at ``c`` check the declared kind.
    """
    if kind not in LAPLACE_KINDS:
        raise ClassificationError(f"unknown kind {kind!r}")
    probe_side = 0 if kind == "interior-quadratic" else side
    d1, d2 = _derivs(phi, c, h, probe_side)
    scale = max(1.0, abs(d2))
    fc = f(c)
    if fc == 0:
        raise ClassificationError("f vanishes at the maximum")
    lead = fc * math.exp(x * phi(c))
    if kind == "endpoint-linear":
        if abs(d1) <= probe_tol * scale or d1 * side > 0:
            raise ClassificationError("phi is not decreasing away from the endpoint")
        return lead * gamma(nu) / (x * abs(d1)) ** nu
    if abs(d1) > probe_tol * scale or not d2 < 0:
        raise ClassificationError("phi does not have a quadratic maximum at c")
    a = abs(d2) / 2
    one_side = gamma(nu / 2) / (2 * (x * a) ** (nu / 2))
    if kind == "interior-quadratic":
        return lead * 2 * one_side
    return lead * one_side


def _taylor_derivs(phi, a, p, h):
    """phi^(k)(a) for k = 1..p from a degree-(2p+2) fit on a symmetric stencil."""
    m = p + 1
    ks = np.arange(-m, m + 1)
    vals = np.array([phi(a + k * h) for k in ks])
    V = np.vander(ks * h, 2 * m + 1, increasing=True)
    coef = np.linalg.solve(V, vals)
    return [coef[k] * math.factorial(k) for k in range(1, p + 1)]


def stationary_phase_leading(f, phi, a, p, x, two_sided=False, h=1e-2, probe_tol=1e-6):
    """Leading term of int_a^b f(t) exp(i x phi(t)) dt with phi stationary at a.

    ``p`` is the order of the first non-vanishing derivative of phi at a.
    ``two_sided`` doubles the one-sided value for an interior point with p
    even.
    """
    if p < 2 or int(p) != p:
        raise ClassificationError("p must be an integer >= 2")
    d = _taylor_derivs(phi, a, p, h)
    dp = d[-1]
    scale = max(1.0, abs(dp))
    if any(abs(v) > probe_tol * scale * max(1.0, 1.0 / h ** (p - k)) for k, v in enumerate(d[:-1], 1)):
        raise ClassificationError("lower derivatives of phi do not vanish at a")
    if abs(dp) <= probe_tol * scale:
        raise ClassificationError(f"phi^({p}) vanishes at a")
    if two_sided and p % 2:
        raise ClassificationError("two-sided form needs even p")
    sign = 1 if dp > 0 else -1
    val = (
        f(a)
        * np.exp(1j * (x * phi(a) + sign * math.pi / (2 * p)))
        * gamma(1.0 / p)
        / p
        * (math.factorial(p) / (x * abs(dp))) ** (1.0 / p)
    )
    return complex(2 * val if two_sided else val)


@dataclass(frozen=True)
class JwkbProblem:
    U: Callable
    epsilon: float
    order: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.order < 0:
            raise DomainError("order must be non-negative")


def _cheb(fn, lo, hi, tol=1e-14, deg=16, max_deg=1024):
    while deg <= max_deg:
        c = Chebyshev.interpolate(fn, deg, domain=[lo, hi])
        tail = np.max(np.abs(c.coef[-3:]))
        if tail <= tol * max(1.0, np.max(np.abs(c.coef))):
            return c
        deg *= 2
    raise ConvergenceError("Chebyshev representation did not converge")


def _check_no_turning_point(U, lo, hi, n=2049):
    xs = np.linspace(lo, hi, n)
    vals = np.array([U(v) for v in xs], dtype=float)
    if np.any(~(vals > 0)):
        bad = xs[np.argmax(~(vals > 0))]
        raise TurningPointError(f"U <= 0 near x = {bad}")


class JwkbSolution:
    """psi_+- = U^-1/4 exp(-+ S/eps) sum eps^l Q_l, all integrals started at x0."""

    def __init__(self, problem, x0, x1, sign):
        if sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        pts = np.append(np.atleast_1d(np.asarray(x1, dtype=float)), x0)
        lo, hi = float(pts.min()), float(pts.max())
        if lo == hi:
            hi = lo + 1e-12
        U = problem.U
        _check_no_turning_point(U, lo, hi)
        vec = lambda f: (lambda t: np.array([f(v) for v in np.atleast_1d(t)], dtype=float))
        self.problem = problem
        self.x0 = x0
        self.sign = sign
        self.root = _cheb(vec(lambda t: math.sqrt(U(t))), lo, hi)
        self.quarter = _cheb(vec(lambda t: U(t) ** -0.25), lo, hi)
        self.S = self.root.integ(lbnd=x0)
        Q = [Chebyshev([1.0], domain=[lo, hi])]
        for _ in range(problem.order):
            inner = (self.quarter * Q[-1]).deriv(2)
            Q.append(sign * 0.5 * (self.quarter * inner).integ(lbnd=x0))
        self.Q = Q

    def series(self, x):
        eps = self.problem.epsilon
        return sum(eps**k * q(x) for k, q in enumerate(self.Q))

    def __call__(self, x):
        eps = self.problem.epsilon
        return self.quarter(x) * np.exp(-self.sign * self.S(x) / eps) * self.series(x)

    def derivative(self, x):
        eps = self.problem.epsilon
        amp = self.quarter * sum((eps**k) * q for k, q in enumerate(self.Q))
        ex = np.exp(-self.sign * self.S(x) / eps)
        return ex * (amp.deriv()(x) - self.sign * self.root(x) / eps * amp(x))


def jwkb_solve(problem, x0, x, sign=1, derivative=False):
    """Evaluate psi_+ (sign=+1, decaying) or psi_- (sign=-1, growing) at x.

    U must stay positive on [x0, x]; otherwise a turning-point error is raised.
    """
    sol = JwkbSolution(problem, x0, x, sign)
    val = sol(x)
    if derivative:
        return val, sol.derivative(x)
    return val
