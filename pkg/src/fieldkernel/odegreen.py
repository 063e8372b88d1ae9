"""Green's functions of second-order linear ODEs and the damped oscillator."""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .errors import DomainError, SingularityError
from .specialfn import spherical_bessel_pair


@dataclass(frozen=True)
class LinearOde2:
    """Operator p2 f'' + p1 f' + p0 f on [a, b]."""

    p0: Callable
    p1: Callable
    p2: Callable
    a: float
    b: float

    def apply(self, f, z, h=1e-4):
        fm, f0, fp = f(z - h), f(z), f(z + h)
        return self.p2(z) * (fp - 2 * f0 + fm) / h**2 + self.p1(z) * (fp - fm) / (2 * h) + self.p0(z) * f0


@dataclass(frozen=True)
class SymmetricGreenSpec:
    """Homogeneous pair, Wronskian normalisation at ``z = b`` and free constants."""

    f1: Callable
    f2: Callable
    W0: float
    A1: float = 0.0
    A2: float = 0.0
    chi: float = 0.0
    df1: Optional[Callable] = None
    df2: Optional[Callable] = None


@dataclass(frozen=True)
class DampedOscillator:
    gamma: float
    Omega: float

    def __post_init__(self):
        if not (self.gamma >= 0 and self.Omega >= self.gamma):
            raise DomainError("need Omega >= gamma >= 0")

    @property
    def omega_sq(self):
        return self.Omega**2 - self.gamma**2


def wronskian_profile(ode, W0, z, tol=1e-12):
    """W0 * exp(-integral_b^z p1/p2)."""
    if not min(ode.a, ode.b) <= z <= max(ode.a, ode.b):
        raise DomainError(f"z={z} outside [{ode.a}, {ode.b}]")

    def ratio(s):
        p2 = np.asarray(ode.p2(s), dtype=float) * np.ones_like(s)
        if np.any(p2 == 0) or np.any(np.abs(p2) < 1e-300):
            raise SingularityError("p2 vanishes on the integration path")
        return np.asarray(ode.p1(s), dtype=float) * np.ones_like(s) / p2

    return W0 * math.exp(-quadrature.integrate(ratio, ode.b, z, tol=tol))


def _deriv(f, z, h):
    return (8 * (f(z + h) - f(z - h)) - (f(z + 2 * h) - f(z - 2 * h))) / (12 * h)


class SymmetricGreen:
    """Callable G(z, z') built from a :class:`SymmetricGreenSpec`.

    ``jump(zp)`` returns the first-derivative discontinuity at ``z = zp``,
    which equals the Wronskian f1 f2' - f1' f2 there.
    """

    def __init__(self, spec, h=1e-5):
        self.spec = spec
        self.h = h

    def __call__(self, z, zp):
        s = self.spec
        z = np.asarray(z, dtype=float)
        zp = np.asarray(zp, dtype=float)
        hi = np.maximum(z, zp)
        lo = np.minimum(z, zp)
        out = (
            s.A1 * s.f1(z) * s.f1(zp)
            + s.A2 * s.f2(z) * s.f2(zp)
            + (s.chi - 1.0) * s.f1(hi) * s.f2(lo)
            + s.chi * s.f2(hi) * s.f1(lo)
        )
        return out if out.ndim else float(out)

    def wronskian(self, z):
        s = self.spec
        d1 = s.df1(z) if s.df1 else _deriv(s.f1, z, self.h * max(1.0, abs(z)))
        d2 = s.df2(z) if s.df2 else _deriv(s.f2, z, self.h * max(1.0, abs(z)))
        return s.f1(z) * d2 - d1 * s.f2(z)

    def jump(self, zp):
        return self.wronskian(zp)

    def measure(self, ode, zp):
        """lambda(z') = p2(z') * Wr_z'(f1, f2) predicted from W0 and the operator."""
        return ode.p2(zp) * wronskian_profile(ode, self.spec.W0, zp)


def build_symmetric_green(spec):
    """G = A1 f1 f1' + A2 f2 f2' + (chi - 1) f1(z>) f2(z<) + chi f2(z>) f1(z<)."""
    if not isinstance(spec, SymmetricGreenSpec):
        raise DomainError("expected a SymmetricGreenSpec")
    if spec.W0 == 0:
        raise DomainError("Wronskian normalisation must be nonzero")
    return SymmetricGreen(spec)


# below this value of |Omega^2 - gamma^2| tau^2 the sine is replaced by its series
_SERIES_SWITCH = 1e-8


def _sinc_part(w2, tau):
    """sin(w tau)/w and cos(w tau) for w^2 of either sign (w2 = Omega^2 - gamma^2)."""
    a = w2 * tau * tau
    if abs(a) < _SERIES_SWITCH:
        s = tau * (1 - a / 6 + a * a / 120)
        c = 1 - a / 2 + a * a / 24
        return s, c
    w = math.sqrt(w2)
    return math.sin(w * tau) / w, math.cos(w * tau)


def sho_retarded_green(osc, tau):
    """Theta(tau) exp(-gamma tau) sin(w tau)/w with Theta(0) = 1."""
    if np.ndim(tau):
        return np.array([sho_retarded_green(osc, float(t)) for t in np.ravel(tau)]).reshape(np.shape(tau))
    if tau < 0:
        return 0.0
    s, _ = _sinc_part(osc.omega_sq, tau)
    return math.exp(-osc.gamma * tau) * s


def sho_retarded_green_dt(osc, tau):
    """Time derivative of the retarded Green's function for tau >= 0."""
    if np.ndim(tau):
        return np.array([sho_retarded_green_dt(osc, float(t)) for t in np.ravel(tau)]).reshape(np.shape(tau))
    if tau < 0:
        return 0.0
    s, c = _sinc_part(osc.omega_sq, tau)
    return math.exp(-osc.gamma * tau) * (c - osc.gamma * s)


def _as_vector_fn(f):
    def g(t):
        try:
            out = np.asarray(f(t), dtype=float)
            if out.shape == np.shape(t):
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(f(v)) for v in np.ravel(t)]).reshape(np.shape(t))

    return g


def sho_solve(osc, x0, v0, t0, force=None, t=None, tol=1e-11, breakpoints=None):
    """Solution of x'' + 2 gamma x' + Omega^2 x = F with x(t0) = x0, x'(t0) = v0."""
    if t is None:
        raise DomainError("observation time t is required")
    if t < t0:
        raise DomainError(f"t={t} precedes the initial time t0={t0}")
    dt = t - t0
    g = sho_retarded_green(osc, dt)
    gd = sho_retarded_green_dt(osc, dt)
    out = g * v0 + (2 * osc.gamma * g + gd) * x0
    if force is not None and dt > 0:
        F = _as_vector_fn(force)
        gam, w2 = osc.gamma, osc.omega_sq

        def integrand(tp):
            tau = t - tp
            if abs(w2) * dt * dt < _SERIES_SWITCH:
                a = w2 * tau * tau
                s = tau * (1 - a / 6 + a * a / 120)
            else:
                w = math.sqrt(w2)
                s = np.sin(w * tau) / w
            return F(tp) * np.exp(-gam * tau) * s

        out += quadrature.integrate(integrand, t0, t, tol=tol, breakpoints=breakpoints)
    return float(out)


def radial_green_helmholtz(ell, omega, r, rp):
    """i omega j_l(omega r<) h_l^(1)(omega r>)."""
    if not (omega > 0 and r > 0 and rp > 0):
        raise DomainError("omega, r and r' must be positive")
    lo, hi = min(r, rp), max(r, rp)
    j, _ = spherical_bessel_pair(ell, omega * lo, hankel=False)
    _, h = spherical_bessel_pair(ell, omega * hi)
    return 1j * omega * j * h
