"""Heat kernels, diffusion evolution, and the proper-time route to the Coulomb kernel."""
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import quadrature
from .errors import ConvergenceError, DivergenceError, DomainError, SingularityError
from .spectra import ModeBasis, box_integrate


@dataclass(frozen=True)
class HeatKernelSpec:
    """``domain`` is the string ``"flat"`` or a :class:`ModeBasis`."""

    dimension: int
    sigma: float = 1.0
    domain: Any = "flat"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("diffusion constant must be positive")
        if not (self.domain == "flat" or isinstance(self.domain, ModeBasis)):
            raise DomainError("domain must be 'flat' or a ModeBasis")


def heat_kernel_flat(spec, x, xp, tau):
    """(4 pi sigma tau)^(-D/2) exp(-|x - x'|^2 / (4 sigma tau))."""
    if not np.all(np.asarray(tau) > 0):
        raise DomainError("tau must be positive")
    D = spec.dimension
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if D == 1:
        r2 = (x - xp) ** 2
        if r2.ndim and x.shape[-1:] == (1,) and xp.shape[-1:] == (1,):
            r2 = r2[..., 0]
    else:
        r2 = np.sum((x - xp) ** 2, axis=-1)
    s = 4 * spec.sigma * np.asarray(tau, dtype=float)
    out = (math.pi * s) ** (-D / 2) * np.exp(-r2 / s)
    return out if np.ndim(out) else float(out)


def heat_kernel_modesum(basis, x, xp, s, tol=1e-12, sigma=1.0):
    """sum exp(-sigma s lambda) psi(x) conj(psi(x')).

    Modes are taken in eigenvalue order and the sum stops once
    exp(-sigma s lambda) drops below ``tol`` times the leading weight.
    """
    if not s > 0:
        raise DomainError("s must be positive")
    lam = basis.eigenvalues
    w = np.exp(-sigma * s * (lam - lam[0]))
    n = int(np.searchsorted(-w, -tol, side="right"))
    if n >= len(lam) and w[-1] >= tol:
        raise ConvergenceError("basis too small for the requested tolerance")
    a = basis.table(x, 0, n)
    b = np.conj(basis.table(xp, 0, n))
    val = math.exp(-sigma * s * lam[0]) * np.sum(w[:n] * a * b, axis=-1)
    if np.isrealobj(a) or np.all(np.abs(np.imag(val)) < 1e-14 * (1 + np.abs(val))):
        val = np.real(val)
    return val if np.ndim(val) else val.item()


def project(basis, f, tol=1e-10):
    """Coefficients <psi_lambda, f> over the basis' domain by quadrature."""
    kind = basis.domain.kind
    if kind == "two-sphere":
        def integrand(theta, phi):
            pts = np.stack([theta, phi], axis=-1)
            return np.conj(basis.table(pts)) * np.asarray(f(theta, phi))[..., None]

        return quadrature.sphere_integrate(integrand, tol=tol)
    lengths = basis.domain.lengths if kind != "circle" else (2 * math.pi,)
    D = len(lengths)

    def integrand(p):
        vals = np.asarray(f(p[..., 0] if D == 1 else p))
        return np.conj(basis.table(p)) * vals[..., None]

    return _box_vector_integrate(integrand, lengths, tol)


def _box_vector_integrate(f, lengths, tol, n=32, max_doublings=6):
    prev = None
    for _ in range(max_doublings + 1):
        rules = [quadrature.gauss_legendre(n, 0.0, L) for L in lengths]
        grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        pts = np.stack(grids, axis=-1)
        w = rules[0].weights
        for r in rules[1:]:
            w = np.multiply.outer(w, r.weights)
        est = np.tensordot(w, f(pts), axes=(tuple(range(len(lengths))), tuple(range(len(lengths)))))
        if prev is not None and np.max(np.abs(est - prev)) <= tol * max(1.0, np.max(np.abs(est))):
            return est
        prev = est
        n *= 2
    raise ConvergenceError("projection quadrature did not settle")


def heat_evolve(spec, initial, t0, t, x, tol=1e-10, coefficients=None):
    """Evolve initial data psi(t0, .) to time t and evaluate at x.

    Flat space: Gauss-Hermite quadrature of the kernel convolution, with
    the node count doubled until two estimates agree.  Mode basis: project
    the data and damp each coefficient by exp(-sigma lambda (t - t0)).
    Sphere points are (theta, phi) pairs; ``initial`` then takes (theta, phi).
    """
    if t < t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    dt = t - t0
    if spec.domain == "flat":
        x = np.asarray(x, dtype=float)
        if dt == 0:
            return initial(x)
        return _flat_evolve(spec, initial, dt, x, tol)
    basis = spec.domain
    if coefficients is None:
        coefficients = project(basis, initial, tol)
    decay = np.exp(-spec.sigma * basis.eigenvalues * dt)
    pts = np.asarray(x, dtype=float)
    vals = basis.table(pts) @ (coefficients * decay)
    if basis.domain.kind in ("interval-dirichlet", "two-sphere") and np.allclose(np.imag(vals), 0, atol=1e-13):
        vals = np.real(vals)
    return vals if np.ndim(vals) else vals.item()


def _flat_evolve(spec, initial, dt, x, tol, n=16, max_n=512):
    D = spec.dimension
    width = math.sqrt(4 * spec.sigma * dt)
    prev = None
    while n <= max_n:
        u, w = np.polynomial.hermite.hermgauss(n)
        grids = np.meshgrid(*([u] * D), indexing="ij")
        offs = np.stack(grids, axis=-1).reshape(-1, D)
        ww = np.ones(1)
        for _ in range(D):
            ww = np.multiply.outer(ww, w).ravel()
        ww = ww / math.pi ** (D / 2)
        if D == 1:
            pts = x[..., None] + width * offs[:, 0]
            est = np.sum(np.asarray(initial(pts)) * ww, axis=-1)
        else:
            pts = x[..., None, :] + width * offs
            est = np.sum(np.asarray(initial(pts)) * ww, axis=-1)
        if prev is not None and np.max(np.abs(est - prev)) <= tol * max(1.0, np.max(np.abs(est))):
            return est if np.ndim(est) else float(est)
        prev = est
        n *= 2
    raise ConvergenceError("Gauss-Hermite evolution did not settle")


def green_from_heat_kernel(D, x, xp, t_cut=None, sigma=1.0, tol=1e-12):
    """Proper-time integral of the flat heat kernel over t in (0, infinity).

    The integral is split at ``t_cut`` (default r^2 / (4 sigma)); the tail is
    mapped by u = 1/t = v^2 onto a finite interval.  Equals the Coulomb kernel
    divided by sigma.
    """
    if D <= 2:
        raise DivergenceError("proper-time integral diverges for D <= 2")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    r2 = float(np.sum((x - xp) ** 2))
    if r2 == 0:
        raise SingularityError("coincident points")
    if t_cut is None:
        t_cut = r2 / (4 * sigma)

    def k(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        s = 4 * math.pi * sigma * t[pos]
        out[pos] = s ** (-D / 2) * np.exp(-r2 / (4 * sigma * t[pos]))
        return out

    def tail(v):
        # t = 1/u with u = v^2, so dt = 2 dv / v^3 and the u^(-1/2) endpoint factor disappears
        v = np.asarray(v, dtype=float)
        return 2 * (4 * math.pi * sigma) ** (-D / 2) * v ** (D - 3) * np.exp(-r2 * v * v / (4 * sigma))

    head = quadrature.integrate(k, 0.0, t_cut, tol=tol)
    rest = quadrature.integrate(tail, 0.0, math.sqrt(1.0 / t_cut), tol=tol)
    return float(head + rest)


def l2_norm_squared(spec, coefficients, t0, t):
    """Squared L2 norm of mode-evolved data at time t (Parseval)."""
    lam = spec.domain.eigenvalues
    return float(np.sum(np.abs(coefficients) ** 2 * np.exp(-2 * spec.sigma * lam * (t - t0))))


__all__ = [
    "HeatKernelSpec",
    "heat_kernel_flat",
    "heat_kernel_modesum",
    "heat_evolve",
    "green_from_heat_kernel",
    "project",
    "l2_norm_squared",
    "box_integrate",
]
