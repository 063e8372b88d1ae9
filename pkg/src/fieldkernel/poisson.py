"""Green's functions of the negative Laplacian and Poisson solvers."""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .errors import (
    ConvergenceError,
    DomainError,
    InconsistentSourceError,
    NoInverseError,
    SingularityError,
)
from .specialfn import gamma, legendre_p_all, sph_harm_all


@dataclass(frozen=True)
class SourceDensity:
    dimension: int
    density: Callable
    support_radius: float

    def __post_init__(self):
        if not self.support_radius > 0:
            raise DomainError("support radius must be positive")


@dataclass(frozen=True)
class MultipoleSet:
    """Coefficients {(l, m): complex}; ``support_radius`` bounds the exterior region."""

    coefficients: dict
    lmax: int
    support_radius: Optional[float] = field(default=None)

    def __getitem__(self, key):
        return self.coefficients.get(key, 0j)

    def exterior_field(self, r, theta, phi):
        """sum rho_l^m Y_l^m / ((2l + 1) r^(l+1)) for r beyond the support."""
        if self.support_radius is not None and np.any(np.asarray(r) <= self.support_radius):
            raise DomainError("exterior expansion evaluated inside the source region")
        ys = sph_harm_all(self.lmax, theta, phi)
        out = 0j
        for (ell, m), c in self.coefficients.items():
            out = out + c * ys[(ell, m)] / ((2 * ell + 1) * np.asarray(r, dtype=float) ** (ell + 1))
        return out

    def synthesize(self, theta, phi):
        """sum c_l^m Y_l^m(theta, phi) on the unit sphere."""
        ys = sph_harm_all(self.lmax, theta, phi)
        out = 0j
        for key, c in self.coefficients.items():
            out = out + c * ys[key]
        return out


def _sep(x, xp):
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape[-1] != xp.shape[-1]:
        raise DomainError("points have different dimensions")
    return np.sqrt(np.sum((x - xp) ** 2, axis=-1))


def coulomb_green(D, x, xp):
    """Gamma(D/2 - 1) / (4 pi^(D/2) |x - x'|^(D - 2)) for D >= 3."""
    if D < 3:
        raise DomainError("coulomb_green needs D >= 3; use log_green_2d_series for D = 2")
    r = _sep(x, xp)
    if np.any(r == 0):
        raise SingularityError("coincident source and observer")
    out = gamma(D / 2 - 1) / (4 * math.pi ** (D / 2) * r ** (D - 2))
    return out if np.ndim(out) else float(out)


def coulomb_green_gradient(D, x, xp):
    """Gradient of coulomb_green with respect to x."""
    x = np.asarray(x, dtype=float)
    d = x - np.asarray(xp, dtype=float)
    r = np.sqrt(np.sum(d**2, axis=-1))[..., None]
    return -(D - 2) * gamma(D / 2 - 1) / (4 * math.pi ** (D / 2)) * d / r**D


def log_green_2d_series(r, phi, rp, phip, lmax):
    """ln r> - sum_{l=1}^{lmax} (1/l) (r</r>)^l cos(l (phi - phi')); additive constant zero."""
    lo, hi = min(r, rp), max(r, rp)
    if lo == hi and math.cos(phi - phip) == 1.0:
        raise SingularityError("coincident points")
    if hi == 0:
        raise SingularityError("both points at the origin")
    q = lo / hi
    ells = np.arange(1, lmax + 1)
    return float(math.log(hi) - np.sum(q**ells * np.cos(ells * (phi - phip)) / ells))


def image_green_halfspace(D, x, xp):
    """Dirichlet Green's function of the half-space x^D >= 0 by a single image."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if np.any(x[..., -1] < 0) or np.any(xp[..., -1] < 0):
        raise DomainError("points must satisfy x^D >= 0")
    img = xp.copy()
    img[..., -1] = -img[..., -1]
    return coulomb_green(D, x, xp) - coulomb_green(D, x, img)


def box_green_modesum(basis, x, xp, tol=1e-8, run=20):
    """sum psi(x) conj(psi(x')) / lambda over the basis.

    Summation stops once ``run`` consecutive increments are each below
    ``tol / run``; exhausting the basis first raises ConvergenceError.
    """
    lam = basis.eigenvalues
    if np.any(lam == 0):
        raise NoInverseError("basis has a zero mode; the Laplacian has no inverse there")
    chunk = 4096
    total = 0.0
    quiet = 0
    thresh = tol / run
    for start in range(0, len(basis), chunk):
        stop = min(start + chunk, len(basis))
        a = basis.table(x, start, stop)
        b = np.conj(basis.table(xp, start, stop))
        inc = a * b / lam[start:stop]
        for k, v in enumerate(inc):
            total += v
            if abs(v) < thresh:
                quiet += 1
                if quiet >= run:
                    return float(np.real(total)) if np.isrealobj(inc) else total
            else:
                quiet = 0
    raise ConvergenceError("mode sum did not settle within the basis")


def _box_structure(basis):
    if basis.domain.kind != "interval-dirichlet":
        raise DomainError("dirichlet_solve needs a Dirichlet box basis")
    return basis.domain.lengths, basis.nmax


def _sine_matrix(n, pts, L):
    k = np.arange(1, n + 1)
    return math.sqrt(2.0 / L) * np.sin(np.pi * np.outer(k, pts) / L)


def dirichlet_solve(basis, source, boundary_data, x, source_nmax=128, face_nmax=256, drop=1e-14):
    """Kirchhoff representation on a Dirichlet box.

    psi(x) = integral G J  -  surface integral of (outward normal derivative of G) psi.
    ``boundary_data(points)`` supplies psi on the boundary (points on faces,
    last axis = coordinates).  The surface series uses every sine index up to
    the basis' ``nmax``; face projections below ``drop`` times the largest
    one are skipped.
    """
    lengths, nmax = _box_structure(basis)
    D = len(lengths)
    x = np.asarray(x, dtype=float).reshape(-1, D) if D > 1 else np.asarray(x, dtype=float).reshape(-1, 1)
    out = np.zeros(x.shape[0])

    if boundary_data is not None:
        if D == 1:
            L = lengths[0]
            alpha = float(boundary_data(np.array([0.0])))
            beta = float(boundary_data(np.array([L])))
            n = np.arange(1, nmax + 1)
            sgn = np.where(n % 2 == 0, 1.0, -1.0)
            coef = (2.0 / (n * math.pi)) * (alpha - sgn * beta)
            for i, xi in enumerate(x[:, 0]):
                out[i] += np.dot(coef, np.sin(n * math.pi * xi / L))
        else:
            nn = min(nmax, face_nmax)
            for axis in range(D):
                out += _face_terms(lengths, nmax, nn, axis, boundary_data, x, drop)

    if source is not None:
        ns = min(nmax, source_nmax)
        rules = [quadrature.gauss_legendre(max(2 * ns, 64), 0.0, L) for L in lengths]
        grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        pts = np.stack(grids, axis=-1)
        J = np.asarray(source.density(pts if D > 1 else pts[..., 0]), dtype=float)
        coeff = J
        for ax, (r, L) in enumerate(zip(rules, lengths)):
            S = _sine_matrix(ns, r.nodes, L) * r.weights[None, :]
            coeff = np.moveaxis(np.tensordot(S, coeff, axes=(1, ax)), 0, ax)
        k = np.arange(1, ns + 1)
        lam = np.zeros((ns,) * D)
        for ax, L in enumerate(lengths):
            shape = [1] * D
            shape[ax] = ns
            lam = lam + ((math.pi * k / L) ** 2).reshape(shape)
        weights = coeff / lam
        for i, xi in enumerate(x):
            val = weights
            for ax, L in enumerate(lengths):
                val = np.tensordot(_sine_matrix(ns, np.array([xi[ax]]), L)[:, 0], val, axes=(0, 0))
            out[i] += float(val)
    return out if out.size > 1 else float(out[0])


def _face_terms(lengths, nmax, nn, axis, boundary_data, x, drop, block=64):
    """Contribution of the two faces normal to ``axis``.

    Boundary data are projected onto the first ``nn`` sine modes of each
    face; the sum along the normal runs to ``nmax``.
    """
    nq = max(64, 4 * nn)
    D = len(lengths)
    others = [j for j in range(D) if j != axis]
    rules = [quadrature.gauss_legendre(nq, 0.0, lengths[j]) for j in others]
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    face = np.zeros(grids[0].shape + (D,))
    for slot, j in enumerate(others):
        face[..., j] = grids[slot]
    projections = []
    for edge in (0.0, lengths[axis]):
        face[..., axis] = edge
        vals = np.asarray(boundary_data(face), dtype=float)
        coeff = vals
        for slot, (r, j) in enumerate(zip(rules, others)):
            S = _sine_matrix(nn, r.nodes, lengths[j]) * r.weights[None, :]
            coeff = np.moveaxis(np.tensordot(S, coeff, axes=(1, slot)), 0, slot)
        projections.append(coeff)
    B0, BL = projections
    scale = max(np.max(np.abs(B0)), np.max(np.abs(BL)), 1e-300)
    keep = np.argwhere((np.abs(B0) > drop * scale) | (np.abs(BL) > drop * scale))
    La = lengths[axis]
    n = np.arange(1, nmax + 1)
    kn = math.pi * n / La
    sgn = np.where(n % 2 == 0, 1.0, -1.0)
    out = np.zeros(x.shape[0])
    for idx in keep:
        idx = tuple(idx)
        lam_perp = sum((math.pi * (i + 1) / lengths[j]) ** 2 for i, j in zip(idx, others))
        # d/dx'_axis of the mode at the two faces, divided by lambda
        w = math.sqrt(2.0 / La) * kn / (kn**2 + lam_perp) * (B0[idx] - sgn * BL[idx])
        perp = np.ones(x.shape[0])
        for i, j in zip(idx, others):
            perp *= math.sqrt(2.0 / lengths[j]) * np.sin(math.pi * (i + 1) * x[:, j] / lengths[j])
        for lo in range(0, x.shape[0], block):
            along = math.sqrt(2.0 / La) * np.sin(np.outer(x[lo:lo + block, axis], kn))
            out[lo:lo + block] += perp[lo:lo + block] * (along @ w)
    return out


def multipole_static(source, lmax, tol=1e-10, radial_breakpoints=None, nr=32, max_doublings=6):
    """rho_l^m = integral dOmega dr r^(l+2) conj(Y_l^m) J over the ball of the support radius."""
    if source.dimension != 3:
        raise DomainError("multipole_static works in three dimensions")
    R = source.support_radius
    nth, nph = 2 * (lmax + 1), 4 * (lmax + 1)
    ct = quadrature.gauss_legendre(nth)
    ph = quadrature.trapezoid_periodic(nph)
    theta = np.arccos(ct.nodes)
    T, P = np.meshgrid(theta, ph.nodes, indexing="ij")
    Wang = np.outer(ct.weights, ph.weights)
    ys = sph_harm_all(lmax, T, P)
    unit = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    cuts = [0.0] + sorted(c for c in (radial_breakpoints or ()) if 0 < c < R) + [R]
    prev = None
    for _ in range(max_doublings + 1):
        rs, wr = [], []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            rule = quadrature.gauss_legendre(nr, lo, hi)
            rs.append(rule.nodes)
            wr.append(rule.weights)
        rs = np.concatenate(rs)
        wr = np.concatenate(wr)
        pts = rs[:, None, None, None] * unit[None]
        J = np.asarray(source.density(pts), dtype=float)
        coeffs = {}
        for (ell, m), y in ys.items():
            radial = np.tensordot(wr * rs ** (ell + 2), J, axes=(0, 0))
            coeffs[(ell, m)] = complex(np.sum(Wang * np.conj(y) * radial))
        vec = np.array(list(coeffs.values()))
        if prev is not None and np.max(np.abs(vec - prev)) <= tol * max(1.0, np.max(np.abs(vec))):
            return MultipoleSet(coeffs, lmax, R)
        prev = vec
        nr *= 2
    raise ConvergenceError("radial multipole quadrature did not settle")


def legendre_green_expansion(r, rp, mu, lmax):
    """(4 pi r>)^-1 sum P_l(mu) (r</r>)^l."""
    if abs(mu) > 1:
        raise DomainError("mu must lie in [-1, 1]")
    lo, hi = min(r, rp), max(r, rp)
    if lo == hi and mu == 1:
        raise SingularityError("coincident points")
    q = lo / hi
    p = legendre_p_all(lmax, mu)
    return float(np.sum(p * q ** np.arange(lmax + 1)) / (4 * math.pi * hi))


def sphere_poisson_solve(B, tol=1e-12):
    """Solve -Laplacian_S2 psi = J given J's harmonic coefficients B."""
    b00 = B.coefficients.get((0, 0), 0.0)
    scale = max([abs(v) for v in B.coefficients.values()] + [1.0])
    if abs(b00) > tol * scale:
        raise InconsistentSourceError("source has a monopole component; no solution on the closed sphere")
    A = {}
    for (ell, m), v in B.coefficients.items():
        if ell == 0:
            continue
        A[(ell, m)] = v / (ell * (ell + 1))
    return MultipoleSet(A, B.lmax)
