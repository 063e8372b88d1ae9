"""Laplacian eigenbases, Fourier coefficients, plane-wave expansions."""
import itertools
from collections.abc import Sequence
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quadrature
from .errors import BoundaryError, ConvergenceError, DomainError
from .specialfn import (
    cyl_bessel_j,
    legendre_p_all,
    sph_harm,
    sph_harm_all,
    spherical_jn_all,
)

DOMAIN_KINDS = ("interval-dirichlet", "periodic-box", "circle", "two-sphere")


class GibbsWarning(RuntimeWarning):
    """Raised when a Fourier integrand has jumps that were not declared."""


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    lengths: tuple = (1.0,)

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "lengths", lengths)
        if not lengths or any(not v > 0 for v in lengths):
            raise DomainError("domain lengths must be strictly positive")
        if self.kind in ("circle", "two-sphere") and len(lengths) != 1:
            raise DomainError(f"{self.kind} takes a single radius")

    @property
    def dimension(self):
        if self.kind == "two-sphere":
            return 2
        if self.kind == "circle":
            return 1
        return len(self.lengths)


@dataclass(frozen=True)
class Mode:
    label: tuple
    eigenvalue: float

    def __post_init__(self):
        if self.eigenvalue < 0:
            raise DomainError("Laplacian eigenvalues are non-negative")


@dataclass(frozen=True)
class ModeBasis:
    """An ordered, orthonormal family of eigenfunctions of the negative Laplacian.

    ``evaluator(label, point)`` returns the mode at a point (or an array of
    points whose last axis holds the coordinates).  ``table(points)``
    evaluates every mode at once and returns an ``(npoints, nmodes)`` array.
    """

    domain: DomainSpec
    modes: tuple
    evaluator: Callable
    _table: Callable = field(repr=False, compare=False, default=None)
    nmax: int = None

    def __len__(self):
        return len(self.modes)

    @property
    def labels(self):
        return [md.label for md in self.modes]

    @property
    def eigenvalues(self):
        return np.array([md.eigenvalue for md in self.modes])

    def table(self, points, start=0, stop=None):
        pts = np.asarray(points, dtype=float)
        if self._table is not None:
            return self._table(pts, start, len(self.modes) if stop is None else stop)
        sel = self.modes[start:stop]
        return np.stack([np.asarray(self.evaluator(md.label, pts)) for md in sel], axis=-1)


class LazyModes(Sequence):
    """Mode list built and sorted on first access; length is known up front."""

    def __init__(self, count, build):
        self._count = count
        self._build = build
        self._items = None

    def __len__(self):
        return self._count

    def _get(self):
        if self._items is None:
            self._items = self._build()
        return self._items

    def __getitem__(self, i):
        return self._get()[i]

    def __iter__(self):
        return iter(self._get())


def _order(modes):
    # nondecreasing eigenvalue, ties broken by lexicographic label
    return tuple(sorted(modes, key=lambda md: (round(md.eigenvalue, 12), md.label)))


_LABEL_CACHE = {}


def _labels(modes):
    key = id(modes)
    hit = _LABEL_CACHE.get(key)
    if hit is None or hit[0] is not modes:
        hit = (modes, np.array([md.label for md in modes]))
        _LABEL_CACHE[key] = hit
    return hit[1]


def _as_points(x, dim):
    pts = np.asarray(x, dtype=float)
    if dim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    return pts


def box_modes(lengths, nmax):
    """Dirichlet sine modes on a box with edges ``lengths``; labels n^i in 1..nmax."""
    lengths = tuple(float(v) for v in np.atleast_1d(lengths))
    domain = DomainSpec("interval-dirichlet", lengths)
    if nmax < 1:
        raise DomainError("nmax must be at least 1")
    D = len(lengths)

    def build():
        return _order(
            Mode(lab, sum((math.pi * n / L) ** 2 for n, L in zip(lab, lengths)))
            for lab in itertools.product(range(1, nmax + 1), repeat=D)
        )

    modes = LazyModes(nmax**D, build)
    norms = [math.sqrt(2.0 / L) for L in lengths]

    def evaluator(label, x):
        pts = _as_points(x, D)
        out = np.ones(pts.shape[:-1])
        for i, (n, L) in enumerate(zip(label, lengths)):
            out = out * norms[i] * np.sin(math.pi * n * pts[..., i] / L)
        return out

    def table(x, start, stop):
        pts = _as_points(x, D)
        flat = pts.reshape(-1, D)
        lab = _labels(modes)[start:stop]
        out = np.ones((flat.shape[0], lab.shape[0]))
        for i, L in enumerate(lengths):
            out *= norms[i] * np.sin(np.pi * flat[:, i, None] * lab[None, :, i] / L)
        return out.reshape(pts.shape[:-1] + (lab.shape[0],))

    return ModeBasis(domain, modes, evaluator, table, nmax)


def periodic_modes(lengths, nmax, kind="periodic-box"):
    """Plane-wave modes prod_j exp(2 pi i n^j x^j / L^j)/sqrt(L^j), n^j in [-nmax, nmax]."""
    lengths = tuple(float(v) for v in np.atleast_1d(lengths))
    domain = DomainSpec(kind, (1.0,) if kind == "circle" else lengths)
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    D = len(lengths)
    modes = []
    for lab in itertools.product(range(-nmax, nmax + 1), repeat=D):
        lam = sum((2 * math.pi * n / L) ** 2 for n, L in zip(lab, lengths))
        modes.append(Mode(lab, lam))
    modes = _order(modes)
    scale = 1.0 / math.sqrt(math.prod(lengths))

    def evaluator(label, x):
        pts = _as_points(x, D)
        phase = sum(2 * math.pi * n * pts[..., i] / L for i, (n, L) in enumerate(zip(label, lengths)))
        return scale * np.exp(1j * phase)

    def table(x, start, stop):
        pts = _as_points(x, D)
        flat = pts.reshape(-1, D)
        lab = _labels(modes)[start:stop]
        phase = np.zeros((flat.shape[0], lab.shape[0]))
        for i, L in enumerate(lengths):
            phase += 2 * np.pi * flat[:, i, None] * lab[None, :, i] / L
        return (scale * np.exp(1j * phase)).reshape(pts.shape[:-1] + (lab.shape[0],))

    return ModeBasis(domain, modes, evaluator, table, nmax)


def circle_modes(mmax):
    """exp(i m phi)/sqrt(2 pi) on the unit circle, eigenvalue m^2."""
    return periodic_modes([2 * math.pi], mmax, kind="circle")


def sphere_modes(lmax):
    """Spherical harmonics Y_l^m, l <= lmax, eigenvalue l(l+1); points are (theta, phi)."""
    if lmax < 0:
        raise DomainError("lmax must be non-negative")
    modes = _order(
        Mode((ell, m), float(ell * (ell + 1))) for ell in range(lmax + 1) for m in range(-ell, ell + 1)
    )

    def evaluator(label, x):
        pts = np.asarray(x, dtype=float)
        return sph_harm(label, pts[..., 0], pts[..., 1])

    def table(x, start, stop):
        pts = np.asarray(x, dtype=float)
        ys = sph_harm_all(lmax, pts[..., 0], pts[..., 1])
        return np.stack([ys[md.label] for md in modes[start:stop]], axis=-1)

    return ModeBasis(DomainSpec("two-sphere", (1.0,)), modes, evaluator, table)


def _find_jumps(f, a, b, nsample=4097):
    xs = np.linspace(a, b, nsample)
    vals = np.asarray(f(xs), dtype=complex)
    d = np.abs(np.diff(vals))
    scale = np.max(np.abs(vals)) + 1e-300
    left = np.concatenate([[0.0], d[:-1]])
    right = np.concatenate([d[1:], [0.0]])
    suspects = np.nonzero((d > 1e-3 * scale) & (d > 20 * np.maximum(left, right)))[0]
    jumps = []
    for i in suspects:
        lo, hi = xs[i], xs[i + 1]
        flo = complex(np.asarray(f(np.array([lo])))[0])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = complex(np.asarray(f(np.array([mid])))[0])
            if abs(fm - flo) < 0.5 * d[i]:
                lo, flo = mid, fm
            else:
                hi = mid
        jumps.append(0.5 * (lo + hi))
    return jumps


@dataclass(frozen=True)
class FourierCoefficients:
    L: float
    coeffs: dict

    def __getitem__(self, n):
        return self.coeffs[n]

    def partial_sum(self, x, N=None):
        N = max(self.coeffs) if N is None else N
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for n in range(-N, N + 1):
            out += self.coeffs[n] * np.exp(2j * math.pi * n * x / self.L)
        return out


def fourier_coeffs(f, L, nmax, start=None, discontinuities=None, tol=1e-10):
    """C_n = (1/L) * integral over one period of f(x) exp(-2 pi i n x / L).

    The period runs over ``[start, start + L]`` with ``start = -L/2`` by
    default.  Declared ``discontinuities`` split the integral; undeclared
    jumps are located by sampling, with a :class:`GibbsWarning`.
    """
    if not L > 0:
        raise DomainError("period must be positive")
    a = -0.5 * L if start is None else float(start)
    b = a + L
    if discontinuities is None:
        jumps = _find_jumps(f, a, b)
        if jumps:
            warnings.warn(
                "integrand has undeclared jumps; partial sums converge like 1/n near them",
                GibbsWarning,
                stacklevel=2,
            )
    else:
        jumps = list(discontinuities)
    coeffs = {}
    for n in range(-nmax, nmax + 1):
        k = 2 * math.pi * n / L

        def integrand(x, k=k):
            return np.asarray(f(x), dtype=complex) * np.exp(-1j * k * x)

        try:
            val = quadrature.integrate(integrand, a, b, tol=tol, breakpoints=jumps)
        except ConvergenceError as exc:
            raise ConvergenceError(f"Fourier coefficient n={n} missed tolerance {tol}") from exc
        coeffs[n] = complex(val) / L
    return FourierCoefficients(float(L), coeffs)


def plane_wave_cylindrical(k, phi_k, r, phi, mmax):
    """Partial sum of exp(i k r cos(phi - phi_k)) over Bessel modes |m| <= mmax."""
    kr = k * r
    total = 0j
    for m in range(-mmax, mmax + 1):
        total += (1j**m) * cyl_bessel_j(m, kr) * np.exp(1j * m * (phi - phi_k))
    return complex(total)


def plane_wave_spherical(k, khat, x, lmax):
    """Partial sum of exp(i k.x) over spherical waves l <= lmax."""
    x = np.asarray(x, dtype=float)
    khat = np.asarray(khat, dtype=float)
    khat = khat / np.linalg.norm(khat)
    r = float(np.linalg.norm(x))
    if r == 0:
        return 1.0 + 0j
    mu = float(np.clip(np.dot(khat, x) / r, -1.0, 1.0))
    js = spherical_jn_all(lmax, k * r)
    ps = legendre_p_all(lmax, mu)
    ells = np.arange(lmax + 1)
    return complex(np.sum((2 * ells + 1) * (1j**ells) * js * ps))


def _fd_grad(psi, pts, h):
    # fourth-order central differences along each axis
    grads = []
    for i in range(pts.shape[-1]):
        e = np.zeros(pts.shape[-1])
        e[i] = h
        g = (8 * (psi(pts + e) - psi(pts - e)) - (psi(pts + 2 * e) - psi(pts - 2 * e))) / (12 * h)
        grads.append(g)
    return np.stack(grads, axis=-1)


def box_integrate(f, lengths, tol=1e-10, n=16, max_doublings=6):
    """Tensor Gauss-Legendre over [0, L1] x ... with doubling until settled."""
    prev = None
    for _ in range(max_doublings + 1):
        rules = [quadrature.gauss_legendre(n, 0.0, L) for L in lengths]
        grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        pts = np.stack(grids, axis=-1)
        w = rules[0].weights
        for r in rules[1:]:
            w = np.multiply.outer(w, r.weights)
        est = np.sum(w * f(pts))
        if prev is not None and abs(est - prev) <= tol * max(1.0, abs(est)):
            return est
        prev = est
        n *= 2
    raise ConvergenceError("box quadrature did not settle")


def rayleigh_quotient(psi, domain, grad=None, tol=1e-10, h=None):
    """Ratio of Dirichlet energy to squared norm, integral |grad psi|^2 / integral |psi|^2.

    ``psi`` takes an array of points (last axis = coordinates).  ``grad``
    may supply the gradient; otherwise fourth-order differences are used.
    Supports ``interval-dirichlet`` and ``periodic-box`` domains.
    """
    if domain.kind not in ("interval-dirichlet", "periodic-box"):
        raise DomainError(f"rayleigh_quotient does not handle {domain.kind}")
    lengths = domain.lengths
    D = len(lengths)
    if h is None:
        h = 1e-3 * min(lengths)

    def wrapped(p):
        return np.asarray(psi(p[..., 0] if D == 1 else p))

    if domain.kind == "interval-dirichlet":
        # sample every face
        face_scale = 0.0
        for i, L in enumerate(lengths):
            ref = quadrature.gauss_legendre(9, 0.0, 1.0).nodes
            grids = np.meshgrid(*[ref * Lj for Lj in lengths], indexing="ij")
            pts = np.stack(grids, axis=-1)
            for edge in (0.0, L):
                pts[..., i] = edge
                face_scale = max(face_scale, float(np.max(np.abs(wrapped(pts)))))
        interior = np.stack(
            np.meshgrid(*[np.linspace(0.1, 0.9, 9) * L for L in lengths], indexing="ij"), axis=-1
        )
        bulk = float(np.max(np.abs(wrapped(interior))))
        if face_scale > 1e-8 * max(bulk, 1e-300):
            raise BoundaryError("trial function does not vanish on the boundary")

    norm = box_integrate(lambda p: np.abs(wrapped(p)) ** 2, lengths, tol)
    if not norm > 0:
        raise BoundaryError("trial function has zero norm")
    if grad is not None:
        def energy(p):
            g = np.asarray(grad(p[..., 0] if D == 1 else p))
            if D == 1:
                return np.abs(g) ** 2
            return np.sum(np.abs(g) ** 2, axis=-1)
    else:
        def energy(p):
            return np.sum(np.abs(_fd_grad(wrapped, p, h)) ** 2, axis=-1)
    return float(np.real(box_integrate(energy, lengths, tol)) / norm)
