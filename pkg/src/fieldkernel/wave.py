"""Flat-spacetime wave equation: causal kernels, convolution, initial-value evolution, radiation."""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .errors import DomainError, UnsupportedOrderError
from .odegreen import radial_green_helmholtz
from .poisson import MultipoleSet
from .specialfn import double_factorial, sph_harm_all, spherical_jn_all

ORIENTATIONS = ("retarded", "advanced")


@dataclass(frozen=True)
class SpacetimeEvent:
    t: float
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))


def synge(x, xp):
    """Half the squared interval, 0.5 [(t - t')^2 - |x - x'|^2]."""
    if len(x.x) != len(xp.x):
        raise DomainError("events have different spatial dimension")
    dx = np.subtract(x.x, xp.x)
    return 0.5 * ((x.t - xp.t) ** 2 - float(np.dot(dx, dx)))


def classify(x, xp, tol=1e-12):
    s = synge(x, xp)
    if abs(s) <= tol:
        return "null"
    return "timelike" if s > 0 else "spacelike"


@dataclass(frozen=True)
class CausalKernel:
    """Minkowski Green's function of the wave operator in ``spacetime_dimension`` dimensions.

    The kernel is Theta(+-dt) (2 pi)^-n d^n/dsigma^n acting on Theta(sigma)/2
    (even dimension, d = 2 + 2n) or Theta(sigma)/(2 pi sqrt(2 sigma)) (odd,
    d = 3 + 2n).  ``tail`` holds the part living strictly inside the cone.
    ``lightcone_order`` is k for a delta^(k)(sigma) term on the cone, or None.
    ``lightcone_coefficient`` multiplies it when it is a plain distribution;
    for odd d >= 5 the cone terms are singular and left symbolic (None).
    """

    spacetime_dimension: int
    orientation: str
    n: int
    tail: Callable = None
    lightcone_order: int = None
    lightcone_coefficient: float = None

    @property
    def even(self):
        return self.spacetime_dimension % 2 == 0

    def symbolic(self):
        sign = "+" if self.orientation == "retarded" else "-"
        seed = "Theta(sigma)/2" if self.even else "Theta(sigma)/(2 pi sqrt(2 sigma))"
        ops = "" if self.n == 0 else f"((2 pi)^-1 d/dsigma)^{self.n} "
        return f"Theta({sign}dt) {ops}[{seed}]"

    def __call__(self, dt, r):
        """Pointwise (non-distributional) part, including Theta(0) = 1 on the cone."""
        dt = np.asarray(dt, dtype=float)
        r = np.asarray(r, dtype=float)
        sigma = 0.5 * (dt * dt - r * r)
        causal = dt >= 0 if self.orientation == "retarded" else dt <= 0
        inside = causal & (sigma >= 0)
        out = np.zeros(np.broadcast(dt, r).shape)
        if self.tail is not None and np.any(inside):
            s = np.broadcast_to(sigma, out.shape)[inside]
            with np.errstate(divide="ignore"):
                out[inside] = self.tail(s)
        return out if out.ndim else float(out)

    def lightcone_weight(self, r):
        """Coefficient w(r) with G = w delta(|dt| - r), for the 4D kernel."""
        if self.spacetime_dimension != 4:
            raise UnsupportedOrderError("plain light-cone weight exists only for d = 4")
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("r must be positive")
        return 1.0 / (4 * math.pi * r)


def causal_green(d, orientation="retarded"):
    if d < 2:
        raise DomainError("spacetime dimension must be at least 2")
    if orientation not in ORIENTATIONS:
        raise DomainError(f"orientation must be one of {ORIENTATIONS}")
    if d % 2 == 0:
        n = (d - 2) // 2
        if n == 0:
            return CausalKernel(d, orientation, 0, tail=lambda s: np.full(np.shape(s), 0.5))
        coeff = 0.5 / (2 * math.pi) ** n
        return CausalKernel(d, orientation, n, None, n - 1, coeff)
    n = (d - 3) // 2
    c = 1.0
    for k in range(n):
        c *= -0.5 - k
    pref = c / ((2 * math.pi) ** n * 2 * math.pi * math.sqrt(2.0))

    def tail(s, p=pref, n=n):
        return p * np.asarray(s, dtype=float) ** (-0.5 - n)

    return CausalKernel(d, orientation, n, tail, n - 1 if n else None, None)


def raise_dimension(kernel):
    """-(2 pi R)^-1 d/dR maps the d kernel to the d + 2 kernel; d/dR = -R d/dsigma."""
    return causal_green(kernel.spacetime_dimension + 2, kernel.orientation)


def recursion_tail(kernel, dt, r, h=1e-5):
    """-(2 pi r)^-1 dG/dr of the tail by central differences (checks ``raise_dimension``)."""
    gp = kernel(dt, r + h)
    gm = kernel(dt, r - h)
    return -(gp - gm) / (2 * h) / (2 * math.pi * r)


def reduce_dimension(kernel, dt, rho, tol=1e-12):
    """Integrate the d + 1 kernel along a transverse line: int dw G(dt, sqrt(rho^2 + w^2))."""
    d1 = kernel.spacetime_dimension
    causal = dt >= 0 if kernel.orientation == "retarded" else dt <= 0
    wmax2 = dt * dt - rho * rho
    if not causal or wmax2 < 0:
        return 0.0
    wmax = math.sqrt(wmax2)
    if d1 == 4:
        # two roots w = +-wmax, each weighted by R/|w| times 1/(4 pi R)
        if wmax == 0:
            raise DomainError("observer on the light cone of the line")
        return 1.0 / (2 * math.pi * wmax)
    if kernel.lightcone_order is not None:
        raise UnsupportedOrderError(f"d={d1} kernel carries light-cone derivatives")
    if d1 == 3:
        # w = wmax sin(a): 2 sigma = wmax^2 cos^2(a), the inverse square root cancels
        def f(a):
            c = np.cos(a)
            out = np.zeros_like(a)
            ok = c > 0
            out[ok] = kernel.tail(0.5 * (wmax * c[ok]) ** 2) * wmax * c[ok]
            return out

        return quadrature.integrate(f, -math.pi / 2, math.pi / 2, tol=tol)
    # d + 1 = 2: constant tail over |w| <= wmax
    return float(kernel.tail(np.array([0.0]))[0]) * 2 * wmax


def _unit_grid(n_theta, n_phi):
    rule = quadrature.product_sphere(n_theta, n_phi)
    th, ph = rule.nodes[:, 0], rule.nodes[:, 1]
    unit = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    return unit, rule.weights


def convolve_retarded_4d(source, t, x, support_radius, center=(0.0, 0.0, 0.0), tol=1e-8,
                         n_theta=32, n_phi=64, breakpoints=None):
    """int d^3x' J(t - |x - x'|, x') / (4 pi |x - x'|) for J supported in a ball.

    ``source(t, pts)`` takes an array of times and an array of points (last
    axis 3).  Observers outside the ball are handled in source-centred
    spherical coordinates, observers inside in observer-centred ones so the
    1/|x - x'| factor is absorbed by the volume element.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    R = float(support_radius)
    unit, w = _unit_grid(n_theta, n_phi)
    dist = float(np.linalg.norm(x - c))
    if dist > R:
        def f(rr):
            pts = c + rr[:, None, None] * unit[None]
            sep = np.linalg.norm(x - pts, axis=-1)
            vals = np.asarray(source(t - sep, pts)) / (4 * math.pi * sep)
            return rr**2 * (vals @ w)

        return quadrature.integrate(f, 0.0, R, tol=tol, breakpoints=breakpoints)

    def g(ss):
        pts = x + ss[:, None, None] * unit[None]
        vals = np.asarray(source(t - ss[:, None] * np.ones(len(w)), pts))
        return ss / (4 * math.pi) * (vals @ w)

    return quadrature.integrate(g, 0.0, dist + R, tol=tol, breakpoints=breakpoints)


def _grad_fd(f, pts, h):
    out = []
    for i in range(pts.shape[-1]):
        e = np.zeros(pts.shape[-1])
        e[i] = h
        out.append((8 * (f(pts + e) - f(pts - e)) - (f(pts + 2 * e) - f(pts - 2 * e))) / (12 * h))
    return np.stack(out, axis=-1)


def kirchhoff_evolve_4d(psi0, dpsi0, t0, t, x, grad_psi0=None, n_theta=64, n_phi=128, h=1e-3):
    """Field at (t, x) from Cauchy data at t0, via the retarded 4D kernel.

    The initial surface meets the past cone of (t, x) in the sphere of
    radius R = t - t0; with M the spherical mean there,
    psi = M[psi0] + R M[n . grad psi0] + R M[dpsi0].
    Callables take point arrays with the coordinates on the last axis.
    """
    if not t > t0:
        raise DomainError("need t > t0")
    R = t - t0
    unit, w = _unit_grid(n_theta, n_phi)
    w = w / (4 * math.pi)
    pts = np.asarray(x, dtype=float) + R * unit
    p0 = np.asarray(psi0(pts))
    p1 = np.asarray(dpsi0(pts))
    grad = np.asarray(grad_psi0(pts)) if grad_psi0 is not None else _grad_fd(psi0, pts, h)
    radial = np.sum(grad * unit, axis=-1)
    val = w @ p0 + R * (w @ radial) + R * (w @ p1)
    return val.item() if np.ndim(val) == 0 else val


def homogeneous_fourier_evolve(psi0_hat, dpsi0_hat, k, t):
    """psi0 cos(|k| t) + dpsi0 sin(|k| t)/|k|, with sin(|k| t)/|k| -> t as k -> 0."""
    k = np.asarray(k, dtype=float)
    kk = np.linalg.norm(k, axis=-1) if k.ndim else abs(float(k))
    a = psi0_hat(k) if callable(psi0_hat) else psi0_hat
    b = dpsi0_hat(k) if callable(dpsi0_hat) else dpsi0_hat
    kt = np.asarray(kk * t, dtype=float)
    small = np.abs(kt) < 1e-4
    safe = np.where(small, 1.0, kk)
    sinc = np.where(small, t * (1 - kt**2 / 6 + kt**4 / 120), np.sin(kt) / safe)
    out = a * np.cos(kt) + b * sinc
    return out if np.ndim(out) else complex(out)


class PeriodicWaveField:
    """Free massless field on a periodic cube of side L, stored as Fourier modes.

    Each ``step`` applies the exact mode-by-mode rotation, so the energy
    int (psi_t^2 + |grad psi|^2) is conserved up to rounding.
    """

    def __init__(self, psi, dpsi, L):
        psi = np.asarray(psi, dtype=float)
        self.L = float(L)
        self.shape = psi.shape
        self.dim = psi.ndim
        n = psi.shape[0]
        freqs = 2 * np.pi * np.fft.fftfreq(n, d=self.L / n)
        ks = np.meshgrid(*([freqs] * self.dim), indexing="ij")
        self.k = np.stack(ks, axis=-1)
        self.kk = np.linalg.norm(self.k, axis=-1)
        self.a = np.fft.fftn(psi)
        self.b = np.fft.fftn(np.asarray(dpsi, dtype=float))
        self.t = 0.0

    def step(self, dt):
        a = homogeneous_fourier_evolve(self.a, self.b, self.k, dt)
        kk = self.kk
        # time derivative of the evolved mode
        b = self.b * np.cos(kk * dt) - self.a * kk * np.sin(kk * dt)
        self.a, self.b = a, b
        self.t += dt

    def fields(self):
        psi = np.real(np.fft.ifftn(self.a))
        dpsi = np.real(np.fft.ifftn(self.b))
        grads = [np.real(np.fft.ifftn(1j * self.k[..., i] * self.a)) for i in range(self.dim)]
        return psi, dpsi, grads

    def energy(self):
        _, dpsi, grads = self.fields()
        dens = dpsi**2 + sum(g**2 for g in grads)
        return float(np.sum(dens) * (self.L / self.shape[0]) ** self.dim)


def freq_green_4d(omega, r):
    """exp(i omega r) / (4 pi r)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    out = np.exp(1j * omega * r) / (4 * np.pi * r)
    return out if out.ndim else complex(out)


def freq_green_modesum(omega, x, xp, lmax):
    """Partial-wave sum i omega j_l(omega r<) h_l(omega r>) Y_l^m(x) conj(Y_l^m(x')) up to lmax."""
    def sph(v):
        v = np.asarray(v, dtype=float)
        r = float(np.linalg.norm(v))
        return r, math.acos(max(-1.0, min(1.0, v[2] / r))), math.atan2(v[1], v[0])

    r, th, ph = sph(x)
    rp, thp, php = sph(xp)
    ya = sph_harm_all(lmax, th, ph)
    yb = sph_harm_all(lmax, thp, php)
    total = 0j
    for ell in range(lmax + 1):
        ang = sum(complex(ya[(ell, m)]) * np.conj(complex(yb[(ell, m)])) for m in range(-ell, ell + 1))
        total += radial_green_helmholtz(ell, omega, r, rp) * ang
    return total


@dataclass(frozen=True)
class FrequencyProfile:
    """One Fourier component J~(omega, x) of a source; ``profile`` takes point arrays."""

    omega: float
    profile: Callable

    def conjugate(self):
        """Partner at -omega for a real source."""
        f = self.profile
        return FrequencyProfile(-self.omega, lambda p: np.conj(f(p)))


def _spherical(x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0:
        raise DomainError("observer at the origin")
    return r, math.acos(max(-1.0, min(1.0, x[2] / r))), math.atan2(x[1], x[0])


def _realify(val):
    val = complex(val)
    if abs(val.imag) <= 1e-12 * (1 + abs(val)):
        return val.real
    return val


def multipole_radiation(moments, lmax, t, x, source_radius=None):
    """Far-zone field (1/r) sum Y_l^m/(2l+1)!! d^l rho_l^m(t - r)/dt^l.

    ``moments`` maps (l, m) to a callable ``rho(t, k)`` returning the k-th
    time derivative of the moment int r'^l conj(Y_l^m) J.
    """
    r, th, ph = _spherical(x)
    if source_radius is not None and r <= source_radius:
        raise DomainError("observer inside the source region")
    ys = sph_harm_all(lmax, th, ph)
    total = 0j
    for (ell, m), rho in moments.items():
        if ell > lmax:
            continue
        total += complex(ys[(ell, m)]) * rho(t - r, ell) / double_factorial(2 * ell + 1)
    return _realify(total / r)


def dipole_radiation_field(I_ddot, t, x):
    """E^i -> -(4 pi |x|)^-1 d^2 I^i(t - |x|)/dt^2."""
    r = float(np.linalg.norm(x))
    if r == 0:
        raise DomainError("observer at the origin")
    return -np.asarray(I_ddot(t - r), dtype=float) / (4 * math.pi * r)


def quadrupole_waveform(I_ddot, t, x, G_N=1.0):
    """hbar^{ij} -> -(2 G_N / |x|) d^2 I^{ij}(t - |x|)/dt^2."""
    r = float(np.linalg.norm(x))
    if r == 0:
        raise DomainError("observer at the origin")
    return -2 * G_N * np.asarray(I_ddot(t - r), dtype=float) / r


def frequency_multipoles(profile, lmax, support_radius, tol=1e-10, n_theta=None, n_phi=None, nr=32,
                         max_doublings=6):
    """Omega_l^m(omega) = (2l+1)(-i)^l int d^3x' j_l(omega r') conj(Y_l^m) J~(omega, x')."""
    from .errors import ConvergenceError

    n_theta = n_theta or max(32, 2 * (lmax + 1))
    n_phi = n_phi or 2 * n_theta
    rule = quadrature.product_sphere(n_theta, n_phi)
    th, ph = rule.nodes[:, 0], rule.nodes[:, 1]
    unit = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    ys = sph_harm_all(lmax, th, ph)
    om = profile.omega
    prev = None
    for _ in range(max_doublings + 1):
        rr = quadrature.gauss_legendre(nr, 0.0, support_radius)
        J = np.asarray(profile.profile(rr.nodes[:, None, None] * unit[None]))
        jl = np.stack([spherical_jn_all(lmax, abs(om) * v) for v in rr.nodes], axis=-1)
        coeffs = {}
        for (ell, m), y in ys.items():
            ang = J @ (rule.weights * np.conj(y))
            rad = np.sum(rr.weights * rr.nodes**2 * jl[ell] * ang)
            coeffs[(ell, m)] = complex((2 * ell + 1) * (-1j) ** ell * rad)
        vec = np.array(list(coeffs.values()))
        if prev is not None and np.max(np.abs(vec - prev)) <= tol * max(1.0, np.max(np.abs(vec))):
            return MultipoleSet(coeffs, lmax, support_radius)
        prev = vec
        nr *= 2
    raise ConvergenceError("frequency multipole quadrature did not settle")


def far_field_frequency(moments, omega, x):
    """exp(i omega r)/r sum Y_l^m Omega_l^m/(2l+1)."""
    r, th, ph = _spherical(x)
    if moments.support_radius is not None and r <= moments.support_radius:
        raise DomainError("observer inside the source region")
    ys = sph_harm_all(moments.lmax, th, ph)
    total = sum(complex(ys[key]) * c / (2 * key[0] + 1) for key, c in moments.coefficients.items())
    return complex(np.exp(1j * omega * r) / r * total)
