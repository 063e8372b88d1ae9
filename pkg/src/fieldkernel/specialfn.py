"""Special functions: Gamma, Bessel, Legendre, spherical harmonics.

All routines are written from series and recurrences; no external
special-function library is used at run time.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureRule  # noqa: F401  (re-exported)

# Lanczos coefficients for g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class SphericalHarmonicIndex:
    ell: int
    m: int

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a non-negative integer, got {self.ell}")
        if int(self.m) != self.m or abs(self.m) > self.ell:
            raise DomainError(f"need |m| <= ell, got ell={self.ell}, m={self.m}")


def _gamma_scalar(x):
    if not x > 0:
        raise DomainError(f"gamma needs x > 0, got {x}")
    shift = 1.0
    # Lanczos is tuned for x >= 1/2; step up with Gamma(x) = Gamma(x+1)/x
    while x < 0.5:
        shift *= x
        x += 1.0
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS[i] / (x + i)
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * a / shift


def gamma(x):
    """Gamma function for positive real arguments (scalar or array)."""
    if np.ndim(x) == 0:
        return _gamma_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_gamma_scalar(v) for v in arr.ravel()]).reshape(arr.shape)


def double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _bessel_series(m, x):
    term = (0.5 * x) ** m / math.factorial(m)
    total = term
    q = -0.25 * x * x
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + m))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def _bessel_miller(m, x):
    # backward recurrence from well above max(m, x), normalised by
    # J_0 + 2 sum J_{2k} = 1
    start = max(m, int(x)) + 20 + int(math.sqrt(40.0 * max(m, x, 1.0)))
    start += start % 2
    jp1, j = 0.0, 1e-300
    target = 0.0
    norm = 0.0
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1, j = j, jm1
        if abs(j) > 1e250:
            jp1 *= 1e-250
            j *= 1e-250
            target *= 1e-250
            norm *= 1e-250
        if k - 1 == m:
            target = j
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j
    norm += j
    if m == 0:
        target = j
    return target / norm


def _bessel_scalar(m, x):
    sign = 1.0
    if m < 0:
        m = -m
        if m % 2:
            sign = -sign
    if x < 0:
        x = -x
        if m % 2:
            sign = -sign
    if x == 0:
        return sign * (1.0 if m == 0 else 0.0)
    if x <= 2.0:
        return sign * _bessel_series(m, x)
    return sign * _bessel_miller(m, x)


def cyl_bessel_j(m, x):
    """Bessel function J_m(x) for integer order and real argument."""
    if int(m) != m:
        raise DomainError("integer order required")
    m = int(m)
    if np.ndim(x) == 0:
        return _bessel_scalar(m, float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_bessel_scalar(m, v) for v in arr.ravel()]).reshape(arr.shape)


def _sph_j_series(ell, x):
    term = x**ell / double_factorial(2 * ell + 1)
    total = term
    q = -0.5 * x * x
    k = 0
    while True:
        k += 1
        term *= q / (k * (2 * ell + 2 * k + 1))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def spherical_jn_all(lmax, x):
    """j_0..j_lmax at a single x >= 0 as an array."""
    out = np.zeros(lmax + 1)
    if x == 0:
        out[0] = 1.0
        return out
    if x < 1.0:
        for ell in range(lmax + 1):
            out[ell] = _sph_j_series(ell, x)
            if out[ell] == 0.0:
                break
        return out
    start = lmax + int(x) + 20 + int(math.sqrt(40.0 * max(lmax, x)))
    jp1, j = 0.0, 1e-300
    raw = np.zeros(start + 1)
    raw[start] = j
    for k in range(start, 0, -1):
        jm1 = ((2 * k + 1) / x) * j - jp1
        jp1, j = j, jm1
        raw[k - 1] = j
        if abs(j) > 1e250:
            raw[k - 1:] *= 1e-250
            jp1 *= 1e-250
            j *= 1e-250
    j0 = math.sin(x) / x
    j1 = math.sin(x) / x**2 - math.cos(x) / x
    if abs(j0) >= abs(j1):
        scale = j0 / raw[0]
    else:
        scale = j1 / raw[1]
    out[:] = raw[: lmax + 1] * scale
    return out


def spherical_yn_all(lmax, x):
    if x <= 0:
        raise DomainError("y_ell needs x > 0")
    out = np.zeros(lmax + 1)
    out[0] = -math.cos(x) / x
    if lmax >= 1:
        out[1] = -math.cos(x) / x**2 - math.sin(x) / x
    for ell in range(1, lmax):
        out[ell + 1] = ((2 * ell + 1) / x) * out[ell] - out[ell - 1]
    return out


def spherical_bessel_pair(ell, x, hankel=True):
    """Return ``(j_ell(x), h_ell^(1)(x))``.

    With ``hankel=False`` only ``j_ell`` is computed (``x = 0`` allowed) and
    the second entry is ``None``.
    """
    if int(ell) != ell or ell < 0:
        raise DomainError("ell must be a non-negative integer")
    ell = int(ell)
    if x < 0 or (hankel and x <= 0):
        raise DomainError(f"spherical Hankel function needs x > 0, got {x}")
    j = spherical_jn_all(ell, float(x))[ell]
    if not hankel:
        return j, None
    y = spherical_yn_all(ell, float(x))[ell]
    return j, complex(j, y)


def spherical_bessel_pair_deriv(ell, x):
    """Derivatives ``(j_ell'(x), h_ell^(1)'(x))`` from the order recurrence."""
    js = spherical_jn_all(ell + 1, float(x))
    ys = spherical_yn_all(ell + 1, float(x))
    # f_l' = l f_l / x - f_{l+1}
    dj = ell * js[ell] / x - js[ell + 1]
    dy = ell * ys[ell] / x - ys[ell + 1]
    return dj, complex(dj, dy)


def legendre_p(ell, x):
    """Legendre polynomial P_ell(x) by the three-term recurrence."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise DomainError("legendre_p needs |x| <= 1")
    p0 = np.ones_like(xa)
    if ell == 0:
        return p0 if xa.ndim else float(p0)
    p1 = xa.copy()
    for n in range(1, ell):
        p0, p1 = p1, ((2 * n + 1) * xa * p1 - n * p0) / (n + 1)
    return p1 if xa.ndim else float(p1)


def legendre_p_all(lmax, x):
    """Rows P_0..P_lmax evaluated at the array ``x``."""
    xa = np.asarray(x, dtype=float)
    out = np.empty((lmax + 1,) + xa.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = xa
    for n in range(1, lmax):
        out[n + 1] = ((2 * n + 1) * xa * out[n] - n * out[n - 1]) / (n + 1)
    return out


def _normalized_alp(lmax, m, ct, st):
    """sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(cos theta) for l = m..lmax, m >= 0.

    The Condon-Shortley sign is included in the seed.
    """
    seed = math.sqrt((2 * m + 1) / (4 * math.pi))
    for k in range(1, m + 1):
        seed *= math.sqrt((2 * k - 1) / (2 * k))
    rows = {m: (-1) ** m * seed * st**m}
    if lmax == m:
        return rows
    rows[m + 1] = math.sqrt(2 * m + 3) * ct * rows[m]
    for ell in range(m + 2, lmax + 1):
        a = math.sqrt((4 * ell * ell - 1) / (ell * ell - m * m))
        b = math.sqrt(((ell - 1) ** 2 - m * m) / (4 * (ell - 1) ** 2 - 1))
        rows[ell] = a * (ct * rows[ell - 1] - b * rows[ell - 2])
    return rows


def sph_harm(idx, theta, phi):
    """Spherical harmonic Y_ell^m(theta, phi) with the Condon-Shortley phase."""
    if not isinstance(idx, SphericalHarmonicIndex):
        idx = SphericalHarmonicIndex(*idx)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    m = abs(idx.m)
    rows = _normalized_alp(idx.ell, m, np.cos(theta), np.sin(theta))
    val = rows[idx.ell] * np.exp(1j * m * phi)
    if idx.m < 0:
        val = (-1) ** m * np.conj(val)
    return val if val.ndim else complex(val)


def sph_harm_all(lmax, theta, phi):
    """Dictionary {(ell, m): Y_ell^m} for all ell <= lmax on array arguments."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    out = {}
    for m in range(lmax + 1):
        rows = _normalized_alp(lmax, m, ct, st)
        e = np.exp(1j * m * phi)
        for ell in range(m, lmax + 1):
            y = rows[ell] * e
            out[(ell, m)] = y
            if m:
                out[(ell, -m)] = (-1) ** m * np.conj(y)
    return out


def solid_angle(D):
    """Area of the unit (D-1)-sphere in D dimensions."""
    if int(D) != D or D < 1:
        raise DomainError("solid_angle needs an integer D >= 1")
    return 2 * math.pi ** (D / 2) / gamma(D / 2)
