"""Numerical Riemannian geometry from a metric given as a callable.

Every derivative of the metric is a central difference, refined once by
Richardson extrapolation.  Indices follow the ordering of the supplied
coordinates, which also fixes the Levi-Civita orientation
(epsilon_{12...D} = +1).
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .errors import ConvergenceError, DegenerateError, DomainError, SingularityError


@dataclass(frozen=True)
class Metric:
    dimension: int
    components: Callable

    def __call__(self, x):
        g = np.asarray(self.components(np.asarray(x, dtype=float)), dtype=float)
        if g.shape != (self.dimension, self.dimension):
            raise DomainError(f"metric returned shape {g.shape}")
        return g

    def check(self, x, tol=1e-12):
        """Symmetric and positive definite at ``x``."""
        g = self(x)
        if np.max(np.abs(g - g.T)) > tol * max(1.0, np.max(np.abs(g))):
            raise DomainError("metric is not symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (g + g.T))) <= 0:
            raise DomainError("metric is not positive definite")
        return True


def euclidean(D):
    eye = np.eye(D)
    return Metric(D, lambda x: eye)


def spherical_flat():
    """Flat 3-space in (r, theta, phi)."""
    return Metric(3, lambda x: np.diag([1.0, x[0] ** 2, (x[0] * math.sin(x[1])) ** 2]))


def polar_flat():
    return Metric(2, lambda x: np.diag([1.0, x[0] ** 2]))


def round_sphere(R=1.0):
    """R^2 (dtheta^2 + sin^2 theta dphi^2)."""
    return Metric(2, lambda x: R * R * np.diag([1.0, math.sin(x[0]) ** 2]))


def _richardson(f, x, h, refine=True):
    """Central-difference gradient of ``f`` (any array shape), last axis = direction."""
    x = np.asarray(x, dtype=float)

    eye = np.eye(x.size)

    def cd(step):
        cols = [(np.asarray(f(x + step * e)) - np.asarray(f(x - step * e))) / (2 * step) for e in eye]
        return np.stack(cols, axis=-1)

    if not refine:
        return cd(h)
    return (4 * cd(h / 2) - cd(h)) / 3


def _inverse(g):
    try:
        inv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise SingularityError("metric is not invertible") from None
    if not np.all(np.isfinite(inv)):
        raise SingularityError("metric is not invertible")
    return inv


def metric_derivative(metric, x, h=1e-4, refine=True):
    """dg[k, i, j] = d_k g_ij."""
    return np.moveaxis(_richardson(metric, x, h, refine), -1, 0)


def christoffel(metric, x, h=1e-4, refine=True):
    """Gamma[i, j, k] = Gamma^i_{jk}; ``refine=False`` skips the Richardson step."""
    g = metric(x)
    ginv = _inverse(g)
    dg = metric_derivative(metric, x, h, refine)
    # lower[l, j, k] = 0.5 (d_j g_kl + d_k g_jl - d_l g_jk)
    lower = 0.5 * (np.transpose(dg, (2, 0, 1)) + np.transpose(dg, (2, 1, 0)) - dg)
    return np.tensordot(ginv, lower, axes=(1, 0))


def christoffel_lowered(metric, x, h=1e-4):
    return np.einsum("il,ljk->ijk", metric(x), christoffel(metric, x, h))


def covariant_derivative_metric(metric, x, h=1e-4):
    """nabla_k g_ij; vanishes for the Levi-Civita connection."""
    g = metric(x)
    G = christoffel(metric, x, h)
    dg = metric_derivative(metric, x, h)
    return dg - np.einsum("lki,lj->kij", G, g) - np.einsum("lkj,il->kij", G, g)


@dataclass(frozen=True)
class Curvature:
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float

    def riemann_lowered(self, g):
        return np.einsum("ia,ajkl->ijkl", g, self.riemann)


def curvature(metric, x, h=1e-4, h_outer=1e-3):
    """Riemann R^i_{jkl}, Ricci R_{jl} = R^i_{jil}, and the Ricci scalar.

    ``h`` is the step for metric derivatives; ``h_outer`` differentiates the
    Christoffel symbols.
    """
    G = christoffel(metric, x, h)
    dG = np.moveaxis(_richardson(lambda y: christoffel(metric, y, h), x, h_outer), -1, 0)
    # dG[k, i, l, j] = d_k Gamma^i_{lj}
    R = (
        np.einsum("kilj->ijkl", dG)
        - np.einsum("likj->ijkl", dG)
        + np.einsum("isk,slj->ijkl", G, G)
        - np.einsum("isl,skj->ijkl", G, G)
    )
    ricci = np.einsum("ijil->jl", R)
    scalar = float(np.einsum("jl,jl->", _inverse(metric(x)), ricci))
    return Curvature(R, ricci, scalar)


def _sqrt_det(metric, y):
    return math.sqrt(abs(np.linalg.det(metric(y))))


def divergence(metric, V, x, h=1e-4):
    """|g|^{-1/2} d_i (|g|^{1/2} V^i)."""
    dens = lambda y: _sqrt_det(metric, y) * np.asarray(V(y), dtype=float)
    jac = _richardson(dens, x, h)
    return float(np.trace(jac)) / _sqrt_det(metric, x)


def divergence_christoffel(metric, V, x, h=1e-4):
    """d_i V^i + Gamma^i_{ik} V^k."""
    jac = _richardson(lambda y: np.asarray(V(y), dtype=float), x, h)
    G = christoffel(metric, x, h)
    return float(np.trace(jac) + np.einsum("iik,k->", G, np.asarray(V(np.asarray(x, float)), float)))


def curved_laplacian(metric, f, x, h=1e-3):
    """|g|^{-1/2} d_i (|g|^{1/2} g^{ij} d_j f), nested central differences."""
    def flux(y):
        grad = _richardson(lambda z: float(f(z)), y, h)
        return _sqrt_det(metric, y) * (_inverse(metric(y)) @ grad)

    jac = _richardson(flux, x, h)
    return float(np.trace(jac)) / _sqrt_det(metric, x)


def lie_derivative_metric(metric, xi, x, h=1e-4):
    """xi^c d_c g_ij + g_ia d_j xi^a + g_ja d_i xi^a."""
    x = np.asarray(x, dtype=float)
    g = metric(x)
    dg = metric_derivative(metric, x, h)
    v = np.asarray(xi(x), dtype=float)
    dxi = _richardson(lambda y: np.asarray(xi(y), dtype=float), x, h)  # dxi[a, j] = d_j xi^a
    return np.einsum("c,cij->ij", v, dg) + g @ dxi + (g @ dxi).T


@dataclass
class Trajectory:
    lam: np.ndarray
    x: np.ndarray
    v: np.ndarray
    complete: bool
    message: str = ""

    def norms(self, metric):
        return np.array([v @ metric(x) @ v for x, v in zip(self.x, self.v)])


def geodesic(metric, x0, v0, lambda_span=(0.0, 1.0), step=1e-3, h=1e-5, christoffel_fn=None, every=1):
    """RK4 integration of x'' + Gamma^i_jk x'^j x'^k = 0.

    The connection uses plain central differences of step ``h``: the norm
    g(v, v) drifts only in proportion to the metric-derivative error.

    Integration stops early, returning what it has with ``complete=False``,
    if the metric becomes singular or non-finite along the way.
    """
    gam = christoffel_fn or (lambda y: christoffel(metric, y, h, refine=False))
    D = len(x0)
    lam0, lam1 = lambda_span
    n = max(1, int(round((lam1 - lam0) / step)))
    dl = (lam1 - lam0) / n

    def rhs(state):
        y, v = state[:D], state[D:]
        G = gam(y)
        if not np.all(np.isfinite(G)):
            raise SingularityError("non-finite connection")
        return np.concatenate([v, -(G @ v) @ v])

    s = np.concatenate([np.asarray(x0, float), np.asarray(v0, float)])
    lams, xs, vs = [lam0], [s[:D].copy()], [s[D:].copy()]
    for i in range(n):
        try:
            k1 = rhs(s)
            k2 = rhs(s + 0.5 * dl * k1)
            k3 = rhs(s + 0.5 * dl * k2)
            k4 = rhs(s + dl * k3)
        except (DomainError, ArithmeticError, ValueError) as exc:
            return Trajectory(np.array(lams), np.array(xs), np.array(vs), False, str(exc))
        s = s + dl / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (i + 1) % every == 0 or i == n - 1:
            lams.append(lam0 + (i + 1) * dl)
            xs.append(s[:D].copy())
            vs.append(s[D:].copy())
    return Trajectory(np.array(lams), np.array(xs), np.array(vs), True)


@dataclass(frozen=True)
class EmbeddedSurface:
    """x(xi) into an ambient space with ``metric``; ``jacobian(xi)[i, I] = dx^i/dxi^I`` if known."""

    intrinsic_dimension: int
    embedding: Callable
    metric: Metric
    jacobian: Optional[Callable] = field(default=None)

    def tangents(self, xi, h=1e-6):
        xi = np.asarray(xi, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(xi), dtype=float)
        return _richardson(lambda z: np.asarray(self.embedding(z), dtype=float), xi, h)


def graph_surface(f, grad=None, polar=False):
    """Graph z = f(x, y) in flat 3-space.

    With ``polar=True`` the parameters are (rho, phi) with x = rho cos phi and
    y = rho sin phi, which suits disk-shaped domains.
    """
    def cart(xi):
        if polar:
            return xi[0] * math.cos(xi[1]), xi[0] * math.sin(xi[1])
        return xi[0], xi[1]

    def emb(xi):
        x, y = cart(xi)
        return np.array([x, y, f(x, y)])

    jac = None
    if grad is not None:
        def jac(xi):
            x, y = cart(xi)
            fx, fy = grad(x, y)
            if polar:
                c, s, r = math.cos(xi[1]), math.sin(xi[1]), xi[0]
                return np.array([[c, -r * s], [s, r * c], [fx * c + fy * s, r * (-fx * s + fy * c)]])
            return np.array([[1.0, 0.0], [0.0, 1.0], [fx, fy]])

    return EmbeddedSurface(2, emb, euclidean(3), jac)


def induced_metric(surface, xi, h=1e-6, rank_tol=1e-12):
    """H_IJ = g_ij dx^i/dxi^I dx^j/dxi^J."""
    xi = np.asarray(xi, dtype=float)
    J = surface.tangents(xi, h)
    g = surface.metric(surface.embedding(xi))
    H = J.T @ g @ J
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= rank_tol * max(1.0, sv[0]):
        raise DegenerateError("embedding Jacobian is rank deficient")
    return H


def induced_metric_and_area(surface, region, rule="gauss", tol=1e-10, n=16, max_doublings=6, h=1e-6):
    """Induced metric (as a callable of xi) and the area of a coordinate box.

    ``region`` is a list of (lo, hi) pairs.  ``rule`` is ``"gauss"``
    (Gauss-Legendre, node count doubled) or ``"tanh-sinh"`` (level raised),
    the latter for integrands with endpoint singularities; a list gives one
    rule per parameter.
    """
    if len(region) != surface.intrinsic_dimension:
        raise DomainError("region does not match the intrinsic dimension")
    H = lambda xi: induced_metric(surface, xi, h)
    # full rank is demanded on an interior probe grid; the quadrature itself may
    # touch coordinate singularities on the region's edge, where sqrt(det H) -> 0
    probes = [quadrature.gauss_legendre(3, lo, hi).nodes for lo, hi in region]
    for pt in itertools.product(*probes):
        H(np.array(pt))

    def density(pt):
        J = surface.tangents(pt, h)
        g = surface.metric(surface.embedding(pt))
        return math.sqrt(abs(np.linalg.det(J.T @ g @ J)))

    def area_with(level):
        rules = []
        kinds = [rule] * len(region) if isinstance(rule, str) else list(rule)
        for (lo, hi), kind in zip(region, kinds):
            if kind == "gauss":
                rules.append(quadrature.gauss_legendre(n * 2**level, lo, hi))
            elif kind == "tanh-sinh":
                rules.append(quadrature.tanh_sinh(level + 2, lo, hi))
            else:
                raise DomainError(f"unknown rule {kind!r}")
        grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        pts = np.stack([gg.ravel() for gg in grids], axis=-1)
        wts = np.ones(1)
        for r in rules:
            wts = np.multiply.outer(wts, r.weights).ravel()
        return float(sum(w * density(pt) for w, pt in zip(wts, pts)))

    prev = area_with(0)
    for level in range(1, max_doublings + 1):
        cur = area_with(level)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return H, cur
        prev = cur
    raise ConvergenceError("area quadrature did not settle")


def directed_surface_element(surface, xi, h=1e-6):
    """dSigma_i = sqrt|g| eps_{i a1 ... a_{D-1}} dx^{a1}/dxi^1 ... for a hypersurface."""
    J = surface.tangents(xi, h)
    D = J.shape[0]
    if J.shape[1] != D - 1:
        raise DomainError("directed element needs a hypersurface")
    root = _sqrt_det(surface.metric, surface.embedding(np.asarray(xi, dtype=float)))
    out = np.empty(D)
    for i in range(D):
        e = np.zeros((D, 1))
        e[i] = 1.0
        out[i] = root * np.linalg.det(np.hstack([e, J]))
    return out


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        while seq[i] != i:
            j = seq[i]
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


def levi_civita_symbol(D):
    eps = np.zeros((D,) * D)
    for p in itertools.permutations(range(D)):
        eps[p] = _perm_sign(p)
    return eps


@dataclass(frozen=True)
class AntisymmetricTensor:
    """Components on strictly increasing index tuples; ``variance`` is "lower" or "upper"."""

    rank: int
    dimension: int
    components: dict
    variance: str = "lower"

    def __post_init__(self):
        if self.variance not in ("lower", "upper"):
            raise DomainError("variance must be 'lower' or 'upper'")
        if not 0 <= self.rank <= self.dimension:
            raise DomainError("rank must lie between 0 and the dimension")
        for key in self.components:
            if len(key) != self.rank or any(a >= b for a, b in zip(key, key[1:])):
                raise DomainError(f"index tuple {key} is not strictly increasing")

    def __getitem__(self, idx):
        idx = tuple(idx)
        if len(set(idx)) < len(idx):
            return 0.0
        order = sorted(range(len(idx)), key=lambda k: idx[k])
        return _perm_sign(order) * self.components.get(tuple(sorted(idx)), 0.0)

    def to_dense(self):
        out = np.zeros((self.dimension,) * self.rank)
        for key, val in self.components.items():
            for p in itertools.permutations(range(self.rank)):
                out[tuple(key[k] for k in p)] = _perm_sign(p) * val
        return out

    @classmethod
    def from_dense(cls, arr, variance="lower", tol=1e-12, dimension=None):
        arr = np.asarray(arr, dtype=float)
        N = arr.ndim
        D = arr.shape[0] if N else (dimension or 0)
        for p in itertools.permutations(range(N)):
            if np.max(np.abs(np.transpose(arr, p) - _perm_sign(p) * arr), initial=0.0) > tol * max(1.0, np.max(np.abs(arr), initial=0.0)):
                raise DomainError("array is not fully antisymmetric")
        comps = {key: float(arr[key]) for key in itertools.combinations(range(D), N) if arr[key] != 0}
        return cls(N, D, comps, variance)


def _move_indices(arr, mat):
    for axis in range(arr.ndim):
        arr = np.moveaxis(np.tensordot(mat, arr, axes=(1, axis)), 0, axis)
    return arr


def hodge_dual(tensor, metric, x):
    """T~^{j...} = (1/N!) eps~^{j... i...} T_{i...}, eps~^{...} = sgn(g) eps/sqrt|g|.

    Upper-index input is lowered first; the result carries upper indices.
    """
    D, N = tensor.dimension, tensor.rank
    if N > D:
        raise DomainError("rank exceeds dimension")
    if metric.dimension != D:
        raise DomainError("metric dimension mismatch")
    g = metric(x)
    det = np.linalg.det(g)
    if det == 0:
        raise SingularityError("metric is not invertible")
    T = tensor.to_dense()
    if tensor.variance == "upper":
        T = _move_indices(T, g)
    eps_up = np.sign(det) * levi_civita_symbol(D) / math.sqrt(abs(det))
    dual = np.tensordot(eps_up, T, axes=(list(range(D - N, D)), list(range(N)))) / math.factorial(N)
    return AntisymmetricTensor.from_dense(dual, "upper", tol=1e-9, dimension=D)


def hodge_sign(N, D, det_sign=1):
    """Double-dual factor: dual(dual(T)) = sign * T with indices restored."""
    return det_sign * (-1) ** (N * (D - N))


def lower_indices(tensor, metric, x):
    if tensor.variance == "lower":
        return tensor
    dense = _move_indices(tensor.to_dense(), metric(x))
    return AntisymmetricTensor.from_dense(dense, "lower", tol=1e-9, dimension=tensor.dimension)
