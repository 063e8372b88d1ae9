"""Acceptance checks, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines go straight to the
terminal even when output capture is on.
"""
import math
import subprocess
from functools import lru_cache
import sys

import numpy as np
import pytest
from scipy import integrate, special

from fieldkernel import asympt, geometry, heat, odegreen, poisson, quadrature, spectra, wave
from fieldkernel.specialfn import legendre_p, solid_angle, sph_harm_all


@pytest.fixture
def report(capsys):
    def emit(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name} {'ok' if passed else 'MISS'}" for name, passed in checks)
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok

    return emit


def test_criterion_01_coulomb(report):
    g = poisson.coulomb_green(3, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    checks = [("G(1) = 1/4pi", abs(g - 1 / (4 * math.pi)) <= 2 * np.finfo(float).eps / (4 * math.pi))]
    src = np.array([0.1, -0.2, 0.15])
    for R in (0.5, 2.0, 7.0):
        def outward(theta, phi):
            n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], -1)
            grad = poisson.coulomb_green_gradient(3, R * n, src)
            return -np.sum(grad * n, -1) * R * R

        flux = quadrature.sphere_integrate(outward, tol=1e-12)
        checks.append((f"flux R={R} err={abs(flux - 1):.1e}", abs(flux - 1) < 1e-8))
    assert report(1, "Coulomb law and Gauss flux", checks)


def test_criterion_02_proper_time_bridge(report):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        x, xp = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
        r = np.linalg.norm(x - xp)
        worst = max(worst, abs(heat.green_from_heat_kernel(3, x, xp) * 4 * math.pi * r - 1))
    assert report(2, "proper-time integral of the heat kernel", [(f"20 separations, max rel err {worst:.1e}", worst < 1e-6)])


def test_criterion_03_dirichlet(report):
    L, alpha, beta = 1.0, 1.0, 3.0
    basis = spectra.box_modes([L], 100000)
    xs = np.linspace(0.1, 0.9, 9) * L
    data = lambda p: np.where(np.asarray(p)[..., 0] < L / 2, alpha, beta)
    line = poisson.dirichlet_solve(basis, None, data, xs)
    err_line = np.max(np.abs(line - (alpha + (beta - alpha) * xs / L)))
    pts = [0.2, 0.5, 0.8]
    err_g = max(
        abs(poisson.box_green_modesum(basis, a * L, b * L, tol=1e-8) - min(a, b) * L * (L - max(a, b) * L) / L)
        for a in pts for b in pts if a != b
    )
    assert report(3, "Dirichlet boundary-value problem", [
        (f"straight line err {err_line:.1e}", err_line < 1e-4),
        (f"mode-sum Green err {err_g:.1e}", err_g < 1e-6),
    ])


def test_criterion_04_spectra(report):
    lmax = 8
    rule = quadrature.product_sphere(32, 64)
    ys = sph_harm_all(lmax, rule.nodes[:, 0], rule.nodes[:, 1])
    Y = np.stack(list(ys.values()), -1)
    gram_err = np.max(np.abs(Y.conj().T @ (rule.weights[:, None] * Y) - np.eye(Y.shape[1])))

    rng = np.random.default_rng(4)
    add_err = 0.0
    for _ in range(100):
        t1, t2 = np.arccos(rng.uniform(-1, 1, 2))
        p1, p2 = rng.uniform(0, 2 * math.pi, 2)
        a, b = sph_harm_all(lmax, t1, p1), sph_harm_all(lmax, t2, p2)
        mu = math.sin(t1) * math.sin(t2) * math.cos(p1 - p2) + math.cos(t1) * math.cos(t2)
        for ell in range(lmax + 1):
            s = sum(complex(a[(ell, m)]) * np.conj(complex(b[(ell, m)])) for m in range(-ell, ell + 1))
            add_err = max(add_err, abs(s - (2 * ell + 1) / (4 * math.pi) * legendre_p(ell, max(-1.0, min(1.0, mu)))))

    cyl_err = sph_err = 0.0
    for kr in np.linspace(0.0, 5.0, 11):
        for ang in np.linspace(0.0, 2 * math.pi, 7):
            v = spectra.plane_wave_cylindrical(1.0, 0.3, kr, ang, 40)
            cyl_err = max(cyl_err, abs(v - np.exp(1j * kr * math.cos(ang - 0.3))))
            khat = np.array([math.sin(0.3), 0.0, math.cos(0.3)])
            x = kr * np.array([math.sin(ang / 2) * math.cos(ang), math.sin(ang / 2) * math.sin(ang), math.cos(ang / 2)])
            v = spectra.plane_wave_spherical(1.0, khat, x, 40)
            sph_err = max(sph_err, abs(v - np.exp(1j * khat @ x)))
    assert report(4, "spherical harmonics and plane-wave expansions", [
        (f"Gram err {gram_err:.1e}", gram_err < 1e-10),
        (f"addition err {add_err:.1e}", add_err < 1e-10),
        (f"cylindrical err {cyl_err:.1e}", cyl_err < 1e-10),
        (f"spherical err {sph_err:.1e}", sph_err < 1e-10),
    ])


def test_criterion_05_heat(report):
    checks = []
    for D in (1, 2, 3):
        spec = heat.HeatKernelSpec(D, sigma=0.8)
        radial = lambda r: r ** (D - 1) * heat.heat_kernel_flat(spec, np.array([r] + [0.0] * (D - 1)), np.zeros(D), 0.6)
        norm = solid_angle(D) * integrate.quad(radial, 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
        checks.append((f"norm D={D} err {abs(norm - 1):.1e}", abs(norm - 1) < 1e-8))

    spec = heat.HeatKernelSpec(1)
    semi = 0.0
    for x, z, t1, t2 in [(0.0, 0.5, 0.3, 0.7), (-1.0, 1.2, 1.5, 0.2), (0.4, 0.4, 0.05, 2.0)]:
        lhs = integrate.quad(lambda y: heat.heat_kernel_flat(spec, x, y, t1) * heat.heat_kernel_flat(spec, y, z, t2),
                             -np.inf, np.inf, epsabs=1e-13)[0]
        semi = max(semi, abs(lhs - heat.heat_kernel_flat(spec, x, z, t1 + t2)))
    checks.append((f"semigroup err {semi:.1e}", semi < 1e-6))

    basis = spectra.sphere_modes(6)
    sigma, dt = 0.7, 0.3
    sphere = heat.HeatKernelSpec(2, sigma=sigma, domain=basis)
    decay = 0.0
    for ell, m in [(1, 0), (3, 2), (6, -5)]:
        f = lambda th, ph, ell=ell, m=m: sph_harm_all(6, th, ph)[(ell, m)]
        pt = np.array([[0.9, 2.1]])
        ratio = complex(np.ravel(heat.heat_evolve(sphere, f, 0.0, dt, pt, tol=1e-13))[0]) / complex(np.ravel(f(0.9, 2.1))[0])
        decay = max(decay, abs(ratio - math.exp(-sigma * ell * (ell + 1) * dt)))
    checks.append((f"multipole decay err {decay:.1e}", decay < 1e-10))
    assert report(5, "heat kernel", checks)


def test_criterion_06_dimensional_reduction(report):
    g3 = wave.causal_green(3)
    inside = max(abs(wave.reduce_dimension(g3, dt, f * dt) - 0.5) for dt in (0.5, 1.0, 3.0) for f in (0.0, 0.4, 0.9))
    outside = max(abs(wave.reduce_dimension(g3, 1.0, rho)) for rho in (1.2, 3.0))
    past = abs(wave.reduce_dimension(g3, -1.0, 0.2))
    d2 = wave.causal_green(2)(1.0, 0.3)
    assert report(6, "line-source reduction", [
        (f"inside err {inside:.1e}", inside < 1e-6),
        ("zero outside the cone", outside == 0.0 and past == 0.0),
        ("d=2 interior = 1/2", d2 == 0.5),
    ])


def _radial_fourier_oracle(psi_hat, t, r):
    # inverse transform of a radial profile evolved mode by mode
    def integrand(k):
        return k * math.sin(k * r) * wave.homogeneous_fourier_evolve(psi_hat(k), 0.0, k, t).real

    return integrate.quad(integrand, 0, 60, limit=400, epsabs=1e-13)[0] / (2 * math.pi**2 * r)


def test_criterion_07_kirchhoff(report):
    k = np.array([0.3, -1.2, 0.8])
    kk = np.linalg.norm(k)
    x = np.array([0.2, 0.5, -0.1])
    psi0 = lambda p: np.exp(1j * p @ k)
    dpsi0 = lambda p: -1j * kk * np.exp(1j * p @ k)
    plane = abs(wave.kirchhoff_evolve_4d(psi0, dpsi0, 0.0, 2.5, x, n_theta=64, n_phi=128) - np.exp(1j * (k @ x - kk * 2.5)))

    s = 0.7
    g = lambda p: np.exp(-np.sum(p**2, -1) / (2 * s * s))
    g_hat = lambda q: (2 * math.pi * s * s) ** 1.5 * math.exp(-q * q * s * s / 2)
    gauss = 0.0
    for t, xx in [(1.3, np.array([0.4, 0.3, 0.2])), (2.0, np.array([1.5, -0.5, 0.0]))]:
        val = wave.kirchhoff_evolve_4d(g, lambda p: 0 * p[..., 0], 0.0, t, xx)
        gauss = max(gauss, abs(val - _radial_fourier_oracle(g_hat, t, np.linalg.norm(xx))))

    n, L = 16, 2 * math.pi
    X = np.arange(n) * L / n
    XX, YY, ZZ = np.meshgrid(X, X, X, indexing="ij")
    field = wave.PeriodicWaveField(np.sin(XX) * np.cos(2 * YY) + 0.3 * np.cos(ZZ + XX), np.cos(3 * ZZ), L)
    E0 = field.energy()
    drift = 0.0
    for _ in range(1000):
        field.step(0.01)
        drift = max(drift, abs(field.energy() / E0 - 1))
    assert report(7, "Kirchhoff evolution", [
        (f"plane wave err {plane:.1e}", plane < 1e-6),
        (f"Gaussian vs Fourier modes err {gauss:.1e}", gauss < 1e-4),
        (f"energy drift {drift:.1e}", drift < 1e-10),
    ])


def test_criterion_08_frequency_space(report):
    g0 = poisson.coulomb_green(3, [0, 0, 0], [2.0, 0, 0])
    at_zero = abs(wave.freq_green_4d(0.0, 2.0) - g0) <= 4 * np.finfo(float).eps * g0
    # |exp(i w r) - 1| / (4 pi r) -> w / (4 pi): the approach is linear in w
    slope = max(abs(abs(wave.freq_green_4d(w, 2.0) - g0) / w * 4 * math.pi - 1) for w in (1e-4, 1e-8))
    omega = 2.0
    r_lo, r_hi = 1.0 / omega, 3.0 / omega
    worst = 0.0
    for th, ph in [(0.4, 0.0), (1.3, 2.0), (2.9, 4.5)]:
        xp = r_hi * np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        x = np.array([r_lo, 0.0, 0.0])
        exact = wave.freq_green_4d(omega, np.linalg.norm(x - xp))
        worst = max(worst, abs(wave.freq_green_modesum(omega, x, xp, 40) - exact))
    assert report(8, "frequency-space Green's function", [
        ("omega = 0 equals the static kernel to rounding", at_zero),
        (f"linear approach err {slope:.1e}", slope < 1e-6),
        (f"partial-wave sum err {worst:.1e}", worst < 1e-8),
    ])


def test_criterion_09_oscillator(report):
    osc = odegreen.DampedOscillator(0.3, 1.7)
    G = lambda s: odegreen.sho_retarded_green(osc, s)
    h = 1e-3
    resid = 0.0
    for tau in (0.3, 1.1, 4.0, 9.0):
        d2 = (-G(tau + 2 * h) + 16 * G(tau + h) - 30 * G(tau) + 16 * G(tau - h) - G(tau - 2 * h)) / (12 * h * h)
        d1 = (8 * (G(tau + h) - G(tau - h)) - (G(tau + 2 * h) - G(tau - 2 * h))) / (12 * h)
        resid = max(resid, abs(d2 + 2 * osc.gamma * d1 + osc.Omega**2 * G(tau)))
    e = 1e-7
    jump = ((G(2 * e) - G(e)) / e) - ((G(-e) - G(-2 * e)) / e)

    tau_w, mu, n = 2.0, 3.0, 3
    T = 2 * math.pi * n / mu
    drive = lambda t: np.where(np.abs(t) <= T, np.exp(-(np.asarray(t) / tau_w) ** 2) * np.sin(mu * np.asarray(t)), 0.0)
    t0, V0 = -5.0, 0.8
    ts = np.linspace(t0, t0 + 20.0, 41)
    xs = np.array([odegreen.sho_solve(osc, 0.0, V0, t0, drive, t, breakpoints=[-T, T]) for t in ts])
    rhs = lambda t, y: np.array([y[1], float(drive(t)) - 2 * osc.gamma * y[1] - osc.Omega**2 * y[0]])
    # step count chosen so the drive's window edges fall on grid points
    grid, ys = quadrature.rk4(rhs, [0.0, V0], t0, t0 + 20.0, 20000, keep=True)
    sup = np.max(np.abs(np.interp(ts, grid, ys[:, 0]) - xs))

    crit = odegreen.sho_retarded_green(odegreen.DampedOscillator(1.0, 1.0), 2.0)
    near = [odegreen.sho_retarded_green(odegreen.DampedOscillator(1.0, 1.0 + d), 2.0) for d in (1e-10, 1e-11, 1e-12)]
    cont = max(abs(v - crit) for v in near)
    assert report(9, "damped oscillator", [
        (f"ODE residual {resid:.1e}", resid < 1e-8),
        (f"derivative jump err {abs(jump - 1):.1e}", abs(jump - 1) < 1e-6),
        (f"windowed drive vs RK4 {sup:.1e}", sup < 1e-5),
        (f"critical damping continuity {cont:.1e}", cont < 1e-8),
    ])


def _printed_table(r, th):
    # reference table verbatim, including its Gamma^phi_{theta phi} = -cot(theta) entry
    E = np.zeros((3, 3, 3))
    E[0, 1, 1], E[0, 2, 2] = -r, -r * math.sin(th) ** 2
    E[1, 0, 1] = E[1, 1, 0] = 1 / r
    E[1, 2, 2] = -math.cos(th) * math.sin(th)
    E[2, 0, 2] = E[2, 2, 0] = 1 / r
    E[2, 1, 2] = E[2, 2, 1] = -math.cos(th) / math.sin(th)
    return E


@lru_cache(maxsize=1)
def _criterion_10_checks():
    x = np.array([1.7, 0.6, 0.3])
    table_err = np.max(np.abs(geometry.christoffel(geometry.spherical_flat(), x) - _printed_table(x[0], x[1])))
    scalar = geometry.curvature(geometry.round_sphere(), [0.9, 0.4]).scalar
    s = geometry.round_sphere()
    tr = geometry.geodesic(s, [1.0, 0.2], [0.3, 0.9], (0.0, 10.0), step=1e-3, every=100)
    norms = tr.norms(s)
    drift = np.max(np.abs(norms - norms[0]))
    R = 1.3
    hemi = geometry.graph_surface(
        lambda a, b: math.sqrt(max(R * R - a * a - b * b, 0.0)),
        lambda a, b: (-a / math.sqrt(R * R - a * a - b * b), -b / math.sqrt(R * R - a * a - b * b)),
        polar=True,
    )
    _, area = geometry.induced_metric_and_area(hemi, [(0.0, R), (0.0, 2 * math.pi)], rule=["tanh-sinh", "gauss"], tol=1e-7, n=8)
    return [
        (f"reference Christoffel table err {table_err:.1e}", table_err < 1e-8),
        (f"sphere Ricci scalar err {abs(scalar - 2):.1e}", abs(scalar - 2) < 1e-5),
        (f"geodesic norm drift {drift:.1e}", tr.complete and drift < 1e-8),
        (f"hemisphere area err {abs(area - 2 * math.pi * R * R):.1e}", abs(area - 2 * math.pi * R * R) < 1e-6),
    ]


@pytest.mark.xfail(strict=True, reason="reference table lists -cot(theta) for Gamma^phi_{theta phi}; the metric gives +cot(theta)")
def test_criterion_10_geometry(report):
    assert report(10, "differential geometry", _criterion_10_checks())


def test_criterion_10_remaining_parts_hold():
    # everything in criterion 10 except the single reference sign
    checks = _criterion_10_checks()
    assert not checks[0][1]
    assert all(ok for _, ok in checks[1:])
    x = np.array([1.7, 0.6, 0.3])
    fixed = _printed_table(x[0], x[1])
    fixed[2, 1, 2] = fixed[2, 2, 1] = math.cos(x[1]) / math.sin(x[1])
    assert np.max(np.abs(geometry.christoffel(geometry.spherical_flat(), x) - fixed)) < 1e-8


def test_criterion_11_asymptotics(report):
    st = abs(asympt.stirling(10.0) / math.gamma(10.0) - 1)
    checks = [(f"Stirling x=10 rel err {st:.2%}", st < 0.01)]
    for x in (2.0, 3.0, 5.0):
        s = asympt.erf_optimal(x)
        err = abs(s.value - math.sqrt(math.pi) / 2 * special.erfc(x))
        checks.append((f"erf x={x:g} err {err:.1e} <= {s.first_omitted_bound:.1e}", err <= s.first_omitted_bound))
    x = 200.0
    for n in (0, 1):
        sp = asympt.stationary_phase_leading(lambda t: np.exp(-1j * n * t) / math.pi, math.sin, math.pi / 2, 2, x, two_sided=True).real
        quad = integrate.quad(lambda t: math.cos(n * t - x * math.sin(t)) / math.pi, 0, math.pi, limit=500)[0]
        rel = abs(sp / quad - 1)
        checks.append((f"Bessel n={n} rel err {rel:.2%}", rel < 0.03))

    U = lambda t: 1 + t * t

    def err(eps):
        sol = asympt.JwkbSolution(asympt.JwkbProblem(U, eps, 1), 0.0, 1.0, -1)
        y0 = [sol(0.0), sol.derivative(0.0)]
        ts, ys = quadrature.rk4(lambda t, y: np.array([y[1], U(t) * y[0] / eps**2]), y0, 0.0, 1.0, 4000, keep=True)
        return np.max(np.abs(ys[:, 0] / sol(ts) - 1))

    ratio = err(0.05) / err(0.025)
    checks.append((f"JWKB error ratio {ratio:.3f}", 3.5 <= ratio <= 4.5))
    assert report(11, "asymptotic expansions", checks)


def test_criterion_12_cli(report, tmp_path):
    subs = ["modes", "fourier", "poisson", "heat", "wave", "sho", "geom", "asympt"]
    checks = []
    for sub in subs:
        outs = []
        for i in range(2):
            path = tmp_path / f"{sub}{i}.csv"
            res = subprocess.run([sys.executable, "-m", "fieldkernel", sub, "--output", str(path)], capture_output=True)
            outs.append((res.returncode, path.read_bytes() if path.exists() else None))
        same = outs[0][0] == 0 and outs[0][1] is not None and outs[0] == outs[1]
        st = subprocess.run([sys.executable, "-m", "fieldkernel", sub, "--self-test"], capture_output=True)
        checks.append((f"{sub} rerun/self-test", same and st.returncode == 0))
    assert report(12, "command-line interface", checks)
