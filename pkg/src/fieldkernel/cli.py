"""Command-line front end: ``fieldkernel <subcommand> [--flags]``.

Each subcommand prints a table (CSV or JSON) to stdout or ``--output``.
With an output path, a ``<path>.meta.json`` sidecar records the parameters
and tolerance.  Exit codes: 0 success, 1 numerical failure, 2 usage.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import asympt, geometry, heat, odegreen, poisson, quadrature, spectra, wave
from .errors import DomainError, FieldKernelError
from .specialfn import solid_angle, sph_harm_all

SUBCOMMANDS = ("modes", "fourier", "poisson", "heat", "wave", "sho", "geom", "asympt")
FORMATS = ("csv", "json")


class UsageError(Exception):
    code = "usage"


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output: str = None
    format: str = "csv"
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if not self.tolerance > 0:
            raise UsageError("tolerance must be positive")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def emit_table(rows, schema, fmt="csv"):
    """Serialize ``rows`` (dicts keyed by ``schema``) as CSV or JSON bytes."""
    for row in rows:
        if list(row.keys()) != list(schema):
            raise DomainError(f"row keys {list(row.keys())} do not match schema {list(schema)}")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(schema)
        for row in rows:
            w.writerow([_cell(row[k]) for k in schema])
        return buf.getvalue().encode()
    if fmt == "json":
        recs = [{k: _json_value(row[k]) for k in schema} for row in rows]
        return (json.dumps(recs, indent=1) + "\n").encode()
    raise DomainError(f"unknown format {fmt!r}")


def _threads():
    raw = os.environ.get("FIELDKERNEL_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("FIELDKERNEL_THREADS must be a positive integer") from None
    if n < 1:
        raise UsageError("FIELDKERNEL_THREADS must be a positive integer")
    return n


# ---- subcommand bodies: each returns (schema, rows) ----

def _modes(p, tol):
    domain = p.get("domain", "interval")
    n = int(p.get("nmax", 4))
    L = float(p.get("length", 1.0))
    if domain == "interval":
        basis = spectra.box_modes([L], n)
    elif domain == "box2":
        basis = spectra.box_modes([L, L], n)
    elif domain == "periodic":
        basis = spectra.periodic_modes([L], n)
    elif domain == "circle":
        basis = spectra.circle_modes(n)
    elif domain == "sphere":
        basis = spectra.sphere_modes(n)
    else:
        raise UsageError(f"unknown domain {domain!r}")
    rows = [
        {"index": i, "label": " ".join(str(v) for v in md.label), "eigenvalue": md.eigenvalue}
        for i, md in enumerate(basis.modes)
    ]
    return ["index", "label", "eigenvalue"], rows


def _square(x):
    return np.where(x >= 0, 1.0, -1.0)


def _fourier(p, tol):
    Ns = [int(v) for v in str(p.get("N", "20,50")).split(",")]
    npts = int(p.get("points", 201))
    L = 2 * math.pi
    fc = spectra.fourier_coeffs(_square, L, max(Ns), discontinuities=[0.0], tol=tol)
    xs = np.linspace(-L / 2, L / 2, npts)
    sums = {N: np.real(fc.partial_sum(xs, N)) for N in Ns}
    schema = ["x", "f"] + [f"f_{N}" for N in Ns]
    rows = []
    for i, x in enumerate(xs):
        row = {"x": float(x), "f": float(_square(x))}
        for N in Ns:
            row[f"f_{N}"] = float(sums[N][i])
        rows.append(row)
    return schema, rows


def _poisson(p, tol):
    D = int(p.get("dim", 3))
    sep = float(p.get("sep", 1.0))
    x = np.zeros(D)
    xp = np.zeros(D)
    xp[0] = sep
    return ["dim", "sep", "green"], [{"dim": D, "sep": sep, "green": poisson.coulomb_green(D, x, xp)}]


def _heat_norm(D, tau, sigma, tol):
    spec = heat.HeatKernelSpec(D, sigma)
    width = math.sqrt(4 * sigma * tau)

    def radial(r):
        pts = np.zeros(r.shape + (D,))
        pts[..., 0] = r
        return r ** (D - 1) * heat.heat_kernel_flat(spec, pts, np.zeros(D), tau)

    if D == 1:
        return 2 * quadrature.integrate(lambda r: heat.heat_kernel_flat(spec, r, 0.0, tau), 0.0, 40 * width, tol=tol)
    return solid_angle(D) * quadrature.integrate(radial, 0.0, 40 * width, tol=tol)


def _heat(p, tol):
    D = int(p.get("dim", 1))
    tau = float(p.get("tau", 1.0))
    sigma = float(p.get("sigma", 1.0))
    if p.get("norm_check"):
        return ["dim", "tau", "sigma", "norm"], [{"dim": D, "tau": tau, "sigma": sigma, "norm": _heat_norm(D, tau, sigma, tol)}]
    spec = heat.HeatKernelSpec(D, sigma)
    rs = np.linspace(0.0, float(p.get("rmax", 4.0)), int(p.get("points", 41)))
    rows = []
    for r in rs:
        x = np.zeros(D)
        x[0] = r
        rows.append({"r": float(r), "kernel": heat.heat_kernel_flat(spec, x, np.zeros(D), tau)})
    return ["r", "kernel"], rows


def _wave(p, tol):
    d = int(p.get("dim", 3))
    dt = float(p.get("dt", 2.0))
    kern = wave.causal_green(d, p.get("orientation", "retarded"))
    rs = np.linspace(0.0, float(p.get("rmax", 3.0)), int(p.get("points", 31)))
    rows = [{"dt": dt, "r": float(r), "pointwise": kern(dt, r)} for r in rs]
    return ["dt", "r", "pointwise"], rows


def _sho(p, tol):
    osc = odegreen.DampedOscillator(float(p.get("gamma", 0.3)), float(p.get("Omega", 1.7)))
    x0 = float(p.get("x0", 1.0))
    v0 = float(p.get("v0", 0.0))
    ts = np.linspace(0.0, float(p.get("tmax", 10.0)), int(p.get("points", 101)))
    rows = [{"t": float(t), "x": odegreen.sho_solve(osc, x0, v0, 0.0, t=float(t), tol=tol)} for t in ts]
    return ["t", "x"], rows


_METRICS = {
    "sphere": geometry.round_sphere,
    "spherical-flat": geometry.spherical_flat,
    "polar": geometry.polar_flat,
}


def _geom(p, tol):
    name = p.get("metric", "spherical-flat")
    if name not in _METRICS:
        raise UsageError(f"unknown metric {name!r}")
    m = _METRICS[name]()
    default = {"sphere": "1.0,0.5", "spherical-flat": "1.5,0.7,0.3", "polar": "1.5,0.3"}[name]
    at = np.array([float(v) for v in str(p.get("at", default)).split(",")])
    if at.size != m.dimension:
        raise UsageError(f"--at needs {m.dimension} coordinates")
    G = geometry.christoffel(m, at)
    rows = []
    for idx in np.ndindex(G.shape):
        if abs(G[idx]) > 1e-9:
            rows.append({"i": idx[0], "j": idx[1], "k": idx[2], "gamma": float(G[idx])})
    if p.get("scalar"):
        rows.append({"i": -1, "j": -1, "k": -1, "gamma": geometry.curvature(m, at).scalar})
    return ["i", "j", "k", "gamma"], rows


def _asympt(p, tol):
    kind = p.get("kind", "stirling")
    xs = [float(v) for v in str(p.get("x", "5,10,20,40,80")).split(",")]
    if kind == "stirling":
        from .specialfn import gamma

        rows = [{"x": x, "approx": asympt.stirling(x), "exact": gamma(x)} for x in xs]
        return ["x", "approx", "exact"], rows
    if kind == "erf":
        rows = []
        for x in xs:
            s = asympt.erf_optimal(x)
            rows.append({"x": x, "terms": s.truncation_index, "approx": s.value, "bound": s.first_omitted_bound})
        return ["x", "terms", "approx", "bound"], rows
    raise UsageError(f"unknown kind {kind!r}")


BODIES = {
    "modes": _modes,
    "fourier": _fourier,
    "poisson": _poisson,
    "heat": _heat,
    "wave": _wave,
    "sho": _sho,
    "geom": _geom,
    "asympt": _asympt,
}


# ---- self tests: each yields (check, value, target, tolerance) ----

def _st_modes():
    rule = quadrature.product_sphere(12, 24)
    ys = sph_harm_all(4, rule.nodes[:, 0], rule.nodes[:, 1])
    keys = sorted(ys)
    Y = np.stack([ys[k] for k in keys], axis=-1)
    gram = (np.conj(Y).T * rule.weights) @ Y
    yield "sphere gram l<=4", float(np.max(np.abs(gram - np.eye(len(keys))))), 0.0, 1e-12
    ev = spectra.box_modes([1.0, 2.0], 6).eigenvalues
    yield "box eigenvalues nondecreasing", max(0.0, -float(np.min(np.diff(ev)))), 0.0, 0.0


def _st_fourier():
    fc = spectra.fourier_coeffs(_square, 2 * math.pi, 3, discontinuities=[0.0])
    yield "square wave C_1", abs(fc[1] - (-2j / math.pi)), 0.0, 1e-10
    yield "square wave C_2", abs(fc[2]), 0.0, 1e-10


def _st_poisson():
    yield "coulomb 3D unit", poisson.coulomb_green(3, [0, 0, 0], [1, 0, 0]), 1 / (4 * math.pi), 1e-15
    b = spectra.box_modes([1.0], 20000)
    g = poisson.box_green_modesum(b, 0.3, 0.6, tol=1e-6)
    yield "1D box mode sum", g, 0.3 * 0.4, 1e-5


def _st_heat():
    for D in (1, 2, 3):
        yield f"flat norm D={D}", _heat_norm(D, 1.0, 1.0, 1e-11), 1.0, 1e-8
    yield "proper time D=3", heat.green_from_heat_kernel(3, [0, 0, 0], [1, 0, 0]), 1 / (4 * math.pi), 1e-6


def _st_wave():
    yield "d=2 interior", wave.causal_green(2)(1.0, 0.3), 0.5, 0.0
    yield "G3 line integral", wave.reduce_dimension(wave.causal_green(3), 1.0, 0.5), 0.5, 1e-6
    yield "static limit", wave.freq_green_4d(0.0, 2.0).real, 1 / (8 * math.pi), 1e-15


def _st_sho():
    osc = odegreen.DampedOscillator(0.3, 1.7)
    jump = odegreen.sho_retarded_green_dt(osc, 0.0) - 0.0
    yield "derivative jump", jump, 1.0, 1e-12
    tau, h = 0.8, 1e-3
    g = lambda s: odegreen.sho_retarded_green(osc, s)
    res = (g(tau + h) - 2 * g(tau) + g(tau - h)) / h**2 + 2 * osc.gamma * (g(tau + h) - g(tau - h)) / (2 * h) + osc.Omega**2 * g(tau)
    yield "green residual", res, 0.0, 1e-5


def _st_geom():
    yield "sphere Ricci scalar", geometry.curvature(geometry.round_sphere(), [0.9, 0.4]).scalar, 2.0, 1e-5
    G = geometry.christoffel(geometry.polar_flat(), [1.5, 0.3])
    yield "polar Gamma^r_phiphi", G[0, 1, 1], -1.5, 1e-8


def _st_asympt():
    from .specialfn import gamma

    yield "stirling x=10", asympt.stirling(10) / gamma(10), 1.0, 0.01
    s = asympt.erf_asymptotic(3.0, 3)
    exact = quadrature.integrate(lambda t: np.exp(-t * t), 3.0, 12.0, tol=1e-15)
    yield "erf x=3 n=3 within bound", abs(s.value - exact), 0.0, s.first_omitted_bound


SELF_TESTS = {
    "modes": _st_modes,
    "fourier": _st_fourier,
    "poisson": _st_poisson,
    "heat": _st_heat,
    "wave": _st_wave,
    "sho": _st_sho,
    "geom": _st_geom,
    "asympt": _st_asympt,
}


def self_test(sub):
    rows = []
    for name, value, target, tol in SELF_TESTS[sub]():
        err = abs(value - target)
        rows.append({"check": name, "value": float(value), "target": float(target), "tolerance": float(tol), "pass": bool(err <= tol)})
    return ["check", "value", "target", "tolerance", "pass"], rows


def run(config):
    """Execute a RunConfig; returns (exit_status, serialized table bytes)."""
    threads = _threads()
    p = config.parameters
    if p.get("self_test"):
        schema, rows = self_test(config.subcommand)
        status = 0 if all(r["pass"] for r in rows) else 1
    else:
        schema, rows = BODIES[config.subcommand](p, config.tolerance)
        status = 0
    data = emit_table(rows, schema, config.format)
    if config.output:
        with open(config.output, "wb") as fh:
            fh.write(data)
        meta = {
            "subcommand": config.subcommand,
            "parameters": {k: _json_value(v) for k, v in sorted(p.items())},
            "tolerance": config.tolerance,
            "threads": threads,
            "format": config.format,
        }
        with open(config.output + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=1)
            fh.write("\n")
    return status, data


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="fieldkernel", description="Green's-function toolkit")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--output")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--self-test", action="store_true")

    def add(name, *flags):
        sp = sub.add_parser(name, parents=[common])
        for flag, kw in flags:
            sp.add_argument(flag, **kw)
        return sp

    add("modes", ("--domain", {"default": "interval"}), ("--nmax", {"type": int, "default": 4}),
        ("--length", {"type": float, "default": 1.0}))
    add("fourier", ("--N", {"default": "20,50"}), ("--points", {"type": int, "default": 201}))
    add("poisson", ("--dim", {"type": int, "default": 3}), ("--sep", {"type": float, "default": 1.0}))
    add("heat", ("--flat", {"action": "store_true"}), ("--dim", {"type": int, "default": 1}),
        ("--tau", {"type": float, "default": 1.0}), ("--sigma", {"type": float, "default": 1.0}),
        ("--norm-check", {"action": "store_true"}), ("--rmax", {"type": float, "default": 4.0}),
        ("--points", {"type": int, "default": 41}))
    add("wave", ("--dim", {"type": int, "default": 3}), ("--dt", {"type": float, "default": 2.0}),
        ("--orientation", {"default": "retarded"}), ("--rmax", {"type": float, "default": 3.0}),
        ("--points", {"type": int, "default": 31}))
    add("sho", ("--gamma", {"type": float, "default": 0.3}), ("--Omega", {"type": float, "default": 1.7}),
        ("--x0", {"type": float, "default": 1.0}), ("--v0", {"type": float, "default": 0.0}),
        ("--tmax", {"type": float, "default": 10.0}), ("--points", {"type": int, "default": 101}))
    add("geom", ("--metric", {"default": "spherical-flat"}), ("--at", {}), ("--scalar", {"action": "store_true"}))
    add("asympt", ("--kind", {"default": "stirling"}), ("--x", {}))
    return parser


def _error_record(code, message, subcommand=None):
    rec = {"error": code, "message": message}
    if subcommand:
        rec["subcommand"] = subcommand
    sys.stderr.write(json.dumps(rec) + "\n")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    sub = None
    try:
        ns = _build_parser().parse_args(argv)
        sub = ns.subcommand
        if sub is None:
            raise UsageError("a subcommand is required")
        params = {k: v for k, v in vars(ns).items()
                  if k not in ("subcommand", "format", "output", "tol") and v is not None}
        config = RunConfig(sub, params, ns.output, ns.format, ns.tol)
        status, data = run(config)
        if not config.output:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        return status
    except UsageError as exc:
        _error_record("usage", str(exc), sub)
        return 2
    except DomainError as exc:
        _error_record(exc.code, str(exc), sub)
        return 2
    except (FieldKernelError, ArithmeticError) as exc:
        _error_record(getattr(exc, "code", "numerical"), str(exc), sub)
        return 1


if __name__ == "__main__":
    sys.exit(main())
