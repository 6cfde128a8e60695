"""Command-line front end; every subcommand writes CSV.

Floats are written with 17 significant digits so values round-trip
exactly, and rows always end in ``\\n``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from contextlib import contextmanager

import numpy as np

from maxtail import gauss_geometry as gg
from maxtail.copulas import parse_spec
from maxtail.indices import GridSpec, index_report
from maxtail.maxdep import (
    SolverOptions,
    admissibility_check,
    critical_residual_gaussian_array,
    maximize_section,
    trace_max_path,
)
from maxtail.special_fns import mills_h

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_RHOS = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_VERIFY_U = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


class _Writer:
    def __init__(self, fh):
        self._w = csv.writer(fh, lineterminator="\n")
        self._fh = fh

    def row(self, *values):
        self._w.writerow([fmt(v) for v in values])

    def comment(self, text):
        self._fh.write(f"# {text}\n")


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
        return
    buf = io.StringIO()
    yield buf
    # only touch the file once the command has produced everything
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _grid(args) -> GridSpec:
    return GridSpec(u_max=args.umax, u_min=args.umin, points=args.points)


def _opts(args) -> SolverOptions:
    return SolverOptions(scan_points=args.scan_points, xtol=args.xtol)


def cmd_eval(args, out: _Writer) -> int:
    spec = parse_spec(args.spec)
    c = spec.cdf(args.u, args.v)
    body = ",".join(f"{k}={fmt(float(v))}" for k, v in spec.params.items())
    out.row("family", "params", "u", "v", "C")
    out.row(spec.family, body, args.u, args.v, c)
    return EXIT_OK


def cmd_indices(args, out: _Writer) -> int:
    spec = parse_spec(args.spec)
    rep = index_report(spec, _grid(args), _opts(args))
    out.row("u", "C_diag", "Pi_star", "lambda_diag", "lambda_star", "chi_diag", "chi_star",
            "kappa_secant_diag", "kappa_secant_star")
    kd, ks = rep.kappa_diag.trajectory, rep.kappa_star.trajectory
    for i, u in enumerate(rep.u_grid):
        out.row(
            u, math.exp(rep.log_c_diag[i]), math.exp(rep.log_pi_star[i]),
            rep.lambda_diag.trajectory[i], rep.lambda_star.trajectory[i],
            rep.chi_diag.trajectory[i], rep.chi_star.trajectory[i],
            kd[i - 1] if i else "", ks[i - 1] if i else "",
        )
    s = rep.summary()
    out.row("summary", "", "", s["lambda_diag"], s["lambda_star"], s["chi_diag"], s["chi_star"],
            s["kappa_diag"], s["kappa_star"])
    return EXIT_OK


def cmd_path(args, out: _Writer) -> int:
    spec = parse_spec(args.spec)
    u = _grid(args).u_grid(spec)
    samples = trace_max_path(spec, u, _opts(args))
    out.row("u", "x_star", "psi_star", "pi_star", "boundary", "multimodal")
    for s in samples:
        out.row(s.u, s.x_star, s.psi_star, s.pi_star, s.boundary, s.multimodal)
    out.comment(f"admissibility: {admissibility_check(samples).summary()}")
    return EXIT_OK


def _check_betas(betas):
    for b in betas:
        if not (0.0 < b < math.pi / 2):
            raise ValueError(f"beta must lie in (0, pi/2), got {b}")


def _residual_sign_ok(u, rho) -> tuple[bool, str]:
    """Sign of the critical residual on either side of the diagonal."""
    lo, hi = math.log(u * u), 0.0
    t = np.linspace(lo, hi, 402)[1:-1]
    x = np.exp(t)
    x = x[np.abs(t - math.log(u)) > 1e-3 * abs(lo)]
    r = critical_residual_gaussian_array(u, x, rho)
    below, above = r[x < u], r[x > u]
    sign = 1.0 if rho > 0 else -1.0
    # for rho > 0 the section rises up to x = u and falls after it
    ok = bool(np.all(sign * below >= 0.0) and np.all(sign * above <= 0.0))
    if rho == 0.0:
        ok = bool(np.all(np.abs(r) <= 1e-15))
    return ok, f"n={len(x)}"


def cmd_verify_gaussian(args, out: _Writer) -> int:
    alphas = args.alpha or list(gg.DEFAULT_ALPHAS)
    betas = args.beta or list(gg.DEFAULT_BETAS)
    rhos = args.rho or list(DEFAULT_RHOS)
    _check_betas(betas)
    for a in alphas:
        if not (0.0 < a < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
    for r in rhos:
        if not (-1.0 < r < 1.0):
            raise ValueError(f"rho must lie in (-1, 1), got {r}")
    opts = _opts(args)
    u_grid = DEFAULT_VERIFY_U if args.umin is None else tuple(_grid(args).u_grid(None))

    all_ok = True
    out.row("check", "params", "detail", "status")

    def report(check, params, detail, ok):
        nonlocal all_ok
        all_ok &= bool(ok)
        out.row(check, params, detail, "PASS" if ok else "FAIL")

    for a in alphas:
        for b in betas:
            p = gg.intersection_probe(a, b)
            ok = p.n_intersections == 1 and p.max_residual <= 1e-10
            report("unique_intersection", f"alpha={fmt(a)};beta={fmt(b)}",
                   f"n={p.n_intersections};max_residual={fmt(p.max_residual)}", ok)

    w = np.arange(-10.0, 10.0 + 1e-12, 1e-3)
    h = np.array([mills_h(v) for v in w])
    report("mills_h_monotone", "w=[-10,10]", f"min_step={fmt(float(np.diff(h).min()))}",
           bool(np.all(np.diff(h) >= 0.0)))

    for rho in rhos:
        for u in u_grid:
            ok, detail = _residual_sign_ok(u, rho)
            report("critical_residual_sign", f"rho={fmt(rho)};u={fmt(u)}", detail, ok)
        spec = parse_spec(f"gaussian:rho={rho!r}")
        for u in u_grid:
            sm = maximize_section(spec, u, opts)
            rel = abs(sm.x_star - u) / u
            if rho > 0.0:
                ok = rel <= 1e-4 and not sm.boundary and not sm.multimodal
                detail = f"x_star/u-1={fmt(rel)}"
            elif rho < 0.0:
                # no admissible maximal path: the supremum sits on the boundary
                ok = sm.boundary
                detail = f"boundary supremum at x_star={fmt(sm.x_star)}"
            else:
                ok = sm.x_star == u and sm.pi_star == u * u
                detail = "constant section"
            report("diagonal_argmax", f"rho={fmt(rho)};u={fmt(u)}", detail, ok)
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_geometry(args, out: _Writer) -> int:
    alphas = args.alpha or list(gg.DEFAULT_ALPHAS)
    if args.kind == "probe":
        betas = args.beta or list(gg.DEFAULT_BETAS)
        _check_betas(betas)
        out.row(*gg.PROBE_COLUMNS)
        for a in alphas:
            for b in betas:
                for r in gg.probe_rows(gg.intersection_probe(a, b, args.resolution)):
                    out.row(*r)
    elif args.kind == "polar":
        out.row("alpha", "theta", "r")
        for a in alphas:
            th, r = gg.radius_profile(a, args.samples)
            for t, v in zip(th, r):
                out.row(a, t, v)
    else:
        out.row("alpha", "w", "z")
        for a in alphas:
            s = np.linspace(-1.0, 1.0, 2 * args.samples + 1)
            w, z = gg._Curve(a).point(s)
            keep = (np.abs(w) <= args.reach) & (np.abs(z) <= args.reach)
            for wi, zi in zip(w[keep], z[keep]):
                out.row(a, wi, zi)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxtail", description="Tail dependence along paths of maximal dependence.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--scan-points", type=int, default=SolverOptions.scan_points)
        sp.add_argument("--xtol", type=float, default=SolverOptions.xtol)

    def grid(sp):
        sp.add_argument("--umin", type=float, default=None)
        sp.add_argument("--umax", type=float, default=GridSpec.u_max)
        sp.add_argument("--points", type=int, default=GridSpec.points)

    sp = sub.add_parser("eval", help="evaluate C(u, v)")
    sp.add_argument("spec")
    sp.add_argument("u", type=float)
    sp.add_argument("v", type=float)
    common(sp)
    sp.set_defaults(func=cmd_eval)

    for name, func, text in (("indices", cmd_indices, "diagonal and starred tail indices"),
                             ("path", cmd_path, "trace the path of maximal dependence")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("spec")
        grid(sp)
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("verify-gaussian", help="numerical checks of the Gaussian diagonal result")
    sp.add_argument("--alpha", type=_float_list, default=None)
    sp.add_argument("--beta", type=_float_list, default=None, help="rotation angles in radians")
    sp.add_argument("--rho", type=_float_list, default=None)
    grid(sp)
    common(sp)
    sp.set_defaults(func=cmd_verify_gaussian)

    sp = sub.add_parser("geometry", help="raw level-curve and probe dumps")
    sp.add_argument("kind", choices=("curve", "polar", "probe"))
    sp.add_argument("--alpha", type=_float_list, default=None)
    sp.add_argument("--beta", type=_float_list, default=None)
    sp.add_argument("--resolution", type=int, default=2000)
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--reach", type=float, default=4.0, help="clip |w|, |z| for curve dumps")
    common(sp)
    sp.set_defaults(func=cmd_geometry)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with _output(args.out) as fh:
            return args.func(args, _Writer(fh))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
