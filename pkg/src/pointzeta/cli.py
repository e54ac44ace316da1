"""Command-line interface: ``eval``, ``figure`` and ``verify``.

Exit codes: 0 success, 1 verification or numerical failure, 2 usage error.
"""

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import DomainError, PointZetaError
from .kernels import ImpurityConfig, SphericalPoint
from .quadrature import DEFAULT_TOLERANCE
from .stress import COMPONENTS, PARTS, t00_continuation, t_regularized, t_renormalized

__all__ = ["build_parser", "run", "main", "sweep_grid", "format_csv"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
NUMBER_FORMAT = "%.14e"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so ``run`` can return codes."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}", self.format_usage())


class _UsageError(Exception):
    def __init__(self, message, usage=""):
        super().__init__(message)
        self.usage = usage


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def build_parser():
    parser = _Parser(prog="pointzeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="renormalized (and optionally regularized) tensor at one point")
    ev.add_argument("--r", type=float, required=True, help="radius")
    ev.add_argument("--lambda", dest="lam", type=float, required=True,
                    help="point-interaction length (> 0)")
    ev.add_argument("--xi", type=float, required=True, help="curvature coupling")
    ev.add_argument("--theta", type=float, default=math.pi / 2, help="polar angle (default pi/2)")
    ev.add_argument("--epsilon", type=float, default=None,
                    help="infrared cutoff; needed for the regularized tensor")
    ev.add_argument("--kappa", type=_positive, default=1.0, help="mass scale (default 1)")
    ev.add_argument("--u-re", type=float, default=None,
                    help="real part of u; adds the regularized tensor at this u")
    ev.add_argument("--u-im", type=float, default=0.0, help="imaginary part of u")

    fig = sub.add_parser("figure", help="rho-sweep of lam^4 T (lam^2 T for thth) as CSV")
    fig.add_argument("--component", choices=COMPONENTS, required=True)
    fig.add_argument("--part", choices=PARTS, required=True)
    fig.add_argument("--rho-min", type=_positive, required=True)
    fig.add_argument("--rho-max", type=_positive, required=True)
    fig.add_argument("--points", type=int, required=True)
    fig.add_argument("--spacing", choices=("linear", "log"), default="linear")
    fig.add_argument("--out", default=None, help="CSV path (default: standard output)")
    fig.add_argument("--plot", default=None, help="also render an SVG to this path")

    ver = sub.add_parser("verify", help="run the cross-pipeline checks")
    ver.add_argument("--fast", action="store_true",
                     help="skip the finite-difference oracle and the epsilon limit")
    ver.add_argument("--write-golden", default=None, metavar="PATH",
                     help="write the derived asymptotic windows to PATH")
    return parser


def sweep_grid(rho_min, rho_max, points, spacing):
    if not rho_min < rho_max:
        raise DomainError("rho-min must be smaller than rho-max")
    if points < 2:
        raise DomainError("points must be >= 2")
    if spacing == "log":
        return np.logspace(math.log10(rho_min), math.log10(rho_max), points)
    return np.linspace(rho_min, rho_max, points)


def format_csv(rho, values):
    buf = io.StringIO(newline="")
    buf.write("rho,value\n")
    for x, v in zip(rho, values):
        buf.write(f"{NUMBER_FORMAT % x},{NUMBER_FORMAT % v}\n")
    return buf.getvalue()


def _complex_json(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _cmd_eval(args, out):
    if not args.lam > 0:
        raise DomainError(f"--lambda must be > 0 (the renormalized tensor needs lambda > 0), got {args.lam}")
    q = SphericalPoint(args.r, args.theta)
    ren = t_renormalized(q, args.lam, args.xi)
    payload = {
        "t00": ren.t00, "trr": ren.trr, "tthth": ren.tthth, "tphph": ren.tphph,
        "rho": 2.0 * args.r / args.lam, "lambda": args.lam, "xi": args.xi,
    }
    meta = {
        "version": __version__,
        "tolerance": {"relative": DEFAULT_TOLERANCE.relative,
                      "absolute": DEFAULT_TOLERANCE.absolute,
                      "max_subdivisions": DEFAULT_TOLERANCE.max_subdivisions},
    }
    if args.u_re is not None:
        if args.epsilon is None:
            raise DomainError("--u-re needs --epsilon > 0")
        cfg = ImpurityConfig(args.lam, args.epsilon, args.kappa, args.xi)
        u = complex(args.u_re, args.u_im)
        if u.real > 4:
            reg = t_regularized(u, q, cfg)
            payload["regularized"] = {
                "t00": _complex_json(reg.t00), "trr": _complex_json(reg.trr),
                "tthth": _complex_json(reg.tthth), "tphph": _complex_json(reg.tphph),
            }
        else:
            # only T00 is continued below Re u = 4
            payload["regularized"] = {"t00": _complex_json(t00_continuation(u, q, cfg))}
        meta["u"] = _complex_json(u)
        meta["epsilon"] = args.epsilon
        meta["kappa"] = args.kappa
    payload["meta"] = meta
    out.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _cmd_figure(args, out):
    from .verify import figure_values

    rho = sweep_grid(args.rho_min, args.rho_max, args.points, args.spacing)
    values = figure_values(args.component, args.part, rho)
    text = format_csv(rho, values)
    if args.out is None:
        out.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.plot is not None:
        from .plotting import render_sweep

        render_sweep(rho, values, args.component, args.part, args.plot,
                     log_x=args.spacing == "log")
    return EXIT_OK


def _cmd_verify(args, out):
    from .verify import derive_golden, format_table, run_verification

    if args.write_golden:
        with open(args.write_golden, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(derive_golden(), indent=2, sort_keys=True) + "\n")
    checks = run_verification(fast=args.fast)
    out.write(format_table(checks) + "\n")
    failed = [c for c in checks if not c.passed]
    out.write(f"{len(checks) - len(failed)}/{len(checks)} checks passed\n")
    return EXIT_OK if not failed else EXIT_FAILURE


_COMMANDS = {"eval": _cmd_eval, "figure": _cmd_figure, "verify": _cmd_verify}


def run(argv=None, out=None, err=None):
    """Run the CLI on ``argv`` and return the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        err.write(exc.usage)
        err.write(str(exc) + "\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except DomainError as exc:
        err.write(f"pointzeta: error: {exc}\n")
        return EXIT_USAGE
    except PointZetaError as exc:
        err.write(f"pointzeta: numerical failure: {exc}\n")
        return EXIT_FAILURE


def main():
    sys.exit(run())
