"""
Command line for the verification suites.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input
(unparseable expressions, unknown generators, invalid settings).
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import config
from .output.flowfield import to_csv, write_flowfield
from .output.reports import summarize, write_report
from .schemas import ForceSpec, Report
from .service import core

LOG = logging.getLogger(__name__)


# ---- Argument helpers --------------------------------------------------------

def _grid(text: str) -> tuple[float, float, int]:
    """lo:hi:n"""
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from e


def _point(text: str) -> tuple[float, float, float]:
    try:
        t, x, y = (float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected t,x,y, got {text!r}") from e
    return t, x, y


def _param(text: str) -> tuple[str, float | str]:
    """name=value; values that are not numbers are kept as expressions."""
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        return name.strip(), value.strip()


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file (default: $PLASTICITY_CONFIG)")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--rho", type=float, help="density")
    common.add_argument("--trials", type=int, help="sample points per zero test")
    common.add_argument("--json", action="store_true", help="print the JSON report")
    common.add_argument("--out", type=Path, help="write the JSON report to this file")
    common.add_argument("--timings", action="store_true", help="record wall time in the report")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="plasticity-symmetry",
        description="Verify the symmetry algebra, subalgebra catalogue and invariant solutions "
                    "of the planar ideal-plasticity system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-table", parents=[common], help="commutation table")
    p.add_argument("--degree", type=int, help="slot ladder t^0..t^N (default from settings)")
    p.add_argument("--extended", action="store_true", help="include vanishing brackets")

    p = sub.add_parser("check-symmetry", parents=[common], help="symmetry criterion")
    p.add_argument("--force", default="none",
                   choices=["none", "monogenic", "friction", "spiral", "rotational"])
    p.add_argument("--potential", default="0", help="V(t, x, y)")
    for name, default in (("h1", "s"), ("h2", "1"), ("h3", "0"), ("h4", "0")):
        p.add_argument(f"--{name}", default=default, help="friction profile in s")
    for name, default in (("k0", 0.0), ("k1", 1.0), ("k2", 1.0), ("k3", 0.0), ("k4", 0.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--a2", type=float, default=1.0, help="rotational force strength")
    p.add_argument("--time-power", type=int, default=2, help="rotational force decay t^-p")
    p.add_argument("--gen", action="append", help="generator, e.g. X[t^2]; repeatable")
    p.add_argument("--all-eq9", action="store_true",
                   help="the force-free generators P0, D, L, X, Y, S")

    p = sub.add_parser("adjoint", parents=[common], help="adjoint action oracle")
    p.add_argument("--gen", required=True, help="group generator, e.g. L or X[t]")
    p.add_argument("--on", required=True, help="target generator")
    p.add_argument("--param", default="0.3")
    p.add_argument("--terms", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("classify", help="subalgebra classification")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("normal-form", parents=[common], help="normal form of X[f] + Y[g]")
    q.add_argument("--f", required=True)
    q.add_argument("--g", default="0")
    csub.add_parser("catalog", parents=[common], help="verify every stored representative")

    p = sub.add_parser("solution", help="explicit solution families")
    ssub = p.add_subparsers(dest="action", required=True)
    family = argparse.ArgumentParser(add_help=False)
    family.add_argument("--family", required=True, help="R10, R16, R17 or RF9")
    family.add_argument("--variant", help="printed or derived")
    family.add_argument("--param", type=_param, action="append", default=[],
                        help="family parameter name=value; repeatable")

    q = ssub.add_parser("eval", parents=[common, family], help="fields at a point")
    q.add_argument("--at", type=_point, required=True, help="t,x,y")
    q = ssub.add_parser("residual", parents=[common, family], help="residual oracle")
    q.add_argument("--points", type=int)
    q = ssub.add_parser("flowfield", parents=[common, family], help="velocity samples")
    q.add_argument("--t", type=float, nargs="+", default=[1.0], help="one or more times")
    q.add_argument("--grid", type=_grid, default=(-2.0, 2.0, 21),
                   help="lo:hi:n; write --grid=-2:2:21 for a negative lo")
    q.add_argument("--save", type=Path, help="write BASE_t<t>.csv and .svg per time")
    q = ssub.add_parser("first-integral", parents=[common], help="first integral along a "
                        "reduced candidate")
    q.add_argument("--candidate", default="R8", choices=["R8", "R11"])
    q.add_argument("--a1", type=float, default=1.0)
    q.add_argument("--b1", type=float, default=1.0)
    q.add_argument("--grid", type=_grid, default=(0.5, 2.0, 41))
    q.add_argument("--tol", type=float, default=1e-10)
    q = ssub.add_parser("invariants", parents=[common], help="reduction invariants")
    q.add_argument("--key", default="DL", choices=["DL", "K"])
    q.add_argument("--potential", default="0")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


# ---- Dispatch ----------------------------------------------------------------

def _settings(args: argparse.Namespace) -> config.Settings:
    overrides = {
        "seed": args.seed,
        "rho": args.rho,
        "trials": args.trials,
        "record_timing": True if args.timings else None,
    }
    return config.load_settings(args.config, overrides)


def _log_level(args: argparse.Namespace, s: config.Settings) -> int:
    if args.quiet:
        return logging.ERROR
    if args.verbose:
        return logging.DEBUG if args.verbose > 1 else logging.INFO
    return logging.getLevelNamesMapping()[s.log_level]


def _force(args: argparse.Namespace) -> ForceSpec:
    return ForceSpec(name=args.force, potential=args.potential, h1=args.h1, h2=args.h2,
                     h3=args.h3, h4=args.h4, k0=args.k0, k1=args.k1, k2=args.k2, k3=args.k3,
                     k4=args.k4, a2=args.a2, time_power=args.time_power)


def _flowfield(s: config.Settings, args: argparse.Namespace, argv: list[str]) -> Report:
    params = dict(args.param)
    for tv in args.t:
        _, grid = core.flow_field(s, args.family, tv, args.grid, args.variant, params)
        if args.save:
            base = args.save.with_name(f"{args.save.name}_t{tv:g}")
            write_flowfield(grid, base)
        elif not args.json:
            sys.stdout.write(to_csv(grid))
    return core.cmd_flowfield_probe(s, args.family, args.t, args.variant, params, argv=argv)


def run(args: argparse.Namespace, s: config.Settings, argv: list[str]) -> Report:
    match (args.command, getattr(args, "action", None)):
        case ("check-table", _):
            return core.cmd_check_table(s, degree=args.degree, extended=args.extended, argv=argv)
        case ("check-symmetry", _):
            gens = core.EQ9 if args.all_eq9 else args.gen
            return core.cmd_check_symmetry(s, _force(args), gens, argv=argv)
        case ("adjoint", _):
            return core.cmd_adjoint(s, args.gen, args.on, args.param, terms=args.terms,
                                    tol=args.tol, argv=argv)
        case ("classify", "normal-form"):
            return core.cmd_normal_form(s, args.f, args.g, argv=argv)
        case ("classify", "catalog"):
            return core.cmd_catalog(s, argv=argv)
        case ("solution", "eval"):
            return core.cmd_solution_eval(s, args.family, args.at, args.variant,
                                          dict(args.param), argv=argv)
        case ("solution", "residual"):
            return core.cmd_solution_residual(s, args.family, args.variant, dict(args.param),
                                              points=args.points, argv=argv)
        case ("solution", "flowfield"):
            return _flowfield(s, args, argv)
        case ("solution", "first-integral"):
            return core.cmd_first_integral(s, args.candidate, args.a1, b1=args.b1,
                                           grid=args.grid, tol=args.tol, argv=argv)
        case ("solution", "invariants"):
            return core.cmd_invariants(s, args.key, args.potential, argv=argv)
    raise ValueError(f"unknown command {args.command!r}")  # pragma: no cover


def serve(s: config.Settings, host: str, port: int) -> int:
    import uvicorn

    config.settings = s
    uvicorn.run("plasticity_symmetry.main:app", host=host, port=port,
                log_level=s.log_level.lower())
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        s = _settings(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(level=_log_level(args, s), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "serve":
        return serve(s, args.host, args.port)
    try:
        report = run(args, s, argv)
    except ValueError as e:
        LOG.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.out:
        write_report(report, args.out)
    if args.json:
        print(report.to_json())
    elif not (args.command == "solution" and args.action == "flowfield" and not args.save):
        print(summarize(report))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
