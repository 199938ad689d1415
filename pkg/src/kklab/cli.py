"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure, 3 I/O failure.  Reports go to stdout as JSON; errors go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .config import config_to_dict, parse_config
from .diagnostics import EntropyLedger, TVMonitor, convergence_study, invariant_region_check
from .entropy import EntropyPair, GeneralPairSpec, check_general_pair, compatibility_residual
from .errors import (
    AdmissibilityViolation,
    IoError,
    KKError,
    NonPositiveDerivative,
    NumericalFailure,
    OutOfStateSpace,
    ParseError,
    QuadratureFailure,
    RootNotBracketed,
    ValidationError,
)
from .hyperbolic import demonstrate_identity_diffusion_failure
from .io import SNAPSHOT_SCHEMA, dumps_report, write_report_json, write_rows_csv, write_snapshot_csv
from .model import State, available_flux_laws, get_flux_law, parse_state, validate_flux_law
from .riemann import sample_riemann_grid, solve_riemann
from .viscous import initial_field, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

_NUMERICAL = (NumericalFailure, QuadratureFailure, AdmissibilityViolation, NonPositiveDerivative, RootNotBracketed)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _state_arg(text):
    try:
        return parse_state(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _eps_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _law_arg(name):
    try:
        get_flux_law(name)
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown flux law {name!r} (available: {', '.join(available_flux_laws())})"
        ) from None
    return name


def _emit(report: dict, path=None):
    if path:
        write_report_json(report, path)
    sys.stdout.write(dumps_report(report))


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config, args.override)
    if args.epsilon is not None:
        cfg = replace(cfg, epsilon=args.epsilon).validate()
    start = initial_field(cfg)
    tv = TVMonitor.for_config(cfg) if cfg.representation == "invariant" else None
    ledger = EntropyLedger.for_config(cfg, start) if args.ledger else None
    hooks = [h for h in (tv, ledger) if h is not None]
    traj = run(cfg, hooks, initial=start)
    region = invariant_region_check(traj.final, cfg.m, cfg.M)

    snapshots = []
    if args.out:
        try:
            os.makedirs(args.out, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create {args.out}: {exc.strerror or exc}") from None
        x = traj.grid.centers
        for i, fp in enumerate(traj.snapshots):
            name = f"snapshot_{i:05d}.csv"
            write_snapshot_csv(fp, os.path.join(args.out, name), x)
            snapshots.append({"file": name, "t": fp.time})
    if ledger is not None:
        ledger.write_csv(args.ledger)

    report = {
        "config": config_to_dict(cfg),
        "n_steps": traj.n_steps,
        "t_final": traj.final.time,
        "wall_time": traj.wall_time,
        "snapshot_schema": SNAPSHOT_SCHEMA,
        "snapshots": snapshots,
        "final_region": region.to_dict(),
    }
    if tv is not None:
        report["xi_tv_nonincreasing"] = tv.nonincreasing
    if ledger is not None:
        report["entropy_balance_residual"] = ledger.residual(traj.final.time)
    if args.out:
        write_report_json(report, os.path.join(args.out, "meta.json"))
    _emit(report)
    return EXIT_OK


def cmd_riemann(args) -> int:
    law = get_flux_law(args.flux_law)
    sol = solve_riemann(law, args.left, args.right, args.m)
    if args.t <= 0:
        raise ValidationError("t", "must be positive")
    if args.samples < 2:
        raise ValidationError("samples", "must be at least 2")
    speeds = sol.wave_speeds()
    half = max(1.0, 1.25 * max(abs(s) for s in speeds) * args.t)
    x_min = args.x_min if args.x_min is not None else args.x0 - half
    x_max = args.x_max if args.x_max is not None else args.x0 + half
    if not x_max > x_min:
        raise ValidationError("x-max", "must exceed x-min")
    x = np.linspace(x_min, x_max, args.samples)
    u, v = sample_riemann_grid(sol, x, args.t, args.x0)
    if args.csv:
        write_rows_csv(args.csv, "x,u,v,r,xi", (x, u, v, u * v, u / v))
    report = sol.summary()
    report["t"] = args.t
    _emit(report, args.json)
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = parse_config(args.config, args.override)
    table = convergence_study(cfg, args.eps, reference=args.reference, jobs=args.jobs)
    if args.csv:
        table.write_csv(args.csv)
    report = table.to_dict()
    _emit(report, args.json)
    return EXIT_OK if not any(table.failures) else EXIT_NUMERICAL


def cmd_check(args) -> int:
    law = get_flux_law(args.flux_law)
    if args.grid < 2:
        raise ValidationError("grid", "must be at least 2")
    ep = EntropyPair(args.k, args.p, args.m)
    if not args.M > args.m:
        raise ValidationError("M", "must exceed m")
    axis = np.linspace(args.m, args.M, args.grid)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    hess = ep.hessian(uu.ravel(), vv.ravel())
    min_eig = float(np.min(np.linalg.eigvalsh(hess)))

    # finite-difference residuals are costlier; use at most 12 x 12 states
    sub = np.linspace(args.m, args.M, min(args.grid, 12))
    max_res = 0.0
    for u in sub:
        for v in sub:
            res = compatibility_residual(ep, law, State(float(u), float(v)))
            max_res = max(max_res, float(np.max(np.abs(res))))

    gp = GeneralPairSpec.power(args.k, args.p)
    names = ("psi_convex", "psi_decreasing", "psi_combination", "theta_condition")
    agg = dict.fromkeys(names, True)
    for u, v in zip(uu.ravel(), vv.ravel()):
        flags = check_general_pair(gp, float(u * v), float(u / v))
        for n in names:
            agg[n] = agg[n] and getattr(flags, n)
    report = {
        "k": args.k,
        "p": args.p,
        "m": args.m,
        "M": args.M,
        "grid": args.grid,
        "flux_law": law.name,
        "min_hessian_eigenvalue": min_eig,
        "max_compatibility_residual": max_res,
        "condition_flags": agg,
        "pass": bool(min_eig > 0 and all(agg.values())),
    }
    _emit(report, args.json)
    return EXIT_OK


def cmd_demo_identity(args) -> int:
    cfg = parse_config(args.config, args.override)
    rep = demonstrate_identity_diffusion_failure(cfg)
    _emit(rep.to_dict(), args.json)
    return EXIT_OK


def cmd_validate_flux(args) -> int:
    law = get_flux_law(args.flux_law)
    rep = validate_flux_law(law, args.r_min, args.r_max, args.samples)
    _emit(rep.to_dict(), args.json)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kklab", description="Keyfitz-Kranzer viscosity and entropy toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def config_args(p):
        p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")

    p = sub.add_parser("simulate", help="run the regularised (or inviscid) solver")
    config_args(p)
    p.add_argument("--epsilon", type=float, help="override the viscosity; 0 gives the inviscid scheme")
    p.add_argument("--out", help="directory for snapshot CSVs and meta.json")
    p.add_argument("--ledger", help="write the entropy ledger CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("riemann", help="exact Riemann solution")
    p.add_argument("--left", type=_state_arg, required=True, metavar="U,V")
    p.add_argument("--right", type=_state_arg, required=True, metavar="U,V")
    p.add_argument("--flux-law", type=_law_arg, default="thin_film")
    p.add_argument("--t", type=float, default=1.0, help="sampling time")
    p.add_argument("--samples", type=int, default=401)
    p.add_argument("--x0", type=float, default=0.0, help="jump position")
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--m", type=float, help="optional lower state bound to enforce")
    p.add_argument("--csv", help="write sampled profile (x,u,v,r,xi)")
    p.add_argument("--json", help="also write the wave summary here")
    p.set_defaults(func=cmd_riemann)

    p = sub.add_parser("converge", help="vanishing-viscosity ladder")
    config_args(p)
    p.add_argument("--eps", type=_eps_list, default=[0.4, 0.2, 0.1, 0.05], help="e.g. 0.4,0.2,0.1,0.05")
    p.add_argument("--reference", choices=("exact", "finest"), default="exact")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="write eps,dx,L1_error,wall_time")
    p.add_argument("--json", help="also write the report here")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("check", help="entropy convexity and compatibility checks")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--m", type=float, default=0.5)
    p.add_argument("--M", type=float, default=4.0)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--flux-law", type=_law_arg, default="thin_film")
    p.add_argument("--json", help="also write the report here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("demo-identity-diffusion", help="show that eps*U_xx breaks the bound on uv")
    config_args(p)
    p.add_argument("--json", help="also write the report here")
    p.set_defaults(func=cmd_demo_identity)

    p = sub.add_parser("validate-flux", help="sample phi' and the nonlinearity indicator")
    p.add_argument("--flux-law", type=_law_arg, default="thin_film")
    p.add_argument("--r-min", type=float, default=0.25)
    p.add_argument("--r-max", type=float, default=16.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--json", help="also write the report here")
    p.set_defaults(func=cmd_validate_flux)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OutOfStateSpace) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IoError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KKError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
