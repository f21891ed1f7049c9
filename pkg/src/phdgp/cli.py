"""Command line entry point: ``phdgp <command> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import TimeGrid, write_trajectory_csv
from .discrete_gradients import MassMatrixError
from .experiments import (Timer, halving_dts, run_convergence, run_power_balance,
                          write_manifest)
from .integrators import SCHEMES, IntegrationError, SchemeConfig, integrate
from .models import MODELS, get_model, validate_model
from .newton import NewtonSettings


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _schemes(text):
    out = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in out if s not in SCHEMES]
    if bad or not out:
        raise argparse.ArgumentTypeError(
            f"unknown scheme(s) {', '.join(bad) or text!r}; choose from {', '.join(SCHEMES)}")
    return out


def _params(text):
    try:
        val = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"--params is not valid JSON: {exc}")
    if not isinstance(val, dict):
        raise argparse.ArgumentTypeError("--params must be a JSON object")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phdgp",
        description="Discrete gradient pair time stepping for port-Hamiltonian systems.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="synthetic", choices=sorted(MODELS))
    common.add_argument("--params", type=_params, default={},
                        help="model parameters as a JSON object")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--newton-tol", type=float, default=1e-13,
                        help="Newton residual tolerance (max norm)")

    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--t-end", type=float, default=1.0)
    timed.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", parents=[common, timed], help="integrate and write trajectories")
    p.add_argument("--scheme", type=_schemes, default=["dgp"])
    p.add_argument("--dt", type=float, default=1e-2)

    p = sub.add_parser("power-balance", parents=[common, timed],
                       help="per-interval discrete power balance residuals")
    p.add_argument("--scheme", type=_schemes, default=["dgp", "implicit_midpoint"])
    p.add_argument("--dt", type=float, default=1e-3)

    p = sub.add_parser("convergence", parents=[common, timed], help="error and EOC table")
    p.add_argument("--scheme", type=_schemes, default=["dgp", "implicit_midpoint"])
    p.add_argument("--dt-list", type=_float_list, default=None,
                   help="comma-separated step sizes (default: 10 halvings from 0.1)")
    p.add_argument("--dt-ref", type=float, default=None,
                   help="reference step (default: min(dt-list) / 8)")
    p.add_argument("--reference", choices=SCHEMES, default="radau5")

    p = sub.add_parser("check-structure", parents=[common], help="check pH structure conditions")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def _run(args) -> int:
    model = get_model(args.model, **args.params)
    newton = NewtonSettings(tol_residual=args.newton_tol)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "check-structure":
        with Timer() as tm:
            report = validate_model(model, args.samples, args.seed, args.tol)
        print(f"{model.name}: {report.summary()}")
        write_manifest(out / "manifest.json", model, [], newton, {}, args.seed, tm.elapsed,
                       structure={"passed": report.passed, "skew": report.skew_defect,
                                  "symmetry": report.symmetry_defect,
                                  "min_eig_R": report.min_eig_R,
                                  "factorization": report.factorization_defect})
        return 0 if report.passed else 1

    if args.command == "simulate":
        grid = TimeGrid.uniform(args.t_end, args.dt)
        with Timer() as tm:
            for scheme in args.scheme:
                traj = integrate(model.system, SchemeConfig(scheme, newton), grid, model.input,
                                 model.x0)
                write_trajectory_csv(traj, out / f"{scheme}_states.csv", out / f"{scheme}_ports.csv")
        write_manifest(out / "manifest.json", model, args.scheme, newton,
                       {"dt": args.dt, "t_end": args.t_end, "q": grid.q}, args.seed, tm.elapsed)
        print(f"wrote {len(args.scheme)} trajectories to {out}")
        return 0

    if args.command == "power-balance":
        with Timer() as tm:
            reports = run_power_balance(model, args.scheme, args.dt, args.t_end, newton,
                                        args.workers)
        for scheme, rep in reports.items():
            rep.to_csv(out / f"power_balance_{scheme}.csv")
            print(f"{scheme:>18s}: max |residual| = {rep.max_abs_residual:.3e}")
        write_manifest(out / "manifest.json", model, args.scheme, newton,
                       {"dt": args.dt, "t_end": args.t_end}, args.seed, tm.elapsed)
        return 0

    dts = args.dt_list or halving_dts()
    dt_ref = args.dt_ref if args.dt_ref is not None else min(dts) / 8
    with Timer() as tm:
        tables = run_convergence(model, args.scheme, dts, SchemeConfig(args.reference, newton),
                                 dt_ref, args.t_end, newton, args.workers)
    for scheme, tab in tables.items():
        tab.to_csv(out / f"convergence_{scheme}.csv")
        print(f"{scheme} (reference: {tab.reference})")
        for dt, err, order in tab.rows():
            print(f"  dt={dt:.4e}  rel_error={err:.4e}  eoc={order:.3f}")
    write_manifest(out / "manifest.json", model, args.scheme, newton,
                   {"dt_list": sorted(dts, reverse=True), "dt_ref": dt_ref,
                    "t_end": args.t_end, "reference": args.reference},
                   args.seed, tm.elapsed)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _run(args)
    except (KeyError, TypeError, ValueError, IntegrationError, MassMatrixError) as exc:
        print(f"phdgp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
