"""Command-line entry point.

Subcommands: simulate, sweep-mu, converge, audit, fit.  Exit codes:
0 success, 2 blow-up, 3 configuration error.
"""

import argparse
import csv
import json
import sys

from .diagnostics import fit_decay
from .dynamics import BlowUpError
from .experiments import (ConfigError, RunConfig, audit, convergence_study,
                          run_simulation, sweep_viscosity)

EXIT_OK = 0
EXIT_BLOWUP = 2
EXIT_CONFIG = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ve2d",
        description="Pseudo-spectral runs and diagnostics for 2D "
                    "incompressible viscoelasticity in potential form.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("simulate", "single run with diagnostics sampling"),
            ("sweep-mu", "run every configured viscosity from the same data"),
            ("converge", "vanishing-viscosity convergence table"),
            ("audit", "identity and inequality report")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="INI config file")
    fit = sub.add_parser("fit", help="decay-exponent fit of a CSV column")
    fit.add_argument("--csv", required=True)
    fit.add_argument("--column", required=True)
    fit.add_argument("--t0", type=float, required=True)
    fit.add_argument("--t1", type=float, required=True)
    return parser


def _cmd_fit(args) -> int:
    with open(args.csv, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or args.column not in rows[0]:
        print(f"column {args.column!r} not found in {args.csv}",
              file=sys.stderr)
        return EXIT_CONFIG
    ts = [float(row["t"]) for row in rows]
    vals = [float(row[args.column]) for row in rows]
    try:
        p, err = fit_decay(ts, vals, args.t0, args.t1)
    except ValueError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.column}: exponent {p:.4f} +/- {err:.4f} "
          f"over t in [{args.t0:g}, {args.t1:g}]")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "fit":
        return _cmd_fit(args)
    try:
        cfg = RunConfig.from_ini(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "simulate":
            result = run_simulation(cfg)
            if result.blowup_t is not None:
                print(f"blow-up at t = {result.blowup_t:g}", file=sys.stderr)
                return EXIT_BLOWUP
            print(f"completed t = {result.final_state.t:g} "
                  f"(mu = {result.mu:g}, {len(result.records)} samples)")
        elif args.command == "sweep-mu":
            report = sweep_viscosity(cfg)
            print(json.dumps({"max_E1_ratio": report["max_E1_ratio"],
                              "per_mu": {f"{k:g}": v for k, v in
                                         report["per_mu"].items()}},
                             indent=2))
        elif args.command == "converge":
            report = convergence_study(cfg)
            print(json.dumps({"table": {f"{k:g}": v for k, v in
                                        report["table"].items()},
                              "fitted_order": report["fitted_order"]},
                             indent=2))
        elif args.command == "audit":
            report = audit(cfg)
            print(json.dumps({k: report[k] for k in
                              ("identity_residuals", "inequality_ratios")},
                             indent=2))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
