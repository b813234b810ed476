"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exceptions import ConvergenceError, DivergenceError, InvalidParameterError
from .experiments import (
    ExperimentConfig,
    config_from_mapping,
    load_config_file,
    run_collab,
    run_outage,
    run_se,
    run_validation,
    write_figures,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag dest -> config key
_FLAG_KEYS = {
    "lam": "lambda", "mu": "mu", "gamma_r": "gamma_r", "alpha": "alpha", "beta": "beta",
    "theta_db": "theta_db", "rd": "r_d", "rho_d": "rho_d", "sigma2": "sigma2",
    "library_size": "library_size", "cache_size": "cache_size", "radius": "radius",
    "window_radius": "window_radius", "trials": "trials", "seed": "seed", "out": "out",
    "validate": "validate", "mode": "mode", "sweep": "sweep", "series": "series",
    "collab_users": "collab_users",
}


def _shared_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat JSON file with snake_case keys; flags override it")
    p.add_argument("--lambda", dest="lam", type=float, help="UE density (per m^2)")
    p.add_argument("--mu", type=float, help="fraction of users requesting content")
    p.add_argument("--gamma-r", type=float, help="Zipf exponent of requests")
    p.add_argument("--alpha", type=float, help="path-loss exponent (> 2)")
    p.add_argument("--beta", type=float, help="residual self-interference factor (linear)")
    p.add_argument("--theta-db", type=float, help="SINR threshold in dB")
    p.add_argument("--rd", type=float, help="typical link distance (m)")
    p.add_argument("--rho-d", type=float, help="D2D transmit power (W)")
    p.add_argument("--sigma2", type=float, help="noise power (W)")
    p.add_argument("--library-size", type=int, help="number of contents in the library")
    p.add_argument("--cache-size", type=int, help="contents cached per user")
    p.add_argument("--radius", type=float, help="radius of the disc holding the requesting users (m)")
    p.add_argument("--window-radius", type=float, help="interferer simulation window radius (m)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--validate", action="store_true", default=None, help="add Monte Carlo columns")
    p.add_argument("--mode", choices=["hd", "fd", "both"], help="duplex modes to include")
    p.add_argument("--sweep", help="name:start:stop:points:lin|log with name in lambda, mu, beta, theta_db, gamma_r")
    p.add_argument("--series", help="extra curve parameter, e.g. gamma_r=0.8,1.2")
    p.add_argument("--collab-users", choices=["expected", "poisson"],
                   help="user count in the collaboration simulator (default: expected)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdd2d", description="FD-D2D stochastic geometry analysis and Monte Carlo validation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    shared = _shared_flags()
    sub.add_parser("collab", parents=[shared], help="HD/FD collaboration probabilities")
    sub.add_parser("outage", parents=[shared], help="outage probability sweep")
    sub.add_parser("se", parents=[shared], help="spectral efficiency sweep")
    val = sub.add_parser("validate", parents=[shared], help="closed forms against Monte Carlo")
    val.add_argument("--sim-beta", type=float,
                     help="residual SI factor given to the simulator only (sensitivity check)")
    sub.add_parser("figures", parents=[shared], help="CSV data and gnuplot scripts for the five figures")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    mapping = load_config_file(args.config) if args.config else {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            mapping[key] = value
    return config_from_mapping(mapping)


def _write(result, cfg: ExperimentConfig, name: str) -> str:
    path = os.path.join(cfg.out, f"{name}.csv")
    result.write_csv(path)
    print(path)
    return path


def _run(args) -> int:
    cfg = resolve_config(args)
    if args.command == "collab":
        _write(run_collab(cfg), cfg, "collab")
    elif args.command == "outage":
        _write(run_outage(cfg), cfg, "outage")
    elif args.command == "se":
        _write(run_se(cfg), cfg, "se")
    elif args.command == "figures":
        for path in write_figures(cfg, cfg.out):
            print(path)
    elif args.command == "validate":
        report = run_validation(cfg, sim_beta=args.sim_beta)
        for line in report.lines():
            print(line)
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "validation_report.json"), "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
        if not report.passed:
            for p in report.offenders():
                print(f"offender: {p.check} {p.label} z={p.z_score:+.2f}", file=sys.stderr)
            return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (DivergenceError, ConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        if isinstance(exc, DivergenceError):
            print("hint: give a positive --sigma2, a positive --beta with FD, or a density with "
                  "at least two requesting users", file=sys.stderr)
        return EXIT_NUMERICAL
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
