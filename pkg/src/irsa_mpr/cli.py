"""Command-line front end.

    irsa-mpr design --k 2 --eps 0.01 --l 5
    irsa-mpr threshold --dist lambda2.json --k 2
    irsa-mpr plr-curve --l 5 --loads 1.0,1.2,1.4 --trials 200 --out plr.csv
    irsa-mpr simulate --dist lambda2.json --load 1.5
    irsa-mpr energy --ptx 50
    irsa-mpr table1
    irsa-mpr --manifest experiment.json

Single results are written as JSON, sweeps as CSV. Exit codes: 0 success,
2 invalid parameters, 3 I/O failure, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .degree import DegreeDistribution
from .design import A_STAR, SearchConfig, exponential_distribution, load_bound, find_a_star
from .energy import PUBLISHED_LADDER, PowerModel, energy_sweep, table1
from .errors import (BracketError, ConfigError, DistributionError, DomainError,
                     NonConvergenceError)
from .evolution import (EvolutionParams, certify_no_fixed_point, largest_root,
                        threshold_bisection)
from .simulation import SimConfig, SimReport, plr_curve

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = ("design", "threshold", "plr-curve", "simulate", "energy", "table1")

SIM_COLUMNS = ["G", "realized_G", "plr", "ci_low", "ci_high", "throughput",
               "trials", "M", "K", "seed", "asymptotic_plr"]
ENERGY_COLUMNS = ["L", "A", "B", "E", "Gamma", "ratio", "is_optimal"]


class UsageError(Exception):
    pass


class InputFileError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return f"{x:.9g}"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _loads(text: str) -> list[float]:
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad load list {text!r}") from exc
    return values


def _read_dist(path: str) -> DegreeDistribution:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFileError(f"cannot read distribution file {path}: {exc}") from exc
    dist = DegreeDistribution.from_json(obj)
    if dist.min_degree < 2:
        raise DistributionError("IRSA distributions need every user to send at least 2 replicas")
    return dist


def _dist_from_args(args) -> DegreeDistribution:
    if args.dist is not None:
        return _read_dist(args.dist)
    return exponential_distribution(args.a, args.l)


def _positive(kind):
    def parse(text: str):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _nonneg(kind):
    def parse(text: str):
        value = kind(text)
        if value < 0:
            raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irsa-mpr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--manifest", help="JSON experiment manifest used instead of flags")
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--threads", type=_positive(int), default=1)
    common.add_argument("--seed", type=_nonneg(int), default=0)

    dist_opts = argparse.ArgumentParser(add_help=False)
    dist_opts.add_argument("--dist", help="distribution JSON file (default: exponential design)")
    dist_opts.add_argument("--l", type=_positive(int), default=5,
                           help="truncation order of the exponential design")
    dist_opts.add_argument("--a", type=_positive(float), default=A_STAR)
    dist_opts.add_argument("--k", type=_positive(int), default=2)

    p = sub.add_parser("design", parents=[common], help="search a* and build the distribution")
    p.add_argument("--k", type=_positive(int), default=2)
    p.add_argument("--eps", type=_positive(float), default=0.01)
    p.add_argument("--l", type=_positive(int), default=5)
    p.add_argument("--g-tol", type=_positive(float), default=1e-4)

    p = sub.add_parser("threshold", parents=[common, dist_opts], help="density-evolution threshold")
    p.add_argument("--g-tol", type=_positive(float), default=1e-4)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--users", type=_positive(int), default=1000)
    sim.add_argument("--trials", type=_positive(int), default=200)

    p = sub.add_parser("plr-curve", parents=[common, dist_opts, sim], help="simulated PLR sweep")
    p.add_argument("--loads", type=_loads, required=True, help="comma-separated loads")

    p = sub.add_parser("simulate", parents=[common, dist_opts, sim], help="simulated PLR at one load")
    p.add_argument("--load", type=_positive(float), default=1.0)

    p = sub.add_parser("energy", parents=[common], help="energy efficiency versus L")
    p.add_argument("--ptx", type=_positive(float), default=50.0)
    p.add_argument("--pc", type=_nonneg(float), default=0.1)
    p.add_argument("--noise", type=_positive(float), default=1.0)
    p.add_argument("--users", type=_positive(int), default=1000)
    p.add_argument("--lmax", type=_positive(int), default=10)
    p.add_argument("--a", type=_positive(float), default=A_STAR)

    p = sub.add_parser("table1", parents=[common], help="delta-ratio ladder")
    p.add_argument("--lmax", type=_positive(int), default=7)
    p.add_argument("--a", type=_positive(float), default=A_STAR)
    return parser


def manifest_to_argv(manifest: dict) -> list[str]:
    """Translate ``{"command", "parameters", "output_path", "seed"}`` into flags."""
    if not isinstance(manifest, dict):
        raise UsageError("manifest must be a JSON object")
    unknown = set(manifest) - {"command", "parameters", "output_path", "seed"}
    if unknown:
        raise UsageError(f"unknown manifest fields: {sorted(unknown)}")
    command = manifest.get("command")
    if command not in COMMANDS:
        raise UsageError(f"manifest command must be one of {COMMANDS}, got {command!r}")
    params = dict(manifest.get("parameters") or {})
    if "output_path" in manifest:
        params["out"] = manifest["output_path"]
    if "seed" in manifest:
        params["seed"] = manifest["seed"]
    argv = [command]
    for key, value in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        argv += [flag, str(value)]
    return argv


def cmd_design(args) -> str:
    a = find_a_star(SearchConfig(epsilon_target=args.eps, K=args.k))
    dist = exponential_distribution(a, args.l)
    res = threshold_bisection(dist, args.k, args.g_tol)
    return _json({
        "command": "design",
        "K": args.k,
        "epsilon_target": args.eps,
        "a_star": a,
        "L": args.l,
        "distribution": dist.to_json(),
        "mean_degree": dist.mean_degree(),
        "load_bound": load_bound(a, args.l),
        "threshold": res.threshold,
        "g_tol": args.g_tol,
    })


def cmd_threshold(args) -> str:
    dist = _dist_from_args(args)
    res = threshold_bisection(dist, args.k, args.g_tol)
    below = EvolutionParams(res.lower, args.k, dist)
    report = largest_root(below)
    if not (report.converged or report.decodable):
        raise NonConvergenceError(f"density evolution did not settle at G={res.lower}")
    cert = certify_no_fixed_point(below)
    if cert.roots:
        raise NonConvergenceError(
            f"grid scan finds a nonzero fixed point at G={res.lower} (p={cert.roots[-1]:.6g})")
    return _json({
        "command": "threshold",
        "K": args.k,
        "distribution": dist.to_json(),
        "G_star": res.threshold,
        "g_tol": args.g_tol,
        "bracket": [res.lower, res.upper],
        "certificate": {
            "load": res.lower,
            "min_residual": cert.min_value,
            "argmin_p": cert.argmin,
            "roots": list(cert.roots),
            "certified": cert.certified,
        },
        "diagnostics": {
            "bisection_steps": res.steps,
            "iterations_lower": res.iterations_lower,
            "iterations_upper": res.iterations_upper,
            "converged_lower": report.converged,
            "p_star_lower": report.p_star,
        },
    })


def _sim_rows(dist: DegreeDistribution, K: int, reports: list[SimReport]) -> list[list]:
    rows = []
    for r in reports:
        asym = largest_root(EvolutionParams(r.load, K, dist)).plr
        rows.append([r.load, r.realized_load, r.plr, r.ci_low, r.ci_high, r.throughput,
                     r.trials, r.num_users, r.K, r.seed, asym])
    return rows


def cmd_plr_curve(args) -> str:
    if not args.loads:
        raise UsageError("--loads must list at least one load")
    if any(g <= 0 for g in args.loads):
        raise UsageError("loads must be positive")
    dist = _dist_from_args(args)
    template = SimConfig(dist, args.k, args.users, args.loads[0], args.trials, args.seed)
    reports = plr_curve(template, args.loads, threads=args.threads)
    return _csv(SIM_COLUMNS, _sim_rows(dist, args.k, reports))


def cmd_simulate(args) -> str:
    args.loads = [args.load]
    return cmd_plr_curve(args)


def cmd_energy(args) -> str:
    model = PowerModel(args.ptx, args.pc, args.noise, args.users)
    rows = [[p.L, p.coeff_a, p.coeff_b, p.consumption, p.efficiency, p.ratio, p.is_optimal]
            for p in energy_sweep(model, args.a, args.lmax)]
    return _csv(ENERGY_COLUMNS, rows)


def cmd_table1(args) -> str:
    rows = []
    for L, value in enumerate(table1(args.a, args.lmax), start=1):
        if L <= len(PUBLISHED_LADDER):
            ref = PUBLISHED_LADDER[L - 1]
            rows.append([L, value, ref, (value - ref) / ref])
        else:
            rows.append([L, value, "", ""])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "ratio", "published", "relative_delta"])
    for row in rows:
        w.writerow([v if v == "" else _fmt(v) for v in row])
    return buf.getvalue()


HANDLERS = {
    "design": cmd_design,
    "threshold": cmd_threshold,
    "plr-curve": cmd_plr_curve,
    "simulate": cmd_simulate,
    "energy": cmd_energy,
    "table1": cmd_table1,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.manifest is not None:
            if args.command is not None:
                raise UsageError("--manifest cannot be combined with a subcommand")
            try:
                manifest = json.loads(Path(args.manifest).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InputFileError(f"cannot read manifest {args.manifest}: {exc}") from exc
            try:
                args = parser.parse_args(manifest_to_argv(manifest))
            except SystemExit as exc:
                return int(exc.code or 0)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        text = HANDLERS[args.command](args)
        if args.out:
            try:
                Path(args.out).write_text(text)
            except OSError as exc:
                raise InputFileError(f"cannot write {args.out}: {exc}") from exc
        else:
            sys.stdout.write(text)
    except (UsageError, ConfigError, DistributionError, DomainError) as exc:
        print(f"irsa-mpr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputFileError as exc:
        print(f"irsa-mpr: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BracketError, NonConvergenceError) as exc:
        print(f"irsa-mpr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
