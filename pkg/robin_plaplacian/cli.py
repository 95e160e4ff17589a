"""Command line driver: mesh generation, eigenvalue solves, bound verification and beta sweeps.

Example:
    ::

        robin-plaplacian eig --domain disk:1 --p 2 --beta 1 --h 0.05 --out results
        robin-plaplacian verify --suite default --format csv --out results
        robin-plaplacian sweep --domain disk:1 --p 2 --beta-grid 1e-3:1e4:log --out results

Exit status is 0 on success, 2 for invalid arguments or configuration, 3 when
a solver did not converge (results are still written) and 4 when a bound is
violated beyond its slack.
"""

import argparse
import io
import json
import logging
import math
import os
import re
import sys
from dataclasses import asdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import bounds, functional_verification
from .eigensolve import SolverError, SolverOptions
from .mesh import geometry_stats, save_mesh

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_VIOLATED = 4

SUITES = {
    "default": (
        functional_verification.DEFAULT_DOMAINS,
        functional_verification.DEFAULT_EXPONENTS,
        functional_verification.DEFAULT_BETAS,
    ),
}

_LINEAR_GRID_POINTS = 11
_LIST_FLAGS = ("--domain", "--p", "--beta")
_SWITCHES = ("--verbose", "--no-certificates", "--no-checks")


class ConfigError(ValueError):
    pass


def parse_beta(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid beta '{text}'") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("beta must not be nan")
    return value


def parse_positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number '{text}'") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got '{text}'")
    return value


def parse_beta_grid(text: str) -> List[float]:
    """Parse :code:`lo:hi:log` (one point per decade) or :code:`lo:hi:lin[:n]` (n points, default 11).

    Raises:
        argparse.ArgumentTypeError: malformed or empty grid

    """
    parts = text.split(":")
    if len(parts) not in (3, 4) or parts[2] not in ("log", "lin"):
        raise argparse.ArgumentTypeError(f"beta grid must look like lo:hi:log or lo:hi:lin[:n], got '{text}'")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[3]) if len(parts) == 4 else None
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid beta grid '{text}'") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise argparse.ArgumentTypeError(f"beta grid needs finite lo <= hi, got '{text}'")

    if parts[2] == "log":
        if lo <= 0:
            raise argparse.ArgumentTypeError(f"log beta grid needs lo > 0, got '{text}'")
        if count is None:
            count = int(round(math.log10(hi / lo))) + 1
        grid = np.geomspace(lo, hi, count) if count > 1 else np.array([lo])
    else:
        if count is None:
            count = _LINEAR_GRID_POINTS
        grid = np.linspace(lo, hi, count) if count > 1 else np.array([lo])
    if count < 1:
        raise argparse.ArgumentTypeError(f"beta grid '{text}' is empty")
    return [float(b) for b in grid]


def read_run_config(path: str) -> Dict[str, str]:
    """Flat :code:`key = value` file, :code:`#` comments, keys are the long flag names without dashes.

    Raises:
        ConfigError: unreadable file or malformed line

    """
    settings = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigError(f"Could not read config file {path}: {e}") from e
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Malformed config line {line_number} in {path}: '{raw.rstrip()}'")
        settings[key.strip()] = value.strip()
    return settings


def _config_to_argv(settings: Dict[str, str], known: Sequence[str]) -> List[str]:
    argv = []
    for key, value in settings.items():
        flag = f"--{key}"
        if flag not in known:
            raise ConfigError(f"Unknown config key '{key}'")
        if flag in _SWITCHES:
            if value.lower() in ("1", "true", "yes", "on"):
                argv.append(flag)
        elif flag in _LIST_FLAGS:
            argv.append(flag)
            argv.extend(re.split(r"[\s,]+", value))
        else:
            argv.extend([flag, value])
    return argv


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", action="extend", nargs="+", help="kind:params or file:path, repeatable")
    common.add_argument("--h", type=parse_positive, help="target mesh size (default: meshSize from the config)")
    common.add_argument("--refine", type=int, default=0, help="number of uniform refinements")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--config", help="run config file with key = value lines")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    return common


def _solver_parser() -> argparse.ArgumentParser:
    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--p", type=float, action="extend", nargs="+", help="exponents in [1.1, 10]")
    solver.add_argument("--beta", type=parse_beta, action="extend", nargs="+", help="Robin parameters, inf for Dirichlet")
    solver.add_argument("--tol", type=parse_positive, help="relative eigenvalue tolerance")
    solver.add_argument("--max-iter", type=int, help="cap on outer iterations")
    solver.add_argument("--seed", type=int, help="seed of the initial guess")
    solver.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    return solver


def _build_parsers() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    common, solver = _common_parser(), _solver_parser()
    parser = argparse.ArgumentParser(
        prog="robin-plaplacian",
        description="First Robin eigenvalues of the p-Laplacian on planar domains and the bounds they satisfy.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("mesh", parents=[common], help="write meshes and their geometry")
    subparsers.add_parser("eig", parents=[common, solver], help="first eigenvalue per (domain, p, beta)")
    verify = subparsers.add_parser("verify", parents=[common, solver], help="evaluate every bound")
    verify.add_argument("--suite", choices=sorted(SUITES), help="predefined grid of domains, exponents and betas")
    verify.add_argument("--no-certificates", action="store_true", help="skip the lower-bound certificates")
    verify.add_argument("--no-checks", action="store_true", help="skip the asymptotic, isoperimetric and duality checks")
    sweep = subparsers.add_parser("sweep", parents=[common, solver], help="eigenvalue along a beta grid")
    sweep.add_argument("--beta-grid", type=parse_beta_grid, help="lo:hi:log or lo:hi:lin[:n]")
    sweep.set_defaults(format="csv")
    return parser, subparsers.choices


def build_parser() -> argparse.ArgumentParser:
    return _build_parsers()[0]


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse flags, merging a run config file when :code:`--config` is given; flags override the file.

    Raises:
        ConfigError: unreadable or malformed config file, unknown keys
        SystemExit: invalid flags, with status 2

    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = _build_parsers()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    settings = read_run_config(args.config)
    settings.pop("config", None)
    known = [flag for action in commands[args.command]._actions for flag in action.option_strings]
    file_args = parser.parse_args([args.command] + _config_to_argv(settings, known))

    # a flag given on the command line wins over the file
    baseline = vars(parser.parse_args([args.command]))
    for dest, value in vars(args).items():
        if value != baseline.get(dest):
            setattr(file_args, dest, value)
    file_args.config = args.config
    return file_args


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions.from_config(tol=args.tol, max_outer=args.max_iter, seed=args.seed)


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def _require(values, flag: str):
    if not values:
        raise ConfigError(f"{flag} is required")
    return values


def cmd_mesh(args: argparse.Namespace) -> int:
    """Write every generated (and refined) mesh with its geometry statistics."""
    os.makedirs(args.out, exist_ok=True)
    for mesh in functional_verification.buildMeshes(_require(args.domain, "--domain"), args.h, args.refine):
        stem = os.path.join(args.out, _slug(mesh.name))
        buffer = io.StringIO()
        save_mesh(mesh, buffer)
        bounds.atomic_write(stem + ".mesh", buffer.getvalue())
        record = {"domain": mesh.name, "vertices": mesh.num_vertices, "triangles": mesh.num_triangles, "h": mesh.h}
        record.update(asdict(geometry_stats(mesh)))
        bounds.atomic_write(stem + ".json", json.dumps(record, indent=2) + "\n")
        print(f"{mesh.name}: {mesh.num_vertices} vertices, {mesh.num_triangles} triangles -> {stem}.mesh")
    return EXIT_OK


def _write_frame(df: pd.DataFrame, out: str, stem: str, fmt: str) -> str:
    path = os.path.join(out, f"{stem}.{fmt}")
    if fmt == "csv":
        bounds.write_frame_csv(df, path)
    else:
        records = [{k: (v.item() if isinstance(v, np.generic) else v) for k, v in row.items()} for row in df.to_dict("records")]
        bounds.atomic_write(path, bounds.to_json(records))
    return path


def cmd_eig(args: argparse.Namespace) -> int:
    """One eigenvalue record per (domain, p, beta); exit 3 when any solve did not converge."""
    df = functional_verification.computeRobinEigenvalues(
        _require(args.domain, "--domain"),
        _require(args.p, "--p"),
        _require(args.beta, "--beta"),
        args.h,
        args.refine,
        _solver_options(args),
    )
    path = _write_frame(df, args.out, "eigenvalues", args.format)
    for row in df.to_dict("records"):
        print(f"{row['domain']} p={row['p']:g} beta={row['beta']} lambda={row['lambda']:.10g} converged={row['converged']}")
    logger.info(f"Wrote {len(df)} eigenvalue records to {path}")
    return EXIT_OK if bool(df["converged"].all()) else EXIT_NOT_CONVERGED


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the bound suite; exit 4 when any bound, certificate or check is violated beyond its slack."""
    if args.suite is not None:
        domains, exponents, betas = SUITES[args.suite]
        domains, exponents, betas = args.domain or domains, args.p or exponents, args.beta or betas
    else:
        domains = _require(args.domain, "--domain or --suite")
        exponents, betas = _require(args.p, "--p"), _require(args.beta, "--beta")
    reports = functional_verification.verifyBounds(
        domains,
        exponents,
        betas,
        args.h,
        args.refine,
        _solver_options(args),
        certificates=not args.no_certificates,
        checks=not args.no_checks,
    )
    os.makedirs(args.out, exist_ok=True)
    if args.format == "csv":
        path = os.path.join(args.out, "bounds.csv")
        bounds.write_frame_csv(bounds.reports_to_frame(reports), path)
    else:
        path = os.path.join(args.out, "bounds.json")
        bounds.write_reports_json(reports, path)
    for report in reports:
        print(report.summary())
    violated = [report for report in reports if not report.all_satisfied]
    logger.info(f"Wrote {len(reports)} reports to {path}, {len(violated)} with violations")
    return EXIT_VIOLATED if violated else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Eigenvalues along the beta grid per (domain, p) with the asymptotic summary rows."""
    grid = list(args.beta_grid or []) + list(args.beta or [])
    if not grid:
        raise ConfigError("sweep needs a nonempty --beta-grid or --beta")
    opts = _solver_options(args)
    frames = [
        functional_verification.sweepBeta(domain, p, grid, args.h, args.refine, opts)
        for domain in _require(args.domain, "--domain")
        for p in _require(args.p, "--p")
    ]
    df = pd.concat(frames, ignore_index=True)
    path = _write_frame(df, args.out, "sweep", args.format)
    for row in df[df["kind"] != "point"].itertuples(index=False):
        print(f"{row.domain} p={row.p:g} {row.kind}: slope={row.slope:.6g} gap={row.dirichlet_gap:.6g} target={row.target:.6g}")
    logger.info(f"Wrote {len(df)} sweep rows to {path}")
    points = df[df["kind"] == "point"]
    return EXIT_OK if bool(points["converged"].all()) else EXIT_NOT_CONVERGED


COMMANDS = {"mesh": cmd_mesh, "eig": cmd_eig, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    except ConfigError as e:
        print(f"robin-plaplacian: error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except ValueError as e:
        # configuration, domain and option errors all derive from ValueError
        print(f"robin-plaplacian: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        logger.error(f"Solver failed: {e}")
        return EXIT_NOT_CONVERGED


def run():
    sys.exit(main())
