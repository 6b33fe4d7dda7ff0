#!/usr/bin/env python3
"""
Manifold Path Planner - Command Line Runner

Computes minimal-time paths on graphs of functions z = M(x) without a grid:
the value at a point comes from a primal-dual splitting of the discretized
Hopf-Lax saddle problem along a single trajectory.

Commands:
1. solve    solve the start point(s) of a manifest
2. batch    solve many start points on a worker pool
3. scaling  time the Gaussian-bump problem across dimensions
4. verify   run the oracle suites

Usage:
    python src/main.py solve config/manifests/sinusoid_corner.txt
    python src/main.py batch --experiment sinusoid --workers 8 --plot
    python src/main.py scaling --dims 10-30:5 --trials 10
    python src/main.py verify --suite gradients
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import (  # noqa: E402
    CONFIG_DIR,
    DEFAULT_WORKERS,
    LOG_LEVEL,
    LOG_TO_FILE,
    LOGS_DIR,
    OUTPUT_DIR,
)
from src.errors import PathPlanError, ValidationError  # noqa: E402
from src.oracle.suites import SUITES, VerifySettings  # noqa: E402
from src.report_generation.result_files import write_run_report  # noqa: E402
from src.runs.commands import cmd_batch, cmd_scaling, cmd_solve, cmd_verify  # noqa: E402
from src.runs.manifest import load_manifest  # noqa: E402
from src.solver.problem import load_solver_config, load_yaml_section  # noqa: E402

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False):
    """Console logging plus a timestamped log file under LOGS_DIR."""
    handlers = [logging.StreamHandler()]
    if LOG_TO_FILE:
        LOGS_DIR.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(LOGS_DIR / f"pathplan_{datetime.now():%Y%m%d_%H%M%S}.log"))

    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, LOG_LEVEL, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def parse_dims(text: str) -> list:
    """'10,15,20', '10-30' or '10-30:5' (inclusive ranges)."""
    dims = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                span, _, step = part.partition(":")
                lo, hi = span.split("-", 1)
                dims.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
            else:
                dims.append(int(part))
        except ValueError:
            raise ValidationError(f"cannot parse dimensions '{text}'", key="dims")
    if not dims or min(dims) < 1:
        raise ValidationError(f"dimensions must be positive integers, got '{text}'", key="dims")
    return dims


def resolve_manifest_path(args) -> Path:
    """Positional manifest path, or the file registered for --experiment."""
    if getattr(args, "experiment", None):
        experiments = load_yaml_section("experiments")
        if args.experiment not in experiments:
            raise ValidationError(
                f"unknown experiment '{args.experiment}' (choose from {', '.join(sorted(experiments))})",
                key="experiment",
            )
        return CONFIG_DIR / experiments[args.experiment]
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    raise ValidationError("give a manifest file or --experiment", key="manifest")


def output_dir(args, command: str, name: str, manifest_out: str = None) -> Path:
    if args.out:
        return Path(args.out)
    if manifest_out:
        return Path(manifest_out)
    return OUTPUT_DIR / f"{command}_{name}_{datetime.now():%Y%m%d_%H%M%S}"


def solver_flags(args) -> dict:
    return {
        "dt": args.dt,
        "tol": args.tol,
        "max_iters": args.max_iters,
        "tau": args.tau,
        "seed": args.seed,
    }


def run_command(args) -> bool:
    """Dispatch one subcommand and save its run report. Returns overall success."""
    started = datetime.now()
    base = load_solver_config()

    if args.command in ("solve", "batch"):
        manifest = load_manifest(resolve_manifest_path(args))
        if args.dim is not None:
            manifest = manifest.with_dim(args.dim)
        config = manifest.solver_config(base, **solver_flags(args))
        out = output_dir(args, args.command, manifest.name, manifest.out)
        if args.command == "solve":
            record = cmd_solve(manifest, config, out, horizon=args.horizon, raw=args.raw, plot=args.plot)
        else:
            workers = args.workers or manifest.workers or DEFAULT_WORKERS
            record = cmd_batch(manifest, config, out, workers=workers, horizon=args.horizon,
                               raw=args.raw, plot=args.plot)

    elif args.command == "scaling":
        template = load_manifest(Path(args.manifest)) if args.manifest else None
        config = (template.solver_config(base, **solver_flags(args)) if template
                  else base.with_overrides(**solver_flags(args)).validate())
        out = output_dir(args, "scaling", template.name if template else "gaussian")
        record = cmd_scaling(parse_dims(args.dims), args.trials, config, out, template=template,
                             horizon=args.horizon, plot=args.plot)

    else:
        values = load_yaml_section("verify")
        if args.seed is not None:
            values["seed"] = args.seed
        settings = VerifySettings.from_mapping(values)
        out = output_dir(args, "verify", "suites")
        record = cmd_verify(args.suite, settings, out)

    arguments = {k: v for k, v in vars(args).items() if v is not None}
    write_run_report(record.out_dir, record.command, arguments, record.rows, record.success,
                     started, aggregate=record.aggregate)
    return record.success


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Grid-free minimal-time path planning on graphs of functions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python src/main.py solve config/manifests/flat_10d.txt
    python src/main.py solve --experiment gaussian_25d --plot
    python src/main.py batch --experiment gaussian_hill --workers 4
    python src/main.py scaling --dims 10-30:5 --trials 3
    python src/main.py verify --suite sphere --suite prox
        """,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log per-iteration progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--dt", type=float, help="Time step (J = ceil(horizon / dt))")
        p.add_argument("--horizon", type=float, help="Time horizon; overrides the manifest")
        p.add_argument("--seed", type=int, help="Random seed")
        p.add_argument("--tol", type=float, help="Convergence tolerance on the max-norm change")
        p.add_argument("--max-iters", type=int, dest="max_iters", help="Iteration cap")
        p.add_argument("--tau", type=float, help="Primal step; default from the step-size rule")
        p.add_argument("--out", help="Output directory")
        p.add_argument("--plot", action="store_true", help="Save static figures")

    for name, help_text in (("solve", "Solve the manifest's start points"),
                            ("batch", "Solve many start points in parallel")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("manifest", nargs="?", help="Manifest file")
        p.add_argument("--experiment", help="Preset from config/solver.yaml")
        p.add_argument("--dim", type=int, help="Override the problem dimension")
        p.add_argument("--raw", action="store_true", help="Write trajectories in internal (goal-first) order")
        add_solver_flags(p)
        if name == "batch":
            p.add_argument("--workers", type=int, help="Worker processes (default: available CPUs)")

    p = sub.add_parser("scaling", help="Time the Gaussian-bump problem across dimensions")
    p.add_argument("--dims", default="10-30", help="e.g. 10,20,30 or 10-30:5")
    p.add_argument("--trials", type=int, default=10, help="Trials per dimension")
    p.add_argument("--manifest", help="Template manifest (manifold, speed, solver keys)")
    add_solver_flags(p)

    p = sub.add_parser("verify", help="Run the oracle suites")
    p.add_argument("--suite", action="append", choices=list(SUITES), help="Run specific suite(s) only")
    p.add_argument("--seed", type=int, help="Random seed for the instances")
    p.add_argument("--out", help="Output directory")
    return parser


def main(argv=None):
    """Main entry point with CLI argument parsing."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        success = run_command(args)
    except PathPlanError as e:
        logger.error(f"❌ {e}")
        sys.exit(2)

    # Exit with appropriate code
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
