"""
Run Commands

solve    solve every start of a manifest, one after another
batch    same paths fanned out to a worker pool, with aggregate statistics
scaling  timing trials on the Gaussian bump across dimensions
verify   oracle suites with a pass/fail table

Each command writes its files into one output directory and returns a
ResultRecord; the caller decides the exit status from `success`.
"""

import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from config.settings import SCALING_FILE, SUMMARY_FILE, TRAJECTORY_PATTERN
from src.errors import InputDomainError, PathPlanError, ValidationError
from src.geometry.manifolds import GaussianManifold, ManifoldModel, manifold_from_selector
from src.hamiltonian.speeds import ConstantSpeed, SpeedModel
from src.oracle.suites import VerifySettings, run_suites
from src.report_generation.generate_graphs import plot_coordinate_traces, plot_paths_contour, plot_scaling
from src.report_generation.result_files import (
    scaling_table,
    trajectory_frame,
    write_scaling,
    write_summary,
    write_trajectory,
)
from src.runs.manifest import RunManifest, default_horizon
from src.solver.pdhg import solve_path
from src.solver.problem import ProblemSpec, SolverConfig

logger = logging.getLogger(__name__)

SCALING_TRIALS_FILE = "scaling_trials.csv"
VERIFY_FILE = "verify.csv"


@dataclass
class PathJob:
    path_id: int
    start: np.ndarray
    goal: np.ndarray
    horizon: float
    manifold: ManifoldModel
    speed: SpeedModel
    config: SolverConfig


@dataclass
class ResultRecord:
    """Per-path (or per-suite) rows plus aggregate statistics of one command."""

    command: str
    rows: list
    out_dir: Path
    success: bool
    aggregate: dict = field(default_factory=dict)
    solutions: dict = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)


def path_side(path, start, goal) -> str:
    """Which side of the start-goal line a 2-D path passes on."""
    d = np.asarray(goal, dtype=float) - np.asarray(start, dtype=float)
    rel = np.asarray(path, dtype=float) - np.asarray(start, dtype=float)
    area = float(np.mean(d[0] * rel[:, 1] - d[1] * rel[:, 0]))
    if area > 1e-9:
        return "left"
    if area < -1e-9:
        return "right"
    return "straight"


def solve_job(job: PathJob):
    """Solve one path. Returns (row, solution); solution is None if the solve failed."""
    row = {"path_id": job.path_id, "u": float("nan"), "iterations": 0, "converged": False, "seconds": 0.0}
    try:
        spec = ProblemSpec(start=job.start, goal=job.goal, horizon=job.horizon,
                           manifold=job.manifold, speed=job.speed)
        solution = solve_path(spec, job.config, stream=job.path_id)
    except PathPlanError as e:
        logger.error(f"❌ Path {job.path_id} failed: {e}")
        row["error"] = str(e)
        return row, None

    row.update({
        "u": solution.value,
        "iterations": solution.iterations,
        "converged": solution.converged,
        "seconds": solution.wall_time,
        "u_no_indicator": solution.value_no_indicator,
        "cpu_seconds": solution.cpu_time,
        "final_change": solution.final_change,
        "horizon": solution.horizon,
        "tau": solution.tau,
        "error": "",
    })
    if job.start.size == 2:
        row["side"] = path_side(solution.path, job.start, job.goal)
    status = "✅" if solution.converged else "⚠️"
    logger.info(f"{status} Path {job.path_id}: u={solution.value:.5f} "
                f"iterations={solution.iterations} ({solution.wall_time:.2f}s)")
    return row, solution


def build_jobs(manifest: RunManifest, config: SolverConfig, horizon: Optional[float] = None) -> List[PathJob]:
    """One job per start; the horizon is flag > manifest > default heuristic."""
    manifold = manifest.build_manifold()
    speed = manifest.build_speed()
    horizon = horizon if horizon is not None else manifest.horizon
    jobs = []
    for path_id, start in enumerate(manifest.sample_starts(config.seed)):
        path_horizon = horizon
        if path_horizon is None:
            path_horizon = default_horizon(manifold, speed, start, manifest.goal, config.dt)
            logger.warning(f"No horizon given for path {path_id}; using default {path_horizon:g}")
        jobs.append(PathJob(path_id=path_id, start=np.asarray(start, dtype=float), goal=manifest.goal,
                            horizon=path_horizon, manifold=manifold, speed=speed, config=config))
    return jobs


def _run_paths(command: str, jobs: List[PathJob], out_dir: Path, workers: int,
               raw: bool, plot: bool) -> ResultRecord:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    solutions = {}

    def collect(result):
        row, solution = result
        if solution is not None:
            job = jobs[row["path_id"]]
            trajectory_file = out_dir / TRAJECTORY_PATTERN.format(path_id=row["path_id"])
            write_trajectory(trajectory_file, solution, job.manifold, raw=raw)
            row["trajectory"] = trajectory_file.name
            solutions[row["path_id"]] = solution
        rows.append(row)

    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        for job in jobs:
            collect(solve_job(job))
    else:
        logger.info(f"   Workers: {workers}")
        with Pool(processes=workers) as pool:
            for result in pool.imap(solve_job, jobs):
                collect(result)

    rows.sort(key=lambda r: r["path_id"])
    write_summary(out_dir / SUMMARY_FILE, rows)
    success = bool(rows) and all(r["converged"] for r in rows)
    record = ResultRecord(command=command, rows=rows, out_dir=out_dir, success=success, solutions=solutions)
    record.aggregate = aggregate_paths(rows)

    if plot and solutions:
        _plot_paths(jobs, solutions, out_dir)
    return record


def aggregate_paths(rows: list) -> dict:
    frame = pd.DataFrame(rows)
    aggregate = {
        "paths": len(frame),
        "converged": int(frame["converged"].sum()) if len(frame) else 0,
        "mean_iterations": float(frame["iterations"].mean()) if len(frame) else float("nan"),
        "mean_seconds": float(frame["seconds"].mean()) if len(frame) else float("nan"),
    }
    if "side" in frame.columns:
        counts = frame["side"].value_counts()
        aggregate["left"] = int(counts.get("left", 0))
        aggregate["right"] = int(counts.get("right", 0))
    return aggregate


def _plot_paths(jobs: List[PathJob], solutions: dict, out_dir: Path):
    first = jobs[0]
    if first.manifold.dim == 2:
        ids = sorted(solutions)
        plot_paths_contour(
            first.manifold,
            [solutions[i].path for i in ids],
            first.goal,
            out_dir / "paths.png",
            title=f"Optimal paths on {first.manifold.selector}",
            converged=[solutions[i].converged for i in ids],
        )
        return
    for path_id, solution in solutions.items():
        plot_coordinate_traces(trajectory_frame(solution, jobs[path_id].manifold),
                               solution.value, out_dir / f"trajectory_{path_id:03d}.png")


def _log_banner(title: str, details: dict):
    logger.info("=" * 60)
    logger.info(title)
    for key, value in details.items():
        logger.info(f"   {key}: {value}")
    logger.info("=" * 60)


def _log_summary(record: ResultRecord):
    logger.info("\n" + "=" * 60)
    logger.info(f"📊 {record.command.capitalize()} Summary")
    logger.info("=" * 60)
    for key, value in record.aggregate.items():
        logger.info(f"   {key}: {value}")
    logger.info(f"   Overall Status: {'✅ SUCCESS' if record.success else '❌ FAILED'}")


def cmd_solve(manifest: RunManifest, config: SolverConfig, out_dir: Path, horizon: float = None,
              raw: bool = False, plot: bool = False) -> ResultRecord:
    """Solve every start of the manifest in this process."""
    jobs = build_jobs(manifest, config, horizon)
    _log_banner("🚀 Solve", {"Manifest": manifest.name, "Manifold": manifest.manifold,
                            "Speed": manifest.speed, "Paths": len(jobs), "Output": out_dir})
    record = _run_paths("solve", jobs, out_dir, workers=1, raw=raw, plot=plot)
    _log_summary(record)
    return record


def cmd_batch(manifest: RunManifest, config: SolverConfig, out_dir: Path, workers: int,
              horizon: float = None, raw: bool = False, plot: bool = False) -> ResultRecord:
    """
    Solve the manifest's starts (explicit plus random_count draws) across a
    worker pool. Path i always uses random stream (seed, i), so results do not
    depend on the number of workers.
    """
    jobs = build_jobs(manifest, config, horizon)
    if not jobs:
        raise ValidationError("batch needs at least one path", key="random_count")
    _log_banner("🚀 Batch", {"Manifest": manifest.name, "Manifold": manifest.manifold,
                            "Speed": manifest.speed, "Paths": len(jobs), "Output": out_dir})
    record = _run_paths("batch", jobs, out_dir, workers=workers, raw=raw, plot=plot)
    _log_summary(record)
    return record


def scaling_problem(dim: int, template: Optional[RunManifest] = None):
    """Start (-0.9, -1, ..., -1), goal (1, ..., 1) on the Gaussian bump (or the template's surface)."""
    start = -np.ones(dim)
    start[0] = -0.9
    goal = np.ones(dim)
    if template is None:
        return start, goal, GaussianManifold(dim=dim, amplitude=2.0), ConstantSpeed()
    try:
        manifold = manifold_from_selector(template.manifold, dim)
    except InputDomainError as e:
        raise ValidationError(str(e), key="manifold")
    return start, goal, manifold, template.build_speed()


def cmd_scaling(dims: List[int], trials: int, config: SolverConfig, out_dir: Path,
                template: Optional[RunManifest] = None, horizon: float = None,
                plot: bool = False) -> ResultRecord:
    """
    Time `trials` solves per dimension, each with its own random initialization.
    Trials run one at a time so the timings are not skewed by sharing cores.
    """
    if not dims:
        raise ValidationError("no dimensions given", key="dims")
    if trials < 1:
        raise ValidationError("need at least one trial", key="trials")
    _log_banner("🚀 Scaling", {"Dimensions": dims, "Trials": trials, "Output": out_dir})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for dim in dims:
        start, goal, manifold, speed = scaling_problem(dim, template)
        path_horizon = horizon if horizon is not None else (template.horizon if template else None)
        if path_horizon is None:
            path_horizon = default_horizon(manifold, speed, start, goal, config.dt)
        logger.info(f"\n📋 Dimension {dim} (horizon {path_horizon:g})")
        logger.info("-" * 40)

        for trial in range(trials):
            row, solution = solve_job(PathJob(path_id=trial, start=start, goal=goal, horizon=path_horizon,
                                              manifold=manifold, speed=speed, config=config))
            row = {"dim": dim, "trial": trial, **{k: v for k, v in row.items() if k != "path_id"}}
            rows.append(row)

    trials_frame = pd.DataFrame(rows)
    trials_frame.to_csv(out_dir / SCALING_TRIALS_FILE, index=False, float_format="%.17g")
    table = scaling_table(trials_frame)
    write_scaling(out_dir / SCALING_FILE, table)
    if plot:
        plot_scaling(table, out_dir / "scaling.png")

    success = all(r["converged"] for r in rows)
    record = ResultRecord(command="scaling", rows=rows, out_dir=out_dir, success=success)
    record.aggregate = {
        "runs": len(rows),
        "converged": int(trials_frame["converged"].sum()),
        "mean_seconds_by_dim": {int(d): round(float(s), 4) for d, s in zip(table["dim"], table["mean_s"])},
    }
    _log_summary(record)
    return record


def cmd_verify(suites: Optional[List[str]], settings: VerifySettings, out_dir: Path,
               hamiltonian_fn=None) -> ResultRecord:
    """Run the oracle suites and write a pass/fail table."""
    _log_banner("🚀 Verify", {"Suites": suites or "all", "Output": out_dir})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    kwargs = {} if hamiltonian_fn is None else {"hamiltonian_fn": hamiltonian_fn}
    results = run_suites(suites, settings, **kwargs)
    rows = [r.as_row() for r in results]
    table = pd.DataFrame(rows)
    table.to_csv(out_dir / VERIFY_FILE, index=False)
    logger.info("\n" + table.drop(columns=["detail"]).to_string(index=False))

    record = ResultRecord(command="verify", rows=rows, out_dir=out_dir,
                          success=all(r.passed for r in results))
    record.aggregate = {"suites": len(rows), "passed": sum(r.passed for r in results)}
    _log_summary(record)
    return record
