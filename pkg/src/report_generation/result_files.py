"""
Result Files

Writes and reads the text outputs of a run:
- trajectory CSV per path:  t,x1..xn,z,p1..pn
- summary CSV:              path_id,u,iterations,converged,seconds (+ detail columns)
- scaling CSV:              dim,mean_s,std_s
- run_report.json:          arguments, per-path status, durations, overall success

Numbers are written with %.17g so every float round-trips exactly.
"""

import json
import logging
from datetime import datetime
from pathlib import Path

import numpy as np
import pandas as pd

from config.settings import RUN_REPORT_FILE
from src.geometry.manifolds import ManifoldModel
from src.solver.problem import PathSolution

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SUMMARY_COLUMNS = ["path_id", "u", "iterations", "converged", "seconds"]
SCALING_COLUMNS = ["dim", "mean_s", "std_s"]


def trajectory_frame(solution: PathSolution, manifold: ManifoldModel, raw: bool = False) -> pd.DataFrame:
    """
    Build the trajectory table.

    Internal order (raw) lists the goal first with t = j dt; the default
    forward order starts at the query point with t counting elapsed time.
    The goal row carries the zero costate either way.
    """
    states = np.asarray(solution.states, dtype=float)
    J, n = states.shape[0] - 1, states.shape[1]
    costates = np.vstack([np.zeros((1, n)), np.asarray(solution.costates, dtype=float)])
    heights = manifold.height(states)

    if not raw:
        states, costates, heights = states[::-1], costates[::-1], heights[::-1]

    frame = pd.DataFrame({"t": solution.dt * np.arange(J + 1)})
    for i in range(n):
        frame[f"x{i + 1}"] = states[:, i]
    frame["z"] = heights
    for i in range(n):
        frame[f"p{i + 1}"] = costates[:, i]
    return frame


def write_trajectory(path: Path, solution: PathSolution, manifold: ManifoldModel, raw: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(solution, manifold, raw=raw).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug(f"Saved trajectory: {path.name}")
    return path


def read_trajectory(path: Path):
    """
    Read a trajectory file.

    Returns:
        tuple (frame, states, costates) with arrays in file order
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    state_cols = [c for c in frame.columns if c.startswith("x")]
    costate_cols = [c for c in frame.columns if c.startswith("p")]
    return frame, frame[state_cols].to_numpy(), frame[costate_cols].to_numpy()


def write_summary(path: Path, rows: list) -> pd.DataFrame:
    """Write per-path rows; the required columns come first."""
    frame = pd.DataFrame(rows)
    extra = [c for c in frame.columns if c not in SUMMARY_COLUMNS]
    frame = frame[SUMMARY_COLUMNS + extra] if len(frame) else pd.DataFrame(columns=SUMMARY_COLUMNS)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saved summary: {path}")
    return frame


def scaling_table(trials: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation of wall time per dimension."""
    table = trials.groupby("dim")["seconds"].agg(mean_s="mean", std_s="std").reset_index()
    table["std_s"] = table["std_s"].fillna(0.0)
    return table[SCALING_COLUMNS]


def write_scaling(path: Path, table: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table[SCALING_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saved scaling table: {path}")
    return path


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    return str(value)


def write_run_report(out_dir: Path, command: str, arguments: dict, results: list,
                     success: bool, started: datetime, aggregate: dict = None) -> Path:
    """Save the execution report for one command next to its outputs."""
    finished = datetime.now()
    report = {
        "command": command,
        "arguments": arguments,
        "start_time": started.isoformat(),
        "end_time": finished.isoformat(),
        "total_duration": (finished - started).total_seconds(),
        "aggregate": aggregate or {},
        "results": results,
        "success": success,
    }
    report_file = Path(out_dir) / RUN_REPORT_FILE
    report_file.parent.mkdir(parents=True, exist_ok=True)
    with open(report_file, "w") as f:
        json.dump(report, f, indent=2, default=_jsonable)
    logger.info(f"   Report saved: {report_file}")
    return report_file
