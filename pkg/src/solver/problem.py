"""
Solver Data Types

ProblemSpec       start/goal/horizon plus the surface and speed models
SolverConfig      step sizes, schedules, tolerances (defaults from config/solver.yaml)
TrajectoryIterate one PDHG iterate: states, costates, transformed costates, extrapolation
PathSolution      value, trajectories and convergence metadata of a solve
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from config.settings import SOLVER_CONFIG_FILE
from src.errors import ValidationError
from src.geometry.manifolds import ManifoldModel
from src.hamiltonian.speeds import SpeedModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemSpec:
    """Travel from `start` to `goal` on the graph of `manifold` within `horizon`."""

    start: np.ndarray
    goal: np.ndarray
    horizon: float
    manifold: ManifoldModel
    speed: SpeedModel

    def __post_init__(self):
        start = np.asarray(self.start, dtype=float).reshape(-1)
        goal = np.asarray(self.goal, dtype=float).reshape(-1)
        n = self.manifold.dim
        if start.shape != (n,):
            raise ValidationError(f"start has {start.size} coordinates, manifold has dim {n}", key="start")
        if goal.shape != (n,):
            raise ValidationError(f"goal has {goal.size} coordinates, manifold has dim {n}", key="goal")
        if not (np.all(np.isfinite(start)) and np.all(np.isfinite(goal))):
            raise ValidationError("start and goal must be finite", key="start")
        if not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}", key="horizon")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dim(self) -> int:
        return self.manifold.dim

    @property
    def is_trivial(self) -> bool:
        return bool(np.array_equal(self.start, self.goal))

    def straight_line_bound(self, samples: int = 257) -> float:
        """|start - goal| / max speed sampled along the segment."""
        s = np.linspace(0.0, 1.0, samples)[:, None]
        segment = self.goal + s * (self.start - self.goal)
        v_max = float(np.max(self.speed.speed(segment, 0.0)))
        return float(np.linalg.norm(self.start - self.goal)) / v_max


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the splitting iteration."""

    dt: float = 0.1
    time_steps: Optional[int] = None
    sigma: float = 1.0
    tau: Optional[float] = None
    tau_safety: float = 0.9
    kappa: float = 1.0
    max_iters: int = 40000
    tol: float = 1e-3
    stage_switch: int = 2000
    eta0: float = 0.025
    sharpness0: float = 50.0
    sharpness_step: float = 50.0
    sharpness_max: float = 5000.0
    anneal_period: int = 1000
    gd_steps: int = 1
    seed: int = 0
    noise_std: float = 0.1
    time_reversal: bool = True
    goal_snap: bool = True
    log_every: int = 1000

    def validate(self) -> "SolverConfig":
        checks = [
            ("dt", self.dt > 0),
            ("time_steps", self.time_steps is None or self.time_steps >= 1),
            ("sigma", self.sigma > 0),
            ("tau", self.tau is None or self.tau > 0),
            ("tau_safety", 0 < self.tau_safety <= 1),
            ("kappa", 0 <= self.kappa <= 1),
            ("max_iters", self.max_iters >= 0),
            ("tol", self.tol > 0),
            ("stage_switch", self.stage_switch >= 0),
            ("eta0", self.eta0 > 0),
            ("sharpness0", self.sharpness0 > 0),
            ("sharpness_step", self.sharpness_step >= 0),
            ("sharpness_max", self.sharpness_max >= self.sharpness0),
            ("anneal_period", self.anneal_period >= 1),
            ("gd_steps", self.gd_steps >= 1),
            ("noise_std", self.noise_std >= 0),
            ("log_every", self.log_every >= 1),
        ]
        for key, ok in checks:
            if not ok:
                raise ValidationError(f"invalid solver setting {key}={getattr(self, key)!r}", key=key)
        return self

    def steps_for(self, horizon: float) -> int:
        """J: explicit time_steps, or the number of dt steps covering the horizon."""
        if self.time_steps is not None:
            return int(self.time_steps)
        return max(1, math.ceil(horizon / self.dt - 1e-9))

    def dt_for(self, horizon: float) -> float:
        return horizon / self.steps_for(horizon)

    def with_overrides(self, **overrides) -> "SolverConfig":
        """Copy with the non-None overrides applied."""
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            key = sorted(unknown)[0]
            raise ValidationError(f"unknown solver setting '{key}'", key=key)
        values = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **values)


_INT_FIELDS = {"time_steps", "max_iters", "stage_switch", "anneal_period", "gd_steps", "seed", "log_every"}
_BOOL_FIELDS = {"time_reversal", "goal_snap"}


def coerce_setting(key: str, value):
    """Convert a raw (YAML or manifest) value to the type of a SolverConfig field."""
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "null", "none", "auto")):
        return None
    if key in _BOOL_FIELDS:
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"invalid value for {key}: {value!r}", key=key)
    if key in _INT_FIELDS:
        if not number.is_integer():
            raise ValidationError(f"{key} must be a whole number, got {value!r}", key=key)
        return int(number)
    return number


def load_solver_config(config_file: Path = None) -> SolverConfig:
    """
    Load solver defaults from the `solver:` section of the YAML config.

    Falls back to the dataclass defaults when the file does not exist.
    """
    if config_file is None:
        config_file = SOLVER_CONFIG_FILE

    if not Path(config_file).exists():
        logger.debug(f"No solver config at {config_file}, using defaults")
        return SolverConfig()

    with open(config_file, "r") as f:
        raw = yaml.safe_load(f) or {}

    section = raw.get("solver", {}) or {}
    values = {key: coerce_setting(key, value) for key, value in section.items()}
    return SolverConfig().with_overrides(**values).validate()


def load_yaml_section(name: str, config_file: Path = None) -> dict:
    """Return one top-level section of the YAML config (empty if absent)."""
    if config_file is None:
        config_file = SOLVER_CONFIG_FILE
    if not Path(config_file).exists():
        return {}
    with open(config_file, "r") as f:
        raw = yaml.safe_load(f) or {}
    return raw.get(name, {}) or {}


@dataclass
class TrajectoryIterate:
    """
    States x_0..x_J (J+1, n), costates p_1..p_J (J, n), transformed costates
    w_j = L(x_j)^T p_j (J, n) and extrapolated states z (J+1, n).
    x_0 is the goal and x_J the query point.
    """

    x: np.ndarray
    p: np.ndarray
    w: np.ndarray
    z: np.ndarray

    @property
    def steps(self) -> int:
        return self.p.shape[0]

    def copy(self) -> "TrajectoryIterate":
        return TrajectoryIterate(x=self.x.copy(), p=self.p.copy(), w=self.w.copy(), z=self.z.copy())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in (self.x, self.p, self.w, self.z))


@dataclass
class PathSolution:
    """Result of one path solve. States are in internal order (goal first)."""

    value: float
    states: np.ndarray
    costates: np.ndarray
    converged: bool
    iterations: int
    final_change: float
    wall_time: float
    cpu_time: float = 0.0
    value_no_indicator: float = float("nan")
    tau: float = float("nan")
    dt: float = float("nan")
    horizon: float = float("nan")
    change_history: list = field(default_factory=list)

    @property
    def path(self) -> np.ndarray:
        """States from the query point to the goal (time-forward order)."""
        return self.states[::-1]

    def summary(self) -> dict:
        return {
            "u": self.value,
            "u_no_indicator": self.value_no_indicator,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_change": self.final_change,
            "seconds": self.wall_time,
            "cpu_seconds": self.cpu_time,
            "tau": self.tau,
            "dt": self.dt,
        }
