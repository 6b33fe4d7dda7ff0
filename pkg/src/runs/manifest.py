"""
Run Manifests

Plain-text run descriptions, one `key = value` per line, `#` starts a comment:

    manifold = sinusoid:a=1
    speed    = const:c=1
    dim      = 2
    start    = -1,-1            # several points: -1,-1; 0.5,-0.2
    goal     = 1,1
    horizon  = 5                # optional, see default_horizon
    random_count = 20           # optional, starts drawn from [box_low, box_high]^n
    box_low  = -1
    box_high = 1
    max_iters = 40000           # any SolverConfig field

Unknown keys and malformed lines raise ManifestError with the line number.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.errors import InputDomainError, ManifestError, ValidationError
from src.geometry.manifolds import ManifoldModel, manifold_from_selector
from src.geometry.metric import manifold_arclength
from src.hamiltonian.speeds import SpeedModel, speed_from_selector
from src.solver.problem import SolverConfig, coerce_setting

logger = logging.getLogger(__name__)

SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
PROBLEM_KEYS = {"manifold", "speed", "dim", "start", "goal", "horizon"}
BATCH_KEYS = {"random_count", "box_low", "box_high", "out", "workers"}
KNOWN_KEYS = PROBLEM_KEYS | BATCH_KEYS | SOLVER_KEYS

HORIZON_FACTOR = 1.5
HORIZON_SAMPLES = 257


@dataclass
class RunManifest:
    """A parsed manifest. Solver keys are kept raw-but-typed in `solver`."""

    goal: np.ndarray
    dim: int
    manifold: str = "flat"
    speed: str = "const:c=1"
    starts: List[np.ndarray] = field(default_factory=list)
    horizon: Optional[float] = None
    random_count: int = 0
    box_low: Optional[np.ndarray] = None
    box_high: Optional[np.ndarray] = None
    out: Optional[str] = None
    workers: Optional[int] = None
    solver: dict = field(default_factory=dict)
    name: str = "run"

    def build_manifold(self) -> ManifoldModel:
        try:
            return manifold_from_selector(self.manifold, self.dim)
        except InputDomainError as e:
            raise ValidationError(str(e), key="manifold")

    def build_speed(self) -> SpeedModel:
        try:
            return speed_from_selector(self.speed)
        except InputDomainError as e:
            raise ValidationError(str(e), key="speed")

    def solver_config(self, base: SolverConfig, **flags) -> SolverConfig:
        """Precedence: base (defaults + YAML) < manifest keys < command-line flags."""
        return base.with_overrides(**self.solver).with_overrides(**flags).validate()

    def with_dim(self, dim: int) -> "RunManifest":
        """Apply a --dim override; single-value points and boxes are broadcast."""
        if dim == self.dim:
            return self

        def fit(point, key):
            if point.size == dim:
                return point
            if point.size == 1 or np.all(point == point[0]):
                return np.full(dim, float(point[0]))
            raise ValidationError(f"{key} has {point.size} coordinates, dim is {dim}", key=key)

        return dataclasses.replace(
            self,
            dim=dim,
            goal=fit(self.goal, "goal"),
            starts=[fit(s, "start") for s in self.starts],
            box_low=fit(self.box_low, "box_low"),
            box_high=fit(self.box_high, "box_high"),
        )

    def sample_starts(self, seed: int) -> List[np.ndarray]:
        """Explicit starts followed by random_count uniform draws from the box."""
        starts = [s.copy() for s in self.starts]
        if self.random_count > 0:
            rng = np.random.default_rng(seed)
            draws = rng.uniform(self.box_low, self.box_high, size=(self.random_count, self.dim))
            starts.extend(draws)
        return starts


def _points(text: str, key: str, line: int) -> List[np.ndarray]:
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            points.append(np.array([float(v) for v in chunk.split(",")], dtype=float))
        except ValueError:
            raise ManifestError(f"expected comma-separated numbers, got '{chunk}'", line=line, key=key)
    return points


def parse_manifest(text: str, name: str = "run") -> RunManifest:
    """Parse manifest text. Raises ManifestError on syntax, ValidationError on content."""
    raw = {}
    lines = {}
    for number, original in enumerate(text.splitlines(), start=1):
        content = original.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ManifestError("expected 'key = value'", line=number)
        if key not in KNOWN_KEYS:
            raise ManifestError("unknown key", line=number, key=key)
        if key in raw:
            raise ManifestError("duplicate key", line=number, key=key)
        raw[key] = value.strip()
        lines[key] = number

    if "goal" not in raw:
        raise ValidationError("manifest has no goal", key="goal")
    goals = _points(raw["goal"], "goal", lines["goal"])
    if len(goals) != 1:
        raise ValidationError("goal must be a single point", key="goal")
    goal = goals[0]

    try:
        dim = int(raw["dim"]) if "dim" in raw else goal.size
    except ValueError:
        raise ManifestError(f"dim must be an integer, got '{raw['dim']}'", line=lines["dim"], key="dim")
    if dim < 1:
        raise ValidationError(f"dim must be positive, got {dim}", key="dim")
    if goal.size != dim:
        raise ValidationError(f"goal has {goal.size} coordinates, dim is {dim}", key="goal")

    starts = _points(raw["start"], "start", lines["start"]) if "start" in raw else []
    for s in starts:
        if s.size != dim:
            raise ValidationError(f"start has {s.size} coordinates, dim is {dim}", key="start")

    def number(key, cast):
        try:
            value = float(raw[key])
        except ValueError:
            raise ManifestError(f"expected a number, got '{raw[key]}'", line=lines[key], key=key)
        if cast is int and not value.is_integer():
            raise ManifestError(f"expected a whole number, got '{raw[key]}'", line=lines[key], key=key)
        return cast(value)

    manifest = RunManifest(goal=goal, dim=dim, starts=starts, name=name)
    manifest.manifold = raw.get("manifold", manifest.manifold)
    manifest.speed = raw.get("speed", manifest.speed)
    if "horizon" in raw:
        manifest.horizon = number("horizon", float)
        if not manifest.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {manifest.horizon}", key="horizon")
    if "random_count" in raw:
        manifest.random_count = number("random_count", int)
        if manifest.random_count < 0:
            raise ValidationError("random_count must be non-negative", key="random_count")
    if "workers" in raw:
        manifest.workers = number("workers", int)
    manifest.out = raw.get("out")

    for key in ("box_low", "box_high"):
        if key in raw:
            values = _points(raw[key], key, lines[key])
            bound = values[0] if values else np.array([])
            if bound.size == 1:
                bound = np.full(dim, bound[0])
            if bound.size != dim:
                raise ValidationError(f"{key} has {bound.size} coordinates, dim is {dim}", key=key)
            setattr(manifest, key, bound)
    if manifest.box_low is None:
        manifest.box_low = np.full(dim, -1.0)
    if manifest.box_high is None:
        manifest.box_high = np.full(dim, 1.0)
    if np.any(manifest.box_high < manifest.box_low):
        raise ValidationError("box_high is below box_low", key="box_high")

    manifest.solver = {key: coerce_setting(key, raw[key]) for key in raw if key in SOLVER_KEYS}

    if not manifest.starts and manifest.random_count == 0:
        raise ValidationError("manifest has no start and no random_count", key="start")

    # catch selector errors at load time
    manifest.build_manifold()
    manifest.build_speed()
    return manifest


def load_manifest(path: Path) -> RunManifest:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"manifest not found: {path}", key="manifest")
    with open(path, "r") as f:
        return parse_manifest(f.read(), name=path.stem)


def default_horizon(manifold: ManifoldModel, speed: SpeedModel, start, goal, dt: float) -> float:
    """
    1.5 x (surface arc length of the straight segment) / (min sampled speed),
    rounded up to a multiple of dt.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    s = np.linspace(0.0, 1.0, HORIZON_SAMPLES)[:, None]
    segment = goal + s * (start - goal)
    length = manifold_arclength(manifold, segment)
    v_min = float(np.min(speed.speed(segment, 0.0)))
    horizon = HORIZON_FACTOR * length / v_min
    return max(dt, math.ceil(horizon / dt - 1e-9) * dt)
