"""
Exact Reference Values

Closed-form answers for the flat, constant-speed case, and the geometric
checks the solver output is scored with.
"""

import numpy as np

from src.errors import InputDomainError
from src.geometry.manifolds import ManifoldModel
from src.geometry.metric import manifold_arclength


def flat_exact_value(x, goal, v0: float = 1.0) -> float:
    """|x - goal| / v0."""
    if not v0 > 0:
        raise InputDomainError(f"speed must be positive, got {v0}")
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(goal, dtype=float))) / v0


def max_perpendicular_deviation(path, a, b) -> float:
    """Largest distance of the path points from the segment a-b."""
    path = np.asarray(path, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    direction = b - a
    length2 = float(direction @ direction)
    if length2 == 0.0:
        return float(np.max(np.linalg.norm(path - a, axis=1)))
    s = np.clip((path - a) @ direction / length2, 0.0, 1.0)
    nearest = a + s[:, None] * direction
    return float(np.max(np.linalg.norm(path - nearest, axis=1)))


def straight_line_deviation(path) -> np.ndarray:
    """Per-coordinate max |x_j - interpolant| against the straight line between the path's endpoints."""
    path = np.asarray(path, dtype=float)
    s = np.linspace(0.0, 1.0, path.shape[0])[:, None]
    line = path[0] + s * (path[-1] - path[0])
    return np.max(np.abs(path - line), axis=0)


def arclength_gap(m: ManifoldModel, path, value: float) -> float:
    """|value - surface arc length of the path|; a unit-speed path takes time equal to its length."""
    return abs(value - manifold_arclength(m, path))
