"""
Sphere Search

Brute-force evaluation of the Hamiltonian as an infimum over unit directions a:

    min_a  v <p, a> / sqrt(1 + <grad M, a>^2) + 1  =  1 - v sqrt(p^T A p)

and the closed-form minimizer

    a* = -[(1 + |g|^2) p - (p.g) g] / sqrt(|p|^2 (1 + |g|^2)^2 - (p.g)^2 (2 + |g|^2))
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import InputDomainError, UndefinedDirectionError
from src.geometry.manifolds import ManifoldModel, as_points
from src.hamiltonian.speeds import SpeedModel

logger = logging.getLogger(__name__)

POLISH_STEPS = 50


@dataclass(frozen=True)
class SphereSample:
    """Unit directions in R^n, shape (count, n)."""

    directions: np.ndarray

    @property
    def count(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


def sphere_samples(dim: int, count: int, seed: int = 0) -> SphereSample:
    """
    2-D: equally spaced angles. 3-D: Fibonacci lattice.
    Higher dimensions: normalized Gaussian draws.
    """
    if dim < 1 or count < 1:
        raise InputDomainError(f"need dim >= 1 and count >= 1, got dim={dim}, count={count}")

    if dim == 1:
        directions = np.array([[1.0], [-1.0]])
    elif dim == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        directions = np.column_stack([np.cos(theta), np.sin(theta)])
    elif dim == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5.0 ** 0.5) * i
        directions = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    else:
        draws = np.random.default_rng(seed).standard_normal((count, dim))
        directions = draws / np.linalg.norm(draws, axis=1, keepdims=True)
    return SphereSample(directions=directions)


def direction_objective(a, p, gamma) -> np.ndarray:
    """<p, a> / sqrt(1 + <gamma, a>^2) for directions a of shape (..., n)."""
    pa = a @ p
    ga = a @ gamma
    return pa / np.sqrt(1.0 + ga * ga)


def _direction_gradient(a, p, gamma) -> np.ndarray:
    pa = a @ p
    ga = a @ gamma
    q = 1.0 + ga * ga
    return p / np.sqrt(q) - pa * ga * gamma / q ** 1.5


def _polish(a, p, gamma, steps: int = POLISH_STEPS) -> np.ndarray:
    """Projected gradient descent on the sphere with step halving."""
    scale = max(float(np.linalg.norm(p)), 1e-12)
    lr = 0.1 / scale
    best = direction_objective(a, p, gamma)
    for _ in range(steps):
        g = _direction_gradient(a, p, gamma)
        g = g - (g @ a) * a
        candidate = a - lr * g
        candidate = candidate / np.linalg.norm(candidate)
        value = direction_objective(candidate, p, gamma)
        if value < best:
            a, best = candidate, value
            lr *= 1.5
        else:
            lr *= 0.5
    return a


def sphere_min_objective(x, p, m: ManifoldModel, v: SpeedModel, t, samples: SphereSample, polish: bool = True):
    """
    Minimize v q <a, p> + 1 over the sampled directions, then polish.

    Returns:
        tuple (min_value, argmin direction, values at every sample)
    """
    if samples.count == 0:
        raise InputDomainError("sphere sample set is empty")
    x = as_points(x, m.dim)
    p = np.asarray(p, dtype=float)
    gamma = m.grad(x)
    speed = float(v.speed(x, t))

    values = speed * direction_objective(samples.directions, p, gamma) + 1.0
    best = int(np.argmin(values))
    a = samples.directions[best]
    if polish and np.any(p != 0.0):
        a = _polish(a, p, gamma)
    min_value = min(float(values[best]), speed * float(direction_objective(a, p, gamma)) + 1.0)
    return min_value, a, values


def closed_form_minimizer(x, p, m: ManifoldModel) -> np.ndarray:
    """Minus-sign minimizer of <p, a> / sqrt(1 + <grad M(x), a>^2) on the unit sphere."""
    x = as_points(x, m.dim)
    p = np.asarray(p, dtype=float)
    if not np.any(p != 0.0):
        raise UndefinedDirectionError("minimizing direction is undefined for p = 0")

    gamma = m.grad(x)
    gg = float(gamma @ gamma)
    pg = float(p @ gamma)
    s = 1.0 + gg
    numerator = s * p - pg * gamma
    denominator = np.sqrt(float(p @ p) * s * s - pg * pg * (2.0 + gg))
    return -numerator / denominator


def angular_distance(a, b) -> float:
    """Angle between two unit vectors."""
    cos = float(np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0))
    return float(np.arccos(cos))
