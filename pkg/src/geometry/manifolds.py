"""
Manifold Models

Surfaces given as graphs z = M(x) over R^n:
- flat:      M = 0
- sinusoid:  M = a sin(pi x1) cos(pi x2)            (2-D only)
- gaussian:  M = amp exp(-|x - c|^2)                (any dimension)
- generic:   user height callback, derivatives by central differences

Every evaluator accepts a single point of shape (n,) or a stack (..., n).
Models are immutable and safe to share between concurrent solves.
"""

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.errors import InputDomainError

# Step sizes for the generic (finite-difference) kind
FD_GRADIENT_STEP = 1e-5
FD_HESSIAN_STEP = 1e-4


def as_points(x, dim: int) -> np.ndarray:
    """Convert x to a float array whose last axis has length dim."""
    points = np.asarray(x, dtype=float)
    if points.ndim == 0 or points.shape[-1] != dim:
        raise InputDomainError(f"expected points with last axis of length {dim}, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise InputDomainError("points must be finite")
    return points


class ManifoldModel(ABC):
    """Height function M: R^n -> R with gradient and Hessian."""

    kind: str = "abstract"
    dim: int

    @abstractmethod
    def height(self, x) -> np.ndarray:
        """M(x), shape (...)."""

    @abstractmethod
    def grad(self, x) -> np.ndarray:
        """grad M(x), shape (..., n)."""

    @abstractmethod
    def hess(self, x) -> np.ndarray:
        """Hessian of M at x, shape (..., n, n)."""

    def gradient_bound_sq(self) -> Optional[float]:
        """Analytic sup of |grad M|^2, or None when unknown."""
        return None

    @property
    def selector(self) -> str:
        return self.kind


@dataclass(frozen=True)
class FlatManifold(ManifoldModel):
    dim: int
    kind: str = field(default="flat", init=False)

    def height(self, x):
        points = as_points(x, self.dim)
        return np.zeros(points.shape[:-1])

    def grad(self, x):
        return np.zeros_like(as_points(x, self.dim))

    def hess(self, x):
        points = as_points(x, self.dim)
        return np.zeros(points.shape + (self.dim,))

    def gradient_bound_sq(self):
        return 0.0


@dataclass(frozen=True)
class SinusoidManifold(ManifoldModel):
    """M(x, y) = a sin(pi x) cos(pi y)."""

    a: float = 1.0
    dim: int = field(default=2, init=False)
    kind: str = field(default="sinusoid", init=False)

    def height(self, x):
        points = as_points(x, 2)
        return self.a * np.sin(np.pi * points[..., 0]) * np.cos(np.pi * points[..., 1])

    def grad(self, x):
        points = as_points(x, 2)
        px, py = np.pi * points[..., 0], np.pi * points[..., 1]
        k = self.a * np.pi
        return np.stack([k * np.cos(px) * np.cos(py), -k * np.sin(px) * np.sin(py)], axis=-1)

    def hess(self, x):
        points = as_points(x, 2)
        px, py = np.pi * points[..., 0], np.pi * points[..., 1]
        k = self.a * np.pi ** 2
        diag = -k * np.sin(px) * np.cos(py)
        off = -k * np.cos(px) * np.sin(py)
        row0 = np.stack([diag, off], axis=-1)
        row1 = np.stack([off, diag], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def gradient_bound_sq(self):
        # |grad M|^2 = a^2 pi^2 (cos^2(pi x) cos^2(pi y) + sin^2(pi x) sin^2(pi y)) <= a^2 pi^2
        return (self.a * np.pi) ** 2

    @property
    def selector(self):
        return f"sinusoid:a={self.a!r}"


@dataclass(frozen=True)
class GaussianManifold(ManifoldModel):
    """M(x) = amplitude exp(-|x - center|^2)."""

    dim: int
    amplitude: float = 2.0
    center: tuple = None
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        center = np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (self.dim,):
            raise InputDomainError(f"gaussian center must have {self.dim} entries, got {center.shape}")
        object.__setattr__(self, "center", tuple(float(c) for c in center))

    def _offset(self, x):
        return as_points(x, self.dim) - np.asarray(self.center)

    def height(self, x):
        d = self._offset(x)
        return self.amplitude * np.exp(-np.sum(d * d, axis=-1))

    def grad(self, x):
        d = self._offset(x)
        e = self.amplitude * np.exp(-np.sum(d * d, axis=-1))
        return -2.0 * e[..., None] * d

    def hess(self, x):
        d = self._offset(x)
        e = self.amplitude * np.exp(-np.sum(d * d, axis=-1))
        outer = d[..., :, None] * d[..., None, :]
        return e[..., None, None] * (4.0 * outer - 2.0 * np.eye(self.dim))

    def gradient_bound_sq(self):
        # |grad M| = 2 amp r exp(-r^2), maximal at r = 1/sqrt(2)
        return 2.0 * self.amplitude ** 2 / math.e

    @property
    def selector(self):
        center = ",".join(repr(c) for c in self.center)
        return f"gaussian:amp={self.amplitude!r},center={center}"


@dataclass(frozen=True)
class FiniteDifferenceManifold(ManifoldModel):
    """
    Generic manifold from a height callback.

    The callback maps one point of shape (n,) to a float. Gradients use
    central differences with step FD_GRADIENT_STEP, Hessians second-order
    central differences with step FD_HESSIAN_STEP.
    """

    dim: int
    height_fn: Callable = None
    grad_step: float = FD_GRADIENT_STEP
    hess_step: float = FD_HESSIAN_STEP
    kind: str = field(default="generic", init=False)

    def _each_point(self, x, fn, tail):
        points = as_points(x, self.dim)
        flat = points.reshape(-1, self.dim)
        out = np.array([fn(point) for point in flat], dtype=float)
        return out.reshape(points.shape[:-1] + tail)

    def height(self, x):
        return self._each_point(x, lambda point: float(self.height_fn(point)), ())

    def _grad_point(self, point):
        h = self.grad_step
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            g[i] = (self.height_fn(point + e) - self.height_fn(point - e)) / (2.0 * h)
        return g

    def _hess_point(self, point):
        h = self.hess_step
        n = self.dim
        f0 = self.height_fn(point)
        H = np.empty((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            H[i, i] = (self.height_fn(point + ei) - 2.0 * f0 + self.height_fn(point - ei)) / h ** 2
            for j in range(i):
                ej = np.zeros(n)
                ej[j] = h
                H[i, j] = (
                    self.height_fn(point + ei + ej)
                    - self.height_fn(point + ei - ej)
                    - self.height_fn(point - ei + ej)
                    + self.height_fn(point - ei - ej)
                ) / (4.0 * h ** 2)
                H[j, i] = H[i, j]
        return H

    def grad(self, x):
        return self._each_point(x, self._grad_point, (self.dim,))

    def hess(self, x):
        return self._each_point(x, self._hess_point, (self.dim, self.dim))


_PARAM_PATTERN = re.compile(r"(\w+)=([^=]*?)(?=,\w+=|$)")


def _parse_params(text: str) -> dict:
    params = {}
    consumed = 0
    for match in _PARAM_PATTERN.finditer(text):
        params[match.group(1)] = match.group(2)
        consumed += len(match.group(0))
    # separators between pairs
    consumed += max(len(params) - 1, 0)
    if consumed != len(text):
        raise InputDomainError(f"could not parse parameters '{text}'")
    return params


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputDomainError(f"expected comma-separated numbers, got '{text}'")


def _param_number(params: dict, key: str, default: float) -> float:
    try:
        return float(params.get(key, default))
    except ValueError:
        raise InputDomainError(f"manifold parameter '{key}' must be a number, got '{params[key]}'")


def manifold_from_selector(selector: str, dim: int) -> ManifoldModel:
    """
    Build a manifold from its command-line selector.

    Grammar:
        flat
        sinusoid:a=<float>
        gaussian:amp=<float>,center=<comma-floats>
    A single center value is broadcast to every coordinate.
    """
    name, _, rest = selector.strip().partition(":")
    params = _parse_params(rest) if rest else {}
    name = name.lower()

    if name == "flat":
        return FlatManifold(dim=dim)

    if name == "sinusoid":
        if dim != 2:
            raise InputDomainError(f"sinusoid manifold is two-dimensional, got dim={dim}")
        return SinusoidManifold(a=_param_number(params, "a", 1.0))

    if name == "gaussian":
        center = None
        if "center" in params:
            values = _floats(params["center"])
            center = values * dim if len(values) == 1 else values
        return GaussianManifold(dim=dim, amplitude=_param_number(params, "amp", 2.0), center=center)

    raise InputDomainError(f"unknown manifold '{selector}'")
