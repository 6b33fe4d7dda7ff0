"""
Speed Models

Local speed fields v(x, t) > 0 with their spatial gradients:
- const:c=<float>   v = c
- quadleft          v = 1 + (x1 - 1)^2   (slow near x1 = 1)
- generic callback  gradient by central differences
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.errors import InputDomainError

FD_GRADIENT_STEP = 1e-5


class SpeedModel(ABC):
    kind: str = "abstract"

    @abstractmethod
    def speed(self, x, t) -> np.ndarray:
        """v(x, t), shape (...)."""

    @abstractmethod
    def grad(self, x, t) -> np.ndarray:
        """grad_x v(x, t), shape (..., n)."""

    @property
    def selector(self) -> str:
        return self.kind


@dataclass(frozen=True)
class ConstantSpeed(SpeedModel):
    c: float = 1.0
    kind: str = field(default="const", init=False)

    def __post_init__(self):
        if not self.c > 0:
            raise InputDomainError(f"speed must be positive, got c={self.c}")

    def speed(self, x, t):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], float(self.c))

    def grad(self, x, t):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def selector(self):
        return f"const:c={self.c!r}"


@dataclass(frozen=True)
class QuadraticLeftSpeed(SpeedModel):
    """v = 1 + (x1 - 1)^2: fast far left of x1 = 1, slowest at x1 = 1."""

    kind: str = field(default="quadleft", init=False)

    def speed(self, x, t):
        x = np.asarray(x, dtype=float)
        return 1.0 + (x[..., 0] - 1.0) ** 2

    def grad(self, x, t):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[..., 0] = 2.0 * (x[..., 0] - 1.0)
        return g


@dataclass(frozen=True)
class FiniteDifferenceSpeed(SpeedModel):
    """Speed from a callback speed_fn(point, t) -> float."""

    speed_fn: Callable = None
    grad_step: float = FD_GRADIENT_STEP
    kind: str = field(default="generic", init=False)

    def speed(self, x, t):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        times = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1]).reshape(-1)
        values = np.array([self.speed_fn(point, s) for point, s in zip(flat, times)], dtype=float)
        return values.reshape(x.shape[:-1])

    def grad(self, x, t):
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        h = self.grad_step
        g = np.empty_like(x)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            g[..., i] = (self.speed(x + e, t) - self.speed(x - e, t)) / (2.0 * h)
        return g


def speed_from_selector(selector: str) -> SpeedModel:
    """
    Build a speed model from its command-line selector.

    Grammar:
        const:c=<float>
        quadleft
    """
    name, _, rest = selector.strip().partition(":")
    name = name.lower()

    if name in ("const", "constant"):
        c = 1.0
        if rest:
            key, _, value = rest.partition("=")
            if key.strip() != "c":
                raise InputDomainError(f"unknown speed parameter '{key}'")
            try:
                c = float(value)
            except ValueError:
                raise InputDomainError(f"speed constant must be a number, got '{value}'")
        return ConstantSpeed(c=c)

    if name == "quadleft":
        return QuadraticLeftSpeed()

    raise InputDomainError(f"unknown speed '{selector}'")
