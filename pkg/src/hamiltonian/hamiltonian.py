"""
Hamiltonian

H(x, p, t) = v(x, t) sqrt(p^T A(x) p) - 1

together with the smooth goal indicator 1 - exp(-B |x - x_f|^2) and the
state gradient of indicator * H used by the gradient-descent state update.
On a flat surface H reduces to the Eikonal Hamiltonian v |p| - 1.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import InputDomainError
from src.geometry.manifolds import ManifoldModel
from src.hamiltonian.speeds import SpeedModel

# Below this |p| the sqrt-term of the gradient is dropped
COSTATE_GUARD = 1e-10


@dataclass(frozen=True)
class IndicatorParams:
    """Goal point x_f and sharpness B of the smooth indicator."""

    goal: tuple
    sharpness: float

    def __post_init__(self):
        if not self.sharpness > 0:
            raise InputDomainError(f"indicator sharpness must be positive, got {self.sharpness}")
        object.__setattr__(self, "goal", tuple(float(c) for c in np.ravel(self.goal)))

    def with_sharpness(self, sharpness: float) -> "IndicatorParams":
        return IndicatorParams(goal=self.goal, sharpness=sharpness)


def smooth_indicator(x, ip: IndicatorParams) -> np.ndarray:
    """1 - exp(-B |x - x_f|^2): zero at the goal, increasing towards 1 away from it."""
    d = np.asarray(x, dtype=float) - np.asarray(ip.goal)
    return 1.0 - np.exp(-ip.sharpness * np.sum(d * d, axis=-1))


def indicator_gradient(x, ip: IndicatorParams) -> np.ndarray:
    d = np.asarray(x, dtype=float) - np.asarray(ip.goal)
    decay = np.exp(-ip.sharpness * np.sum(d * d, axis=-1))
    return 2.0 * ip.sharpness * decay[..., None] * d


def metric_norm(g, p) -> np.ndarray:
    """sqrt(p^T A p) from the gradient g = grad M without forming A."""
    pp = np.sum(p * p, axis=-1)
    pg = np.sum(p * g, axis=-1)
    quad = pp - pg * pg / (1.0 + np.sum(g * g, axis=-1))
    return np.sqrt(np.maximum(quad, 0.0))


def hamiltonian(m: ManifoldModel, v: SpeedModel, x, p, t) -> np.ndarray:
    """v(x, t) sqrt(p^T A(x) p) - 1; p = 0 gives -1."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return v.speed(x, t) * metric_norm(m.grad(x), p) - 1.0


def grad_metric_norm(g, hess, p) -> np.ndarray:
    """
    grad_x sqrt(p^T A(x) p):

        [(p.g)^2 H_M g - (1 + |g|^2)(p.g) H_M p] / [sqrt(p^T A p) (1 + |g|^2)^2]

    set to zero where |p| < COSTATE_GUARD.
    """
    s = 1.0 + np.sum(g * g, axis=-1)
    pg = np.sum(p * g, axis=-1)
    root = metric_norm(g, p)
    hg = np.einsum("...ij,...j->...i", hess, g)
    hp = np.einsum("...ij,...j->...i", hess, p)
    numerator = (pg * pg)[..., None] * hg - (s * pg)[..., None] * hp

    live = np.linalg.norm(p, axis=-1) >= COSTATE_GUARD
    denom = np.where(live, root * s * s, 1.0)
    return np.where(live[..., None], numerator / denom[..., None], 0.0)


def grad_x_hamiltonian(m: ManifoldModel, v: SpeedModel, x, p, t, ip: IndicatorParams) -> np.ndarray:
    """
    grad_x of indicator(x) * H(x, p, t) by the product rule:

        (v sqrt(p^T A p) - 1) grad indicator
        + indicator sqrt(p^T A p) grad_x v
        + indicator v grad_x sqrt(p^T A p)
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    g = m.grad(x)
    root = metric_norm(g, p)
    speed = v.speed(x, t)
    ind = smooth_indicator(x, ip)

    term_indicator = (speed * root - 1.0)[..., None] * indicator_gradient(x, ip)
    term_speed = (ind * root)[..., None] * v.grad(x, t)
    term_metric = (ind * speed)[..., None] * grad_metric_norm(g, m.hess(x), p)
    return term_indicator + term_speed + term_metric
