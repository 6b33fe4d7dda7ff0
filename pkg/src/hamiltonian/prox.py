"""
Proximal Updates

The two per-node updates of the splitting iteration:

- costate: after the change of variables w = L(x)^T p the costate prox is the
  prox of a scaled Euclidean norm, i.e. vector shrinkage
      w = max(0, 1 - sigma dt indicator(x) v(x, t) / |beta|) beta,  p = (L^T)^{-1} w
- state: prox of -tau dt indicator * H(., p, t) has no closed form; it is
  approximated either by a few gradient-descent steps or by the pass-through
  x = nu. After gradient descent the goal itself is tried as a candidate.
"""

import logging

import numpy as np

from src.errors import DivergenceError, InputDomainError
from src.geometry.manifolds import ManifoldModel
from src.geometry.metric import MetricFactor, hessian_norm, metric_factor, solve_upper_transpose
from src.hamiltonian.hamiltonian import IndicatorParams, grad_x_hamiltonian, hamiltonian, smooth_indicator
from src.hamiltonian.speeds import SpeedModel

logger = logging.getLogger(__name__)


def shrink(beta, threshold) -> np.ndarray:
    """max(0, 1 - threshold / |beta|) beta, with 0 returned for beta = 0."""
    beta = np.asarray(beta, dtype=float)
    norm = np.linalg.norm(beta, axis=-1)
    safe = np.where(norm > 0.0, norm, 1.0)
    scale = np.where(norm > 0.0, np.maximum(0.0, 1.0 - threshold / safe), 0.0)
    return scale[..., None] * beta


def prox_costate(beta, x, t, sigma_dt: float, ip: IndicatorParams, m: ManifoldModel,
                 v: SpeedModel, factor: MetricFactor = None):
    """
    Resolve the costate update at node x.

    Args:
        beta: w + sigma L(x)^{-1}(z_j - z_{j-1}), shape (..., n)
        x: node states, shape (..., n)
        t: node times, broadcastable to x.shape[:-1]
        sigma_dt: sigma * dt
        factor: precomputed metric factor at x, if available

    Returns:
        tuple (w, p)
    """
    if not sigma_dt > 0:
        raise InputDomainError(f"sigma*dt must be positive, got {sigma_dt}")
    x = np.asarray(x, dtype=float)
    threshold = sigma_dt * smooth_indicator(x, ip) * v.speed(x, t)
    w = shrink(beta, threshold)

    if factor is None:
        factor = metric_factor(m, x)
    p = solve_upper_transpose(factor.L, w)
    return w, p


def prox_state_gd(nu, p, t, tau_dt: float, eta: float, steps: int, m: ManifoldModel,
                  v: SpeedModel, ip: IndicatorParams, start=None) -> np.ndarray:
    """
    Approximate prox_{-tau dt indicator H(., p, t)}(nu) with `steps` iterations of

        x <- x - eta (-tau dt grad_x(indicator H)(x, p, t) + (x - nu))

    starting from `start` (the previous iterate) or nu.
    """
    if not eta > 0:
        raise InputDomainError(f"gradient-descent rate must be positive, got {eta}")
    if steps < 1:
        raise InputDomainError(f"need at least one gradient-descent step, got {steps}")

    nu = np.asarray(nu, dtype=float)
    x = np.array(nu if start is None else start, dtype=float)
    for _ in range(steps):
        step = -tau_dt * grad_x_hamiltonian(m, v, x, p, t, ip) + (x - nu)
        x = x - eta * step
        if not np.all(np.isfinite(x)):
            raise DivergenceError("gradient-descent state update diverged; reduce eta")
    return x


def prox_state_objective(x, nu, p, t, tau_dt: float, m: ManifoldModel, v: SpeedModel,
                         ip: IndicatorParams) -> np.ndarray:
    """-tau dt indicator(x) H(x, p, t) + |x - nu|^2 / 2, per node."""
    x = np.asarray(x, dtype=float)
    d = x - np.asarray(nu, dtype=float)
    running = smooth_indicator(x, ip) * hamiltonian(m, v, x, p, t)
    return -tau_dt * running + 0.5 * np.sum(d * d, axis=-1)


def snap_to_goal(x, nu, p, t, tau_dt: float, m: ManifoldModel, v: SpeedModel,
                 ip: IndicatorParams) -> np.ndarray:
    """
    Replace a state by the goal wherever the goal scores no worse on the state
    prox objective. The indicator vanishes at the goal, so nodes that have
    finished travelling collapse onto it instead of hovering nearby.
    """
    x = np.asarray(x, dtype=float)
    goal = np.broadcast_to(np.asarray(ip.goal), x.shape)
    at_goal = prox_state_objective(goal, nu, p, t, tau_dt, m, v, ip)
    current = prox_state_objective(x, nu, p, t, tau_dt, m, v, ip)
    return np.where((at_goal <= current)[..., None], goal, x)


def prox_state_passthrough(nu) -> np.ndarray:
    """x = nu."""
    return np.array(nu, dtype=float)


def prox_error_bound(m: ManifoldModel, v: SpeedModel, x, p, t, tau_dt: float) -> np.ndarray:
    """
    Upper bound on |x - nu| for x = prox_{-tau dt H(., p, t)}(nu), evaluated at x:

        tau dt |p| (|grad v(x, t)| + 2 |v(x, t)| ||H_M(x)||)

    with the spectral norm of the Hessian.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    speed = np.abs(v.speed(x, t))
    speed_grad = np.linalg.norm(v.grad(x, t), axis=-1)
    return tau_dt * np.linalg.norm(p, axis=-1) * (speed_grad + 2.0 * speed * hessian_norm(m, x))
