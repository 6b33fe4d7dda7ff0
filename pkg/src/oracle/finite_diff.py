"""Central-difference gradients of vectorized scalar fields."""

import numpy as np

from src.errors import InputDomainError


def fd_gradient(field, x, h: float = 1e-6) -> np.ndarray:
    """
    Componentwise central differences (f(x + h e_i) - f(x - h e_i)) / 2h.

    `field` maps stacked points (N, n) to values (N,).
    """
    if not h > 0:
        raise InputDomainError(f"difference step must be positive, got {h}")
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.size
    steps = h * np.eye(n)
    values = np.asarray(field(np.vstack([x + steps, x - steps])), dtype=float)
    return (values[:n] - values[n:]) / (2.0 * h)
