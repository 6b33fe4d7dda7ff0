"""
Nested grid search for prox points: argmin objective(x) + 1/2 |x - nu|^2.
"""

import itertools

import numpy as np
from scipy.optimize import minimize

from src.errors import InputDomainError

GRID_POINTS = 21
MAX_GRID_DIM = 3
MAX_MOVES = 50


def _grid(center, radius: float, points: int) -> np.ndarray:
    axis = np.linspace(-radius, radius, points)
    offsets = np.array(list(itertools.product(axis, repeat=center.size)))
    return center + offsets


def numeric_prox(objective, nu, radius: float = 1.0, levels: int = 3, factor: int = 10,
                 points: int = GRID_POINTS, polish: bool = True) -> np.ndarray:
    """
    Search a box of half-width `radius` around nu on a grid, then `levels`
    times shrink the box by `factor` around the best point. At every level
    the box follows the best point until it sits at the center. A final
    Nelder-Mead run from the grid point is kept only if it lowers the value.

    `objective` maps stacked points (N, n) to values (N,). The last grid has
    spacing 2 radius / ((points - 1) factor^levels).
    """
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if nu.size > MAX_GRID_DIM:
        raise InputDomainError(f"grid prox search supports up to {MAX_GRID_DIM} dimensions, got {nu.size}")
    if points < 3 or points % 2 == 0:
        raise InputDomainError("grid needs an odd number of points (>= 3) per axis")
    if not radius > 0:
        return nu.copy()

    def total(x):
        d = x - nu
        return np.asarray(objective(x), dtype=float) + 0.5 * np.sum(d * d, axis=-1)

    center = (points ** nu.size - 1) // 2
    best = nu.copy()
    for _ in range(levels + 1):
        for _ in range(MAX_MOVES):
            grid = _grid(best, radius, points)
            values = total(grid)
            i = int(np.argmin(values))
            if not values[i] < values[center]:
                break
            best = grid[i]
        spacing = 2.0 * radius / (points - 1)
        radius /= factor

    if not polish:
        return best

    simplex = best + np.vstack([np.zeros(nu.size), spacing * np.eye(nu.size)])
    result = minimize(
        lambda y: float(total(y[None, :])[0]),
        best,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000},
    )
    if result.fun < float(total(best[None, :])[0]):
        return result.x
    return best
