"""
Induced Metric

Linear algebra of the matrix

    A(x) = I - grad M grad M^T / (1 + |grad M|^2)

which maps costates to the norm sqrt(p^T A p) of the Hamiltonian: the matrix
itself, its Cholesky factor L (A = L L^T), triangular solves against L and
L^T, and arc length of a path lifted onto the surface.

All functions accept single inputs or stacks with leading batch axes.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.errors import FactorizationError, InputDomainError, SingularFactorError
from src.geometry.manifolds import ManifoldModel, as_points

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class MetricFactor:
    """A(x), its Cholesky factor L(x) and |grad M(x)|^2."""

    A: np.ndarray
    L: np.ndarray
    grad_norm2: np.ndarray


def metric_from_gradient(g) -> np.ndarray:
    """A = I - g g^T / (1 + |g|^2) for gradients g of shape (..., n)."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise InputDomainError("manifold gradient is not finite")
    n = g.shape[-1]
    scale = 1.0 / (1.0 + np.sum(g * g, axis=-1))
    outer = g[..., :, None] * g[..., None, :]
    return np.eye(n) - scale[..., None, None] * outer


def metric_matrix(m: ManifoldModel, x) -> np.ndarray:
    """Symmetric positive definite A(x); eigenvalues 1 (n-1 times) and 1/(1+|grad M|^2)."""
    return metric_from_gradient(m.grad(as_points(x, m.dim)))


def cholesky_factor(A) -> np.ndarray:
    """Lower-triangular L with positive diagonal and L L^T = A."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise FactorizationError(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise FactorizationError("matrix has non-finite entries")
    asym = np.max(np.abs(A - np.swapaxes(A, -1, -2)), initial=0.0)
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(A), initial=0.0)):
        raise FactorizationError(f"matrix is not symmetric (max asymmetry {asym:.3e})")

    try:
        if A.ndim == 2:
            return scipy.linalg.cholesky(A, lower=True)
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as e:
        raise FactorizationError(f"matrix is not positive definite: {e}")


def cholesky_2d(g) -> np.ndarray:
    """
    Closed-form Cholesky factor of A for n = 2 from the gradient (M_x, M_y).

    With s = 1 + |grad M|^2 and c = 1 + M_y^2:

        L = 1/sqrt(s) * [[sqrt(c),            0         ],
                         [-M_x M_y / sqrt(c), sqrt(s / c)]]
    """
    g = np.asarray(g, dtype=float)
    mx, my = g[..., 0], g[..., 1]
    s = 1.0 + mx * mx + my * my
    c = 1.0 + my * my
    root_c = np.sqrt(c)
    pre = 1.0 / np.sqrt(s)
    L = np.zeros(g.shape[:-1] + (2, 2))
    L[..., 0, 0] = pre * root_c
    L[..., 1, 0] = -pre * mx * my / root_c
    L[..., 1, 1] = pre * np.sqrt(s / c)
    return L


def metric_factor(m: ManifoldModel, x) -> MetricFactor:
    """Evaluate A(x) and its factor; the 2-D case uses the closed form."""
    g = m.grad(as_points(x, m.dim))
    A = metric_from_gradient(g)
    L = cholesky_2d(g) if m.dim == 2 else cholesky_factor(A)
    return MetricFactor(A=A, L=L, grad_norm2=np.sum(g * g, axis=-1))


def _check_diagonal(L):
    diag = np.diagonal(L, axis1=-2, axis2=-1)
    if np.any(diag == 0.0):
        raise SingularFactorError("triangular factor has a zero diagonal entry")


def solve_lower(L, b) -> np.ndarray:
    """L^{-1} b by forward substitution."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_diagonal(L)
    if L.ndim == 2:
        return scipy.linalg.solve_triangular(L, b, lower=True)
    return np.linalg.solve(L, b[..., None])[..., 0]


def solve_upper_transpose(L, b) -> np.ndarray:
    """(L^T)^{-1} b by back substitution."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_diagonal(L)
    if L.ndim == 2:
        return scipy.linalg.solve_triangular(L, b, lower=True, trans="T")
    return np.linalg.solve(np.swapaxes(L, -1, -2), b[..., None])[..., 0]


def hessian_norm(m: ManifoldModel, x) -> np.ndarray:
    """Spectral norm of the Hessian of M at x."""
    H = m.hess(as_points(x, m.dim))
    if H.ndim == 2:
        eigenvalues = scipy.linalg.eigh(H, eigvals_only=True)
    else:
        eigenvalues = np.linalg.eigvalsh(H)
    return np.max(np.abs(eigenvalues), axis=-1)


def manifold_arclength(m: ManifoldModel, path) -> float:
    """Length of the polyline (x_j, M(x_j)) lifted onto the surface."""
    points = as_points(path, m.dim)
    if points.ndim != 2 or points.shape[0] < 2:
        raise InputDomainError("a path needs at least two points")
    heights = m.height(points)
    dx = np.diff(points, axis=0)
    dz = np.diff(heights)
    return float(np.sum(np.sqrt(np.sum(dx * dx, axis=1) + dz * dz)))
