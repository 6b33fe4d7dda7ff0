"""Surface models, metric, Cholesky factor and triangular solves."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import FactorizationError, InputDomainError, SingularFactorError
from src.geometry.manifolds import (
    FiniteDifferenceManifold,
    FlatManifold,
    GaussianManifold,
    SinusoidManifold,
    as_points,
    manifold_from_selector,
)
from src.geometry.metric import (
    cholesky_2d,
    cholesky_factor,
    hessian_norm,
    manifold_arclength,
    metric_factor,
    metric_from_gradient,
    metric_matrix,
    solve_lower,
    solve_upper_transpose,
)
from src.oracle.finite_diff import fd_gradient


def random_spd(rng, n):
    B = rng.normal(size=(n, n))
    return B @ B.T + n * np.eye(n)


class TestManifolds:
    def test_flat_is_zero_everywhere(self):
        m = FlatManifold(dim=3)
        x = np.array([[0.3, -1.0, 2.0], [1.0, 1.0, 1.0]])
        assert_allclose(m.height(x), 0.0)
        assert_allclose(m.grad(x), 0.0)
        assert m.hess(x).shape == (2, 3, 3)

    def test_sinusoid_values(self, sinusoid):
        assert sinusoid.height(np.array([0.5, 0.0])) == pytest.approx(1.0)
        assert_allclose(sinusoid.grad(np.array([0.0, 0.0])), [np.pi, 0.0], atol=1e-15)

    @pytest.mark.parametrize("m", [SinusoidManifold(a=1.0), SinusoidManifold(a=3.0),
                                   GaussianManifold(dim=2), GaussianManifold(dim=4, amplitude=1.5)])
    def test_gradient_matches_differences(self, m, rng):
        for _ in range(5):
            x = rng.uniform(-1.0, 1.0, m.dim)
            assert_allclose(m.grad(x), fd_gradient(m.height, x, h=1e-6), rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("m", [SinusoidManifold(a=1.0), GaussianManifold(dim=3)])
    def test_hessian_matches_gradient_differences(self, m, rng):
        x = rng.uniform(-1.0, 1.0, m.dim)
        numeric = np.array([fd_gradient(lambda X: m.grad(X)[:, i], x, h=1e-6) for i in range(m.dim)])
        assert_allclose(m.hess(x), numeric, atol=1e-6)
        assert_allclose(m.hess(x), m.hess(x).T)

    def test_stacked_evaluation_matches_single_points(self, gaussian2, rng):
        x = rng.uniform(-1.0, 1.0, (4, 3, 2))
        stacked = gaussian2.grad(x)
        assert stacked.shape == (4, 3, 2)
        assert_allclose(stacked[2, 1], gaussian2.grad(x[2, 1]))

    def test_analytic_gradient_bounds(self, rng):
        assert SinusoidManifold(a=1.0).gradient_bound_sq() == pytest.approx(np.pi ** 2)
        assert GaussianManifold(dim=2, amplitude=2.0).gradient_bound_sq() == pytest.approx(8.0 / math.e)
        assert FlatManifold(dim=2).gradient_bound_sq() == 0.0

        m = GaussianManifold(dim=2, amplitude=2.0)
        g = m.grad(rng.uniform(-2.0, 2.0, (5000, 2)))
        assert np.max(np.sum(g * g, axis=1)) <= m.gradient_bound_sq() + 1e-12

    def test_finite_difference_manifold(self, sinusoid, rng):
        generic = FiniteDifferenceManifold(
            dim=2, height_fn=lambda p: np.sin(np.pi * p[0]) * np.cos(np.pi * p[1])
        )
        x = rng.uniform(-1.0, 1.0, (3, 2))
        assert_allclose(generic.height(x), sinusoid.height(x))
        assert_allclose(generic.grad(x), sinusoid.grad(x), atol=1e-8)
        assert_allclose(generic.hess(x), sinusoid.hess(x), atol=1e-5)

    def test_non_finite_points_rejected(self, gaussian2):
        with pytest.raises(InputDomainError):
            gaussian2.grad(np.array([np.nan, 0.0]))
        with pytest.raises(InputDomainError):
            as_points(np.zeros(3), 2)


class TestSelectors:
    def test_flat(self):
        m = manifold_from_selector("flat", 5)
        assert isinstance(m, FlatManifold) and m.dim == 5

    def test_sinusoid_amplitude(self):
        assert manifold_from_selector("sinusoid:a=3", 2).a == 3.0

    def test_sinusoid_requires_two_dimensions(self):
        with pytest.raises(InputDomainError):
            manifold_from_selector("sinusoid:a=1", 3)

    def test_gaussian_center_broadcast(self):
        m = manifold_from_selector("gaussian:amp=2,center=0.5", 3)
        assert m.center == (0.5, 0.5, 0.5)
        assert m.amplitude == 2.0

    def test_gaussian_full_center(self):
        m = manifold_from_selector("gaussian:amp=1,center=0,1", 2)
        assert m.center == (0.0, 1.0)

    def test_selector_round_trip(self):
        m = GaussianManifold(dim=2, amplitude=1.5, center=(0.25, -0.5))
        assert manifold_from_selector(m.selector, 2) == m

    @pytest.mark.parametrize("selector", ["torus", "gaussian:amp", "gaussian:center=a,b"])
    def test_bad_selectors(self, selector):
        with pytest.raises(InputDomainError):
            manifold_from_selector(selector, 2)

    @pytest.mark.parametrize("selector, key", [("sinusoid:a=steep", "a"), ("gaussian:amp=tall", "amp")])
    def test_non_numeric_parameter_names_key(self, selector, key):
        with pytest.raises(InputDomainError, match=f"'{key}'"):
            manifold_from_selector(selector, 2)


class TestMetric:
    def test_flat_metric_is_identity(self):
        assert_allclose(metric_matrix(FlatManifold(dim=3), np.zeros(3)), np.eye(3))

    def test_eigenvalues(self, rng):
        for n in (2, 3, 7):
            g = rng.normal(size=n)
            eig = np.sort(np.linalg.eigvalsh(metric_from_gradient(g)))
            expected = np.array([1.0 / (1.0 + g @ g)] + [1.0] * (n - 1))
            assert_allclose(eig, expected, atol=1e-10)

    def test_non_finite_gradient_rejected(self):
        with pytest.raises(InputDomainError):
            metric_from_gradient(np.array([np.inf, 0.0]))


class TestCholesky:
    def test_reconstructs_random_spd(self, rng):
        A = random_spd(rng, 10)
        L = cholesky_factor(A)
        assert np.linalg.norm(L @ L.T - A) <= 1e-12 * np.linalg.norm(A)
        assert np.all(np.diag(L) > 0)
        assert_allclose(np.triu(L, 1), 0.0)

    def test_stacked_factors(self, rng):
        A = np.stack([random_spd(rng, 4) for _ in range(6)])
        L = cholesky_factor(A)
        assert_allclose(L @ np.swapaxes(L, -1, -2), A, atol=1e-12)

    def test_small_gradient_gives_near_identity(self):
        g = np.array([1e-4, 0.0, 0.0])
        L = cholesky_factor(metric_from_gradient(g))
        assert np.linalg.norm(L - np.eye(3)) <= 1e-3

    def test_closed_form_matches_general_routine(self, rng):
        for g in rng.normal(scale=3.0, size=(20, 2)):
            assert_allclose(cholesky_2d(g), cholesky_factor(metric_from_gradient(g)), atol=1e-12)

    def test_metric_factor_uses_closed_form_in_2d(self, sinusoid, rng):
        x = rng.uniform(-1.0, 1.0, (5, 2))
        factor = metric_factor(sinusoid, x)
        assert_allclose(factor.L @ np.swapaxes(factor.L, -1, -2), factor.A, atol=1e-12)

    def test_rejects_non_symmetric(self):
        with pytest.raises(FactorizationError):
            cholesky_factor(np.array([[2.0, 1.0], [0.0, 2.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(FactorizationError):
            cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestTriangularSolves:
    def test_lower_round_trip(self, rng):
        L = cholesky_factor(random_spd(rng, 6))
        b = rng.normal(size=6)
        assert_allclose(L @ solve_lower(L, b), b, atol=1e-12)

    def test_upper_transpose_round_trip(self, rng):
        L = cholesky_factor(random_spd(rng, 6))
        b = rng.normal(size=6)
        assert_allclose(L.T @ solve_upper_transpose(L, b), b, atol=1e-12)

    def test_stacked_solves(self, sinusoid, rng):
        L = metric_factor(sinusoid, rng.uniform(-1.0, 1.0, (8, 2))).L
        b = rng.normal(size=(8, 2))
        y = solve_lower(L, b)
        assert_allclose(np.einsum("kij,kj->ki", L, y), b, atol=1e-12)
        w = solve_upper_transpose(L, b)
        assert_allclose(np.einsum("kji,kj->ki", L, w), b, atol=1e-12)

    def test_zero_diagonal_rejected(self):
        L = np.array([[1.0, 0.0], [0.5, 0.0]])
        with pytest.raises(SingularFactorError):
            solve_lower(L, np.ones(2))
        with pytest.raises(SingularFactorError):
            solve_upper_transpose(L, np.ones(2))


class TestPathGeometry:
    def test_hessian_norm_of_gaussian_peak(self):
        # Hessian at the center is -2 amp I
        assert hessian_norm(GaussianManifold(dim=3, amplitude=2.0), np.zeros(3)) == pytest.approx(4.0)

    def test_flat_arclength_is_euclidean(self):
        path = np.array([[0.0, 0.0], [3.0, 4.0], [3.0, 5.0]])
        assert manifold_arclength(FlatManifold(dim=2), path) == pytest.approx(6.0)

    def test_arclength_includes_height_change(self, gaussian2):
        path = np.array([[0.0, 0.0], [1.0, 0.0]])
        dz = gaussian2.height(path[1]) - gaussian2.height(path[0])
        assert manifold_arclength(gaussian2, path) == pytest.approx(np.hypot(1.0, dz))

    def test_single_point_rejected(self):
        with pytest.raises(InputDomainError):
            manifold_arclength(FlatManifold(dim=2), np.zeros((1, 2)))
