"""Shared fixtures."""

import numpy as np
import pytest

from src.geometry.manifolds import FlatManifold, GaussianManifold, SinusoidManifold
from src.hamiltonian.speeds import ConstantSpeed, QuadraticLeftSpeed
from src.oracle.suites import VerifySettings
from src.solver.problem import SolverConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240518)


@pytest.fixture
def flat2():
    return FlatManifold(dim=2)


@pytest.fixture
def sinusoid():
    return SinusoidManifold(a=1.0)


@pytest.fixture
def gaussian2():
    return GaussianManifold(dim=2, amplitude=2.0)


@pytest.fixture
def unit_speed():
    return ConstantSpeed(c=1.0)


@pytest.fixture
def slow_right():
    return QuadraticLeftSpeed()


@pytest.fixture
def quick_config():
    """Few iterations; enough to exercise both stages."""
    return SolverConfig(max_iters=60, stage_switch=30, anneal_period=10, tol=1e-12, log_every=20)


@pytest.fixture
def small_verify():
    return VerifySettings(
        sphere_instances=3,
        sphere_samples=20000,
        prox_instances=200,
        prox_candidates=2000,
        prox_grid_instances=10,
        gradient_instances=5,
        identity_instances=50,
        bound_instances=5,
        seed=3,
    )
