"""
Verification Suites

Each suite checks one piece of closed-form math against an independent
brute-force computation and returns a SuiteResult:

- sphere:     Hamiltonian vs brute-force minimum over unit directions,
              closed-form minimizer vs sampled argmin
- prox:       shrinkage costate prox vs random candidates and a grid search
- gradients:  grad_x(indicator * H) vs central differences
- identity:   objective at the closed-form minimizer equals -sqrt(p^T A p)
- bound:      grid-searched state prox obeys the displacement bound
"""

import logging
import time
from dataclasses import dataclass, fields
from typing import Callable, Dict, List, Optional

import numpy as np

from src.errors import ValidationError
from src.geometry.manifolds import FlatManifold, GaussianManifold, SinusoidManifold
from src.hamiltonian.hamiltonian import (
    IndicatorParams,
    grad_x_hamiltonian,
    hamiltonian,
    metric_norm,
    smooth_indicator,
)
from src.hamiltonian.prox import prox_costate, prox_error_bound
from src.hamiltonian.speeds import ConstantSpeed, QuadraticLeftSpeed
from src.oracle.finite_diff import fd_gradient
from src.oracle.prox_search import numeric_prox
from src.oracle.sphere import (
    angular_distance,
    closed_form_minimizer,
    direction_objective,
    sphere_min_objective,
    sphere_samples,
)

logger = logging.getLogger(__name__)

SPHERE_VALUE_TOL = 1e-3
SPHERE_ANGLE_TOL = 1e-2
PROX_GRID_TOL = 1e-3
GRADIENT_TOL = 1e-4
IDENTITY_TOL = 1e-10
BOUND_SLACK = 1.05


@dataclass(frozen=True)
class VerifySettings:
    """Instance counts per suite (the `verify:` section of config/solver.yaml)."""

    sphere_instances: int = 100
    sphere_samples: int = 100000
    prox_instances: int = 10000
    prox_candidates: int = 100000
    prox_grid_instances: int = 100
    gradient_instances: int = 100
    identity_instances: int = 1000
    bound_instances: int = 100
    seed: int = 0

    @classmethod
    def from_mapping(cls, values: dict) -> "VerifySettings":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            key = sorted(unknown)[0]
            raise ValidationError(f"unknown verify setting '{key}'", key=key)
        try:
            return cls(**{k: int(v) for k, v in values.items()})
        except (TypeError, ValueError) as e:
            raise ValidationError(f"invalid verify setting: {e}")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    instances: int
    worst_error: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""

    def as_row(self) -> dict:
        return {
            "suite": self.name,
            "status": "PASS" if self.passed else "FAIL",
            "instances": self.instances,
            "worst_error": self.worst_error,
            "tolerance": self.tolerance,
            "seconds": round(self.seconds, 3),
            "detail": self.detail,
        }


def _sphere_cases():
    return [
        (FlatManifold(dim=2), ConstantSpeed()),
        (SinusoidManifold(a=1.0), ConstantSpeed()),
        (SinusoidManifold(a=1.0), QuadraticLeftSpeed()),
        (GaussianManifold(dim=2), ConstantSpeed()),
        (FlatManifold(dim=3), ConstantSpeed()),
        (GaussianManifold(dim=3), QuadraticLeftSpeed()),
    ]


def run_sphere_suite(settings: VerifySettings, hamiltonian_fn: Callable = hamiltonian) -> SuiteResult:
    rng = np.random.default_rng([settings.seed, 1])
    worst_value = 0.0
    worst_angle = 0.0
    dominance_violations = 0
    instances = 0
    samples_by_dim = {}

    for m, v in _sphere_cases():
        if m.dim not in samples_by_dim:
            samples_by_dim[m.dim] = sphere_samples(m.dim, settings.sphere_samples, seed=settings.seed)
        samples = samples_by_dim[m.dim]
        for _ in range(settings.sphere_instances):
            x = rng.uniform(-1.0, 1.0, m.dim)
            p = rng.normal(0.0, 1.0, m.dim)
            closed = -float(hamiltonian_fn(m, v, x, p, 0.0))
            min_value, argmin, values = sphere_min_objective(x, p, m, v, 0.0, samples)

            worst_value = max(worst_value, abs(min_value - closed))
            worst_angle = max(worst_angle, angular_distance(argmin, closed_form_minimizer(x, p, m)))
            if np.any(values < closed - 1e-12):
                dominance_violations += 1
            instances += 1

    passed = worst_value <= SPHERE_VALUE_TOL and worst_angle <= SPHERE_ANGLE_TOL and dominance_violations == 0
    detail = f"worst angle {worst_angle:.2e} (tol {SPHERE_ANGLE_TOL:g}), dominance violations {dominance_violations}"
    return SuiteResult("sphere", passed, instances, worst_value, SPHERE_VALUE_TOL, detail=detail)


def run_prox_suite(settings: VerifySettings, hamiltonian_fn: Callable = hamiltonian) -> SuiteResult:
    rng = np.random.default_rng([settings.seed, 2])
    m = SinusoidManifold(a=1.0)
    v = QuadraticLeftSpeed()
    ip = IndicatorParams(goal=(1.0, 1.0), sharpness=50.0)
    sigma_dt = 0.1

    n = settings.prox_instances
    x = rng.uniform(-1.0, 1.0, (n, 2))
    beta = rng.normal(0.0, 0.3, (n, 2))
    w, _ = prox_costate(beta, x, 0.0, sigma_dt, ip, m, v)
    threshold = sigma_dt * smooth_indicator(x, ip) * v.speed(x, 0.0)

    def prox_objective(candidates, i):
        d = candidates - beta[i]
        return threshold[i] * np.linalg.norm(candidates, axis=-1) + 0.5 * np.sum(d * d, axis=-1)

    # one shared offset cloud, scaled per instance to cover [0, beta]
    offsets = rng.uniform(-1.0, 1.0, (settings.prox_candidates, 2))
    worst_violation = 0.0
    for i in range(n):
        radius = max(float(np.linalg.norm(beta[i])), 1e-6)
        candidates = beta[i] + radius * offsets
        best_candidate = float(np.min(prox_objective(candidates, i)))
        attained = float(prox_objective(w[i], i))
        worst_violation = max(worst_violation, attained - best_candidate)

    worst_grid = 0.0
    for i in range(min(settings.prox_grid_instances, n)):
        radius = max(float(np.linalg.norm(beta[i])), 1e-6)
        grid_w = numeric_prox(lambda W: threshold[i] * np.linalg.norm(W, axis=-1), beta[i], radius=radius)
        worst_grid = max(worst_grid, float(np.linalg.norm(grid_w - w[i])))

    passed = worst_violation <= 1e-12 and worst_grid <= PROX_GRID_TOL
    detail = f"worst dominance violation {worst_violation:.2e}"
    return SuiteResult("prox", passed, n, worst_grid, PROX_GRID_TOL, detail=detail)


def _gradient_cases():
    manifolds = [FlatManifold(dim=2), SinusoidManifold(a=1.0), GaussianManifold(dim=2), GaussianManifold(dim=3)]
    speeds = [ConstantSpeed(), QuadraticLeftSpeed()]
    return [(m, v) for m in manifolds for v in speeds]


def run_gradient_suite(settings: VerifySettings, hamiltonian_fn: Callable = hamiltonian) -> SuiteResult:
    rng = np.random.default_rng([settings.seed, 3])
    worst = 0.0
    instances = 0

    for m, v in _gradient_cases():
        for _ in range(settings.gradient_instances):
            x = rng.uniform(-1.0, 1.0, m.dim)
            p = rng.normal(0.0, 1.0, m.dim)
            ip = IndicatorParams(goal=x + rng.normal(0.0, 0.2, m.dim), sharpness=50.0)

            def field(X):
                return smooth_indicator(X, ip) * hamiltonian_fn(m, v, X, p, 0.0)

            analytic = grad_x_hamiltonian(m, v, x, p, 0.0, ip)
            numeric = fd_gradient(field, x, h=1e-6)
            scale = max(float(np.linalg.norm(analytic)), 1e-3)
            worst = max(worst, float(np.linalg.norm(numeric - analytic)) / scale)
            instances += 1

    return SuiteResult("gradients", worst <= GRADIENT_TOL, instances, worst, GRADIENT_TOL)


def run_identity_suite(settings: VerifySettings, hamiltonian_fn: Callable = hamiltonian) -> SuiteResult:
    rng = np.random.default_rng([settings.seed, 4])
    worst = 0.0

    for i in range(settings.identity_instances):
        dim = 2 + i % 9
        m = GaussianManifold(dim=dim, amplitude=float(rng.uniform(0.5, 3.0)),
                             center=tuple(rng.uniform(-1.0, 1.0, dim)))
        x = rng.uniform(-1.5, 1.5, dim)
        gamma = m.grad(x)
        # every tenth instance has p parallel to grad M
        p = rng.normal(0.0, 1.0) * gamma if i % 10 == 0 else rng.normal(0.0, 1.0, dim)
        if not np.any(p != 0.0):
            p = rng.normal(0.0, 1.0, dim)

        a = closed_form_minimizer(x, p, m)
        gap = abs(float(direction_objective(a, p, gamma)) + float(metric_norm(gamma, p)))
        unit = abs(float(np.linalg.norm(a)) - 1.0)
        worst = max(worst, gap, unit)

    return SuiteResult("identity", worst <= IDENTITY_TOL, settings.identity_instances, worst, IDENTITY_TOL)


def run_bound_suite(settings: VerifySettings, hamiltonian_fn: Callable = hamiltonian) -> SuiteResult:
    rng = np.random.default_rng([settings.seed, 5])
    cases = [(SinusoidManifold(a=1.0), QuadraticLeftSpeed()), (GaussianManifold(dim=2), QuadraticLeftSpeed())]
    worst_ratio = 0.0
    instances = 0

    for m, v in cases:
        for _ in range(settings.bound_instances):
            nu = rng.uniform(-1.0, 1.0, 2)
            p = rng.normal(0.0, 1.0, 2)
            tau_dt = float(rng.uniform(1e-3, 1e-2))

            radius = 3.0 * float(prox_error_bound(m, v, nu, p, 0.0, tau_dt)) + 1e-9
            x = numeric_prox(lambda X: -tau_dt * hamiltonian_fn(m, v, X, p, 0.0), nu, radius=radius)

            displacement = float(np.linalg.norm(x - nu))
            bound = float(prox_error_bound(m, v, x, p, 0.0, tau_dt))
            ratio = displacement / bound if bound > 0 else (0.0 if displacement == 0 else np.inf)
            worst_ratio = max(worst_ratio, ratio)
            instances += 1

    return SuiteResult("bound", worst_ratio <= BOUND_SLACK, instances, worst_ratio, BOUND_SLACK,
                       detail="worst |x - nu| / bound")


SUITES: Dict[str, Callable] = {
    "sphere": run_sphere_suite,
    "prox": run_prox_suite,
    "gradients": run_gradient_suite,
    "identity": run_identity_suite,
    "bound": run_bound_suite,
}


def run_suites(names: Optional[List[str]] = None, settings: VerifySettings = None,
               hamiltonian_fn: Callable = hamiltonian) -> List[SuiteResult]:
    """
    Run the named suites (all by default) in order.

    `hamiltonian_fn` replaces the Hamiltonian under test; swapping in a
    corrupted one must make the sphere suite fail.
    """
    settings = settings or VerifySettings()
    names = names or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValidationError(f"unknown suite '{unknown[0]}' (choose from {', '.join(SUITES)})", key="suite")

    results = []
    for name in names:
        logger.info(f"Running {name} suite...")
        started = time.perf_counter()
        result = SUITES[name](settings, hamiltonian_fn=hamiltonian_fn)
        result.seconds = time.perf_counter() - started
        status = "passed" if result.passed else "FAILED"
        logger.info(f"  {name}: {status} (worst {result.worst_error:.3e}, tol {result.tolerance:g})")
        results.append(result)
    return results
