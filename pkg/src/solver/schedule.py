"""
Schedules and Step Sizes

anneal:        stage switch (pass-through -> gradient descent), halving of the
               descent rate and growth of the indicator sharpness per period
estimate_tau:  primal step from the rule sigma tau < 1 / (4 max(1 + |grad M|^2))
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from src.solver.problem import ProblemSpec, SolverConfig

logger = logging.getLogger(__name__)

BOX_INFLATION = 1.5
SEGMENT_SAMPLES = 257


@dataclass(frozen=True)
class Schedule:
    eta: float
    sharpness: float
    stage: int


def anneal(k: int, config: SolverConfig) -> Schedule:
    """
    Stage 1 (k < stage_switch): pass-through state updates with B = sharpness0.
    Stage 2: every anneal_period iterations eta halves and B grows by
    sharpness_step, capped at sharpness_max.
    """
    if k < config.stage_switch:
        return Schedule(eta=config.eta0, sharpness=config.sharpness0, stage=1)

    periods = (k - config.stage_switch) // config.anneal_period
    eta = config.eta0 * 2.0 ** (-periods)
    sharpness = min(config.sharpness0 + config.sharpness_step * periods, config.sharpness_max)
    return Schedule(eta=eta, sharpness=sharpness, stage=2)


def sample_count(dim: int) -> int:
    return 10 ** 4 if dim <= 10 else 10 ** 3


def gradient_bound_sq(spec: ProblemSpec, seed: int = 0) -> float:
    """
    Estimate max |grad M|^2 over the bounding box of start and goal inflated by
    50%, from low-discrepancy samples plus the straight segment. Builtin
    manifolds contribute their analytic bound.
    """
    n = spec.dim
    lo = np.minimum(spec.start, spec.goal)
    hi = np.maximum(spec.start, spec.goal)
    center = 0.5 * (lo + hi)
    width = hi - lo
    half = 0.5 * BOX_INFLATION * width
    # degenerate axes still get some extent
    half = np.maximum(half, 0.1 * max(float(width.max()), 1.0))

    sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
    # Sobol points stay balanced only in powers of two
    m = int(np.ceil(np.log2(sample_count(n))))
    box = qmc.scale(sampler.random_base2(m), center - half, center + half)
    s = np.linspace(0.0, 1.0, SEGMENT_SAMPLES)[:, None]
    segment = spec.goal + s * (spec.start - spec.goal)

    points = np.vstack([box, segment])
    g = spec.manifold.grad(points)
    bound = float(np.max(np.sum(g * g, axis=-1)))

    analytic = spec.manifold.gradient_bound_sq()
    if analytic is not None:
        bound = max(bound, analytic)
    return bound


def step_size_limit(spec: ProblemSpec, config: SolverConfig) -> float:
    """Largest tau allowed by sigma tau < 1 / (4 (1 + G^2))."""
    g2 = gradient_bound_sq(spec, seed=config.seed)
    return 1.0 / (4.0 * config.sigma * (1.0 + g2))


def estimate_tau(spec: ProblemSpec, config: SolverConfig) -> float:
    """Primal step: the user's tau if given, else safety * 1 / (4 sigma (1 + G^2))."""
    limit = step_size_limit(spec, config)
    if config.tau is not None:
        if config.tau >= limit:
            logger.warning(f"tau={config.tau:g} violates the step-size rule (limit {limit:.4g}); using it anyway")
        return float(config.tau)

    tau = config.tau_safety * limit
    logger.info(f"Estimated tau={tau:.5g} (sigma={config.sigma:g})")
    return tau
