"""
Primal-Dual Path Solver

Solves the discretized saddle problem

    min_x max_p  g(x_0) + sum_j <p_j, x_j - x_{j-1}> - dt * indicator(x_j) H(x_j, p_j, t_j)

with x_J fixed at the query point, by a PDHG iteration:

1. costate update in transformed variables w = L(x)^T p (vector shrinkage)
2. x_0 pinned to the goal
3. interior state update (pass-through in stage 1, gradient descent in stage 2,
   where a node moves onto the goal if that scores better on the prox objective)
4. x_J pinned to the query point
5. extrapolation z = x_new + kappa (x_new - x_old)

The terminal cost g is the indicator of the goal, so the objective at the
stationary point estimates the minimal travel time.
"""

import dataclasses
import logging
import time
from typing import Optional

import numpy as np

from src.errors import DivergenceError
from src.geometry.metric import metric_factor, solve_lower
from src.hamiltonian.hamiltonian import IndicatorParams, hamiltonian, smooth_indicator
from src.hamiltonian.prox import prox_costate, prox_state_gd, prox_state_passthrough, snap_to_goal
from src.solver.problem import PathSolution, ProblemSpec, SolverConfig, TrajectoryIterate
from src.solver.schedule import anneal, estimate_tau

logger = logging.getLogger(__name__)


def goal_cost(x0, goal) -> float:
    """Terminal cost g: 0 at the goal, +inf elsewhere."""
    return 0.0 if np.array_equal(np.asarray(x0, dtype=float), np.asarray(goal, dtype=float)) else float("inf")


def node_times(spec: ProblemSpec, config: SolverConfig) -> np.ndarray:
    """
    Times at which the speed is evaluated for nodes j = 1..J.

    Node j sits at t_j = j dt measured back from the goal; with time reversal
    the speed is read at the forward time horizon - t_j.
    """
    J = config.steps_for(spec.horizon)
    dt = spec.horizon / J
    t = dt * np.arange(1, J + 1)
    return spec.horizon - t if config.time_reversal else t


def init_trajectory(spec: ProblemSpec, config: SolverConfig, rng: np.random.Generator) -> TrajectoryIterate:
    """Straight line from goal to query point with noisy interior nodes and random costates."""
    J = config.steps_for(spec.horizon)
    n = spec.dim
    s = (np.arange(J + 1) / J)[:, None]
    x = spec.goal + s * (spec.start - spec.goal)
    if J > 1:
        x[1:J] += rng.normal(0.0, config.noise_std, size=(J - 1, n))
    p = rng.normal(0.0, config.noise_std, size=(J, n))

    L = metric_factor(spec.manifold, x[1:]).L
    w = np.einsum("...ji,...j->...i", L, p)
    return TrajectoryIterate(x=x, p=p, w=w, z=x.copy())


def pdhg_step(it: TrajectoryIterate, spec: ProblemSpec, config: SolverConfig, k: int) -> TrajectoryIterate:
    """
    One iteration at index k. `config.tau` should already be resolved;
    solve_path does that once per solve.
    """
    tau = config.tau if config.tau is not None else estimate_tau(spec, config)
    J = it.steps
    dt = spec.horizon / J
    times = node_times(spec, config)
    sched = anneal(k, config)
    ip = IndicatorParams(goal=spec.goal, sharpness=sched.sharpness)
    m, v = spec.manifold, spec.speed

    factor = metric_factor(m, it.x[1:])
    beta = it.w + config.sigma * solve_lower(factor.L, it.z[1:] - it.z[:-1])
    w, p = prox_costate(beta, it.x[1:], times, config.sigma * dt, ip, m, v, factor)

    x = np.empty_like(it.x)
    x[0] = spec.goal
    if J > 1:
        nu = it.x[1:J] - tau * (p[: J - 1] - p[1:J])
        if sched.stage == 1:
            x[1:J] = prox_state_passthrough(nu)
        else:
            try:
                x[1:J] = prox_state_gd(nu, p[: J - 1], times[: J - 1], tau * dt, sched.eta,
                                       config.gd_steps, m, v, ip, start=it.x[1:J])
            except DivergenceError as e:
                raise DivergenceError(str(e), iteration=k)
            if config.goal_snap:
                x[1:J] = snap_to_goal(x[1:J], nu, p[: J - 1], times[: J - 1], tau * dt, m, v, ip)
    x[J] = spec.start

    z = x + config.kappa * (x - it.x)
    new = TrajectoryIterate(x=x, p=p, w=w, z=z)
    if not new.is_finite():
        raise DivergenceError("iterate became non-finite", iteration=k)
    return new


def convergence_change(prev: TrajectoryIterate, new: TrajectoryIterate) -> float:
    """Max-norm change of states and costates between two iterates."""
    dx = np.max(np.abs(new.x - prev.x), initial=0.0)
    dp = np.max(np.abs(new.p - prev.p), initial=0.0)
    return float(max(dx, dp))


def extract_value(it: TrajectoryIterate, spec: ProblemSpec, config: SolverConfig,
                  sharpness: Optional[float] = None, with_indicator: bool = True) -> float:
    """
    Objective at the iterate:

        g(x_0) + sum_j <p_j, x_j - x_{j-1}> - dt indicator(x_j) H(x_j, p_j, t_j)

    The indicator uses `sharpness` (default sharpness0) unless disabled.
    """
    J = it.steps
    dt = spec.horizon / J
    times = node_times(spec, config)
    inner = float(np.sum(it.p * (it.x[1:] - it.x[:-1])))
    H = hamiltonian(spec.manifold, spec.speed, it.x[1:], it.p, times)
    if with_indicator:
        ip = IndicatorParams(goal=spec.goal, sharpness=sharpness if sharpness is not None else config.sharpness0)
        H = smooth_indicator(it.x[1:], ip) * H
    return goal_cost(it.x[0], spec.goal) + inner - dt * float(np.sum(H))


def path_rng(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """Generator for one path; batches key it by path index so results do not depend on scheduling."""
    return np.random.default_rng(seed if stream is None else [seed, stream])


def _trivial_solution(spec: ProblemSpec, config: SolverConfig, started: float, cpu_started: float) -> PathSolution:
    J = config.steps_for(spec.horizon)
    logger.info("Query point equals the goal; trajectory collapses at the goal")
    return PathSolution(
        value=0.0,
        states=np.tile(spec.goal, (J + 1, 1)),
        costates=np.zeros((J, spec.dim)),
        converged=True,
        iterations=0,
        final_change=0.0,
        wall_time=time.perf_counter() - started,
        cpu_time=time.process_time() - cpu_started,
        value_no_indicator=0.0,
        dt=spec.horizon / J,
        horizon=spec.horizon,
    )


def solve_path(spec: ProblemSpec, config: SolverConfig, stream: Optional[int] = None) -> PathSolution:
    """
    Run the iteration until the max-norm change drops below tol or max_iters is reached.

    Args:
        spec: problem to solve
        config: solver settings
        stream: path index for batch runs (selects the random stream)

    Returns:
        PathSolution with the value estimate and internal-order trajectories

    Raises:
        DivergenceError: if an iterate becomes non-finite
    """
    config.validate()
    started = time.perf_counter()
    cpu_started = time.process_time()

    if spec.is_trivial:
        return _trivial_solution(spec, config, started, cpu_started)

    bound = spec.straight_line_bound()
    if spec.horizon < bound:
        logger.warning(
            f"Horizon {spec.horizon:g} is below the straight-line travel bound {bound:.4g}; "
            f"the goal may be unreachable and the value meaningless"
        )

    tau = estimate_tau(spec, config)
    cfg = dataclasses.replace(config, tau=tau)
    J = cfg.steps_for(spec.horizon)
    logger.debug(f"Solving dim={spec.dim} J={J} dt={spec.horizon / J:.4g} tau={tau:.4g} sigma={cfg.sigma:g}")

    it = init_trajectory(spec, cfg, path_rng(cfg.seed, stream))
    change = float("inf")
    converged = False
    iterations = 0
    history = []

    for k in range(cfg.max_iters):
        if k == cfg.stage_switch and k > 0:
            logger.debug(f"Iteration {k}: switching to gradient-descent state updates")
        new = pdhg_step(it, spec, cfg, k)
        change = convergence_change(it, new)
        it = new
        iterations = k + 1

        if k % cfg.log_every == 0:
            history.append((k, change))
            logger.debug(f"Iteration {k}: change={change:.3e}")
        if change < cfg.tol:
            converged = True
            break

    final_sharpness = anneal(max(iterations - 1, 0), cfg).sharpness
    value = extract_value(it, spec, cfg, sharpness=final_sharpness)
    value_plain = extract_value(it, spec, cfg, with_indicator=False)

    if not converged:
        logger.warning(f"No convergence after {iterations} iterations (last change {change:.3e})")

    return PathSolution(
        value=value,
        states=it.x,
        costates=it.p,
        converged=converged,
        iterations=iterations,
        final_change=change,
        wall_time=time.perf_counter() - started,
        cpu_time=time.process_time() - cpu_started,
        value_no_indicator=value_plain,
        tau=tau,
        dt=spec.horizon / J,
        horizon=spec.horizon,
        change_history=history,
    )
