"""Schedules, step sizes and the primal-dual iteration."""

import dataclasses
import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

import src.solver.pdhg as pdhg
from src.errors import DivergenceError, ValidationError
from src.geometry.manifolds import FlatManifold, SinusoidManifold
from src.hamiltonian.hamiltonian import IndicatorParams, smooth_indicator
from src.hamiltonian.speeds import ConstantSpeed
from src.solver.pdhg import (
    convergence_change,
    extract_value,
    goal_cost,
    init_trajectory,
    node_times,
    path_rng,
    pdhg_step,
    solve_path,
)
from src.solver.problem import (
    ProblemSpec,
    SolverConfig,
    TrajectoryIterate,
    coerce_setting,
    load_solver_config,
    load_yaml_section,
)
from src.solver.schedule import anneal, estimate_tau, gradient_bound_sq, sample_count


@pytest.fixture
def sinusoid_spec(sinusoid, unit_speed):
    return ProblemSpec(start=np.array([-0.5, -0.5]), goal=np.array([0.5, 0.5]), horizon=2.0,
                       manifold=sinusoid, speed=unit_speed)


@pytest.fixture
def flat_spec(flat2, unit_speed):
    return ProblemSpec(start=np.array([1.0, 0.0]), goal=np.zeros(2), horizon=2.0,
                       manifold=flat2, speed=unit_speed)


class TestProblemSpec:
    def test_coordinates_must_match_dimension(self, flat2, unit_speed):
        with pytest.raises(ValidationError) as exc:
            ProblemSpec(start=np.zeros(3), goal=np.zeros(2), horizon=1.0, manifold=flat2, speed=unit_speed)
        assert exc.value.key == "start"

    def test_horizon_must_be_positive(self, flat2, unit_speed):
        with pytest.raises(ValidationError) as exc:
            ProblemSpec(start=np.ones(2), goal=np.zeros(2), horizon=0.0, manifold=flat2, speed=unit_speed)
        assert exc.value.key == "horizon"

    def test_straight_line_bound(self, flat_spec):
        assert flat_spec.straight_line_bound() == pytest.approx(1.0)

    def test_trivial(self, flat2, unit_speed):
        spec = ProblemSpec(start=np.ones(2), goal=np.ones(2), horizon=1.0, manifold=flat2, speed=unit_speed)
        assert spec.is_trivial


class TestSolverConfig:
    def test_steps_from_dt(self):
        cfg = SolverConfig(dt=0.1)
        assert cfg.steps_for(2.0) == 20
        assert cfg.steps_for(2.05) == 21
        assert cfg.dt_for(2.0) == pytest.approx(0.1)

    def test_explicit_steps(self):
        assert SolverConfig(time_steps=7).steps_for(2.0) == 7

    def test_overrides_skip_none(self):
        cfg = SolverConfig().with_overrides(tol=1e-4, tau=None)
        assert cfg.tol == 1e-4 and cfg.tau is None

    def test_unknown_override(self):
        with pytest.raises(ValidationError) as exc:
            SolverConfig().with_overrides(learning_rate=1.0)
        assert exc.value.key == "learning_rate"

    @pytest.mark.parametrize("key,value", [("dt", 0.0), ("kappa", 1.5), ("tau_safety", 0.0),
                                           ("sharpness_max", 10.0), ("anneal_period", 0)])
    def test_invalid_settings(self, key, value):
        with pytest.raises(ValidationError) as exc:
            dataclasses.replace(SolverConfig(), **{key: value}).validate()
        assert exc.value.key == key

    def test_coerce(self):
        assert coerce_setting("max_iters", "100") == 100
        assert coerce_setting("tau", "auto") is None
        assert coerce_setting("time_reversal", "false") is False
        with pytest.raises(ValidationError):
            coerce_setting("tol", "tiny")
        assert coerce_setting("goal_snap", "off") is False
        assert coerce_setting("max_iters", 4.0e4) == 40000
        with pytest.raises(ValidationError) as exc:
            coerce_setting("max_iters", "2.5")
        assert exc.value.key == "max_iters"

    def test_yaml_defaults(self):
        cfg = load_solver_config()
        assert cfg.sigma == 1.0
        assert cfg.stage_switch == 2000
        assert cfg.sharpness_max == 5000.0

    def test_missing_yaml_falls_back(self, tmp_path):
        assert load_solver_config(tmp_path / "missing.yaml") == SolverConfig()
        assert load_yaml_section("experiments", tmp_path / "missing.yaml") == {}

    def test_yaml_overrides(self, tmp_path):
        path = tmp_path / "solver.yaml"
        path.write_text("solver:\n  tol: 1.0e-5\n  max_iters: 500\n  tau: null\n")
        cfg = load_solver_config(path)
        assert cfg.tol == 1e-5 and cfg.max_iters == 500 and cfg.tau is None


class TestAnneal:
    def test_stage_one(self):
        s = anneal(1999, SolverConfig())
        assert s.stage == 1
        assert s.sharpness == 50.0

    def test_stage_two_start(self):
        s = anneal(2000, SolverConfig())
        assert s.stage == 2
        assert s.eta == pytest.approx(0.025)
        assert s.sharpness == 50.0

    def test_one_period_later(self):
        s = anneal(3000, SolverConfig())
        assert s.eta == pytest.approx(0.0125)
        assert s.sharpness == 100.0

    def test_sharpness_capped(self):
        assert anneal(10 ** 6, SolverConfig()).sharpness == 5000.0

    def test_monotone(self):
        cfg = SolverConfig()
        schedules = [anneal(k, cfg) for k in range(0, 20000, 250)]
        assert all(a.eta >= b.eta for a, b in zip(schedules, schedules[1:]))
        assert all(a.sharpness <= b.sharpness for a, b in zip(schedules, schedules[1:]))


class TestStepSize:
    def test_flat(self, flat_spec):
        assert estimate_tau(flat_spec, SolverConfig()) == pytest.approx(0.225)

    def test_sinusoid(self, sinusoid_spec):
        expected = 0.9 / (4.0 * (1.0 + np.pi ** 2))
        assert estimate_tau(sinusoid_spec, SolverConfig()) == pytest.approx(expected)

    def test_sampled_bound_without_analytic(self, unit_speed):
        class Unbounded(SinusoidManifold):
            def gradient_bound_sq(self):
                return None

        spec = ProblemSpec(start=np.array([-0.5, -0.5]), goal=np.array([0.5, 0.5]), horizon=2.0,
                           manifold=Unbounded(a=1.0), speed=unit_speed)
        g2 = gradient_bound_sq(spec)
        assert 0.9 * np.pi ** 2 < g2 <= np.pi ** 2 + 1e-9

    def test_user_tau_wins(self, sinusoid_spec, caplog):
        with caplog.at_level(logging.WARNING):
            tau = estimate_tau(sinusoid_spec, SolverConfig(tau=0.5))
        assert tau == 0.5
        assert "violates" in caplog.text

    def test_sample_count(self):
        assert sample_count(2) == 10 ** 4
        assert sample_count(25) == 10 ** 3


class TestIterate:
    def test_goal_cost(self):
        assert goal_cost([0.0, 0.0], [0.0, 0.0]) == 0.0
        assert goal_cost([0.0, 1e-9], [0.0, 0.0]) == float("inf")

    def test_node_times_reversed(self, flat_spec):
        cfg = SolverConfig(dt=0.5)
        assert_allclose(node_times(flat_spec, cfg), [1.5, 1.0, 0.5, 0.0])
        assert_allclose(node_times(flat_spec, dataclasses.replace(cfg, time_reversal=False)), [0.5, 1.0, 1.5, 2.0])

    def test_init_shapes_and_endpoints(self, sinusoid_spec):
        it = init_trajectory(sinusoid_spec, SolverConfig(), path_rng(0))
        assert it.x.shape == (21, 2) and it.p.shape == (20, 2)
        assert_allclose(it.x[0], sinusoid_spec.goal)
        assert_allclose(it.x[-1], sinusoid_spec.start)
        assert_allclose(it.z, it.x)

    def test_init_without_noise_is_straight(self, sinusoid_spec):
        it = init_trajectory(sinusoid_spec, SolverConfig(noise_std=0.0), path_rng(0))
        assert_allclose(it.x[:, 0], it.x[:, 1])
        assert_allclose(np.diff(it.x, axis=0), np.full((20, 2), -0.05), atol=1e-15)
        assert_allclose(it.p, 0.0)

    def test_init_deterministic_per_stream(self, sinusoid_spec):
        cfg = SolverConfig()
        a = init_trajectory(sinusoid_spec, cfg, path_rng(7, 3))
        b = init_trajectory(sinusoid_spec, cfg, path_rng(7, 3))
        c = init_trajectory(sinusoid_spec, cfg, path_rng(7, 4))
        assert_allclose(a.x, b.x)
        assert not np.allclose(a.p, c.p)

    def test_value_with_zero_costate(self, sinusoid_spec):
        cfg = SolverConfig(noise_std=0.0)
        it = init_trajectory(sinusoid_spec, cfg, path_rng(0))
        ip = IndicatorParams(goal=sinusoid_spec.goal, sharpness=cfg.sharpness0)
        expected = 0.1 * float(np.sum(smooth_indicator(it.x[1:], ip)))
        assert extract_value(it, sinusoid_spec, cfg) == pytest.approx(expected)
        assert extract_value(it, sinusoid_spec, cfg, with_indicator=False) == pytest.approx(2.0)

    def test_step_pins_endpoints(self, sinusoid_spec, quick_config):
        cfg = dataclasses.replace(quick_config, tau=0.05)
        it = init_trajectory(sinusoid_spec, cfg, path_rng(0))
        for k in (0, 30):  # one pass-through step, one descent step
            it = pdhg_step(it, sinusoid_spec, cfg, k)
            assert_allclose(it.x[0], sinusoid_spec.goal)
            assert_allclose(it.x[-1], sinusoid_spec.start)

    def test_passthrough_step(self, flat_spec, quick_config):
        cfg = dataclasses.replace(quick_config, tau=0.1)
        it = init_trajectory(flat_spec, cfg, path_rng(1))
        new = pdhg_step(it, flat_spec, cfg, 0)
        assert_allclose(new.x[1:-1], it.x[1:-1] - 0.1 * (new.p[:-1] - new.p[1:]))
        assert_allclose(new.z, 2.0 * new.x - it.x)

    def test_change(self):
        a = TrajectoryIterate(x=np.zeros((3, 2)), p=np.zeros((2, 2)), w=np.zeros((2, 2)), z=np.zeros((3, 2)))
        b = a.copy()
        b.x[1, 0] = 0.25
        b.p[0, 1] = -0.5
        assert convergence_change(a, b) == 0.5

    def test_descent_failure_reports_iteration(self, sinusoid_spec, quick_config, monkeypatch):
        def explode(*args, **kwargs):
            raise DivergenceError("diverged")

        monkeypatch.setattr(pdhg, "prox_state_gd", explode)
        cfg = dataclasses.replace(quick_config, tau=0.05)
        it = init_trajectory(sinusoid_spec, cfg, path_rng(0))
        with pytest.raises(DivergenceError) as exc:
            pdhg_step(it, sinusoid_spec, cfg, 42)
        assert exc.value.iteration == 42

    def test_non_finite_iterate(self, sinusoid_spec, quick_config, monkeypatch):
        monkeypatch.setattr(pdhg, "prox_state_passthrough", lambda nu: np.full_like(nu, np.nan))
        with pytest.raises(DivergenceError):
            solve_path(sinusoid_spec, quick_config)

    def test_idle_nodes_collapse_onto_goal(self, flat_spec):
        cfg = SolverConfig(tau=0.225, stage_switch=0, sharpness0=1000.0)
        x = np.zeros((21, 2))
        x[1:6, 0] = 0.02
        x[6:, 0] = np.linspace(0.1, 1.0, 15)
        it = TrajectoryIterate(x=x, p=np.zeros((20, 2)), w=np.zeros((20, 2)), z=x.copy())
        new = pdhg_step(it, flat_spec, cfg, 0)
        assert_allclose(new.x[1:6], 0.0, atol=0.0)
        far = np.linalg.norm(x, axis=1) >= 0.3
        assert_allclose(new.x[far], x[far], atol=1e-12)
        assert_allclose(new.x[20], flat_spec.start)

        hovering = pdhg_step(it, flat_spec, dataclasses.replace(cfg, goal_snap=False), 0)
        assert not np.allclose(hovering.x[1:6], 0.0, atol=1e-6)


class TestSolvePath:
    def test_deterministic(self, sinusoid_spec, quick_config):
        a = solve_path(sinusoid_spec, quick_config)
        b = solve_path(sinusoid_spec, quick_config)
        assert a.value == b.value
        assert_allclose(a.states, b.states)
        assert a.iterations == quick_config.max_iters

    def test_metadata(self, sinusoid_spec, quick_config):
        sol = solve_path(sinusoid_spec, quick_config)
        assert sol.states.shape == (21, 2)
        assert sol.dt == pytest.approx(0.1)
        assert sol.tau == pytest.approx(0.9 / (4.0 * (1.0 + np.pi ** 2)))
        assert [k for k, _ in sol.change_history] == [0, 20, 40]
        assert_allclose(sol.path[0], sinusoid_spec.start)
        assert np.isfinite(sol.value) and np.isfinite(sol.value_no_indicator)

    def test_trivial_problem(self, flat2, unit_speed, quick_config):
        spec = ProblemSpec(start=np.ones(2), goal=np.ones(2), horizon=1.0, manifold=flat2, speed=unit_speed)
        sol = solve_path(spec, quick_config)
        assert sol.value == 0.0
        assert sol.converged and sol.iterations == 0
        assert_allclose(sol.states, 1.0)

    def test_converges_with_loose_tolerance(self, flat_spec, quick_config):
        sol = solve_path(flat_spec, dataclasses.replace(quick_config, tol=10.0))
        assert sol.converged and sol.iterations == 1

    def test_symmetry_line_is_preserved(self, sinusoid, unit_speed, quick_config):
        # grad M has no y-component on y = 0, so the path never leaves it
        spec = ProblemSpec(start=np.array([-0.5, 0.0]), goal=np.array([0.5, 0.0]), horizon=2.0,
                           manifold=sinusoid, speed=unit_speed)
        sol = solve_path(spec, dataclasses.replace(quick_config, noise_std=0.0))
        assert_allclose(sol.states[:, 1], 0.0, atol=1e-14)
        assert_allclose(sol.costates[:, 1], 0.0, atol=1e-14)

    def test_diagonal_reflection(self, sinusoid, unit_speed, quick_config):
        # M is invariant under (x, y) -> (y + 1/2, x - 1/2), reflection across y = x - 1/2
        def reflect(a):
            a = np.asarray(a, dtype=float)
            return np.stack([a[..., 1] + 0.5, a[..., 0] - 0.5], axis=-1)

        cfg = dataclasses.replace(quick_config, noise_std=0.0, tau=0.02)
        start, goal = np.array([-0.5, -0.2]), np.array([0.6, 0.3])
        a = solve_path(ProblemSpec(start=start, goal=goal, horizon=2.0, manifold=sinusoid, speed=unit_speed), cfg)
        b = solve_path(ProblemSpec(start=reflect(start), goal=reflect(goal), horizon=2.0,
                                   manifold=sinusoid, speed=unit_speed), cfg)
        assert_allclose(b.states, reflect(a.states), atol=1e-8)
        assert_allclose(b.costates, a.costates[:, ::-1], atol=1e-8)
        assert b.value == pytest.approx(a.value, abs=1e-8)

    def test_short_horizon_warns(self, flat2, unit_speed, quick_config, caplog):
        spec = ProblemSpec(start=np.array([3.0, 0.0]), goal=np.zeros(2), horizon=1.0,
                           manifold=flat2, speed=unit_speed)
        with caplog.at_level(logging.WARNING):
            solve_path(spec, quick_config)
        assert "straight-line travel bound" in caplog.text

    def test_invalid_config(self, flat_spec):
        with pytest.raises(ValidationError):
            solve_path(flat_spec, SolverConfig(sigma=-1.0))

    def test_stream_changes_start_only_through_noise(self, flat_spec, quick_config):
        quiet = dataclasses.replace(quick_config, noise_std=0.0)
        a = solve_path(flat_spec, quiet, stream=0)
        b = solve_path(flat_spec, quiet, stream=5)
        assert_allclose(a.states, b.states)


@pytest.mark.slow
def test_flat_value_matches_distance(unit_speed):
    spec = ProblemSpec(start=np.array([0.6, -0.8]), goal=np.zeros(2), horizon=2.0,
                       manifold=FlatManifold(dim=2), speed=ConstantSpeed(c=1.0))
    sol = solve_path(spec, SolverConfig(max_iters=20000))
    assert sol.value == pytest.approx(1.0, abs=4e-2)
