import math

import numpy as np
import pytest

from smibstab.controllers import sat, saturation_variable
from smibstab.engine import (
    DIVERGENCE_LIMIT,
    SimulationConfig,
    detect_saturation_exit,
    rk4_step,
    simulate,
)
from smibstab.model import FaultScenario, PlantState, swing_rhs


class TestRk4Step:
    def test_zero_field(self):
        y = rk4_step(lambda t, y: np.zeros_like(y), 0.0, np.array([1.0, -2.0]), 0.1)
        assert np.array_equal(y, np.array([1.0, -2.0]))

    def test_exponential_decay(self):
        y = rk4_step(lambda t, y: -y, 0.0, np.array([1.0]), 0.1)
        assert y[0] == pytest.approx(math.exp(-0.1), abs=1e-7)

    def test_fourth_order_single_step(self):
        # Error against exp should drop ~32x when halving the step.
        def err(dt):
            y = rk4_step(lambda t, y: -y, 0.0, np.array([1.0]), dt)
            return abs(y[0] - math.exp(-dt))

        ratio = err(0.2) / err(0.1)
        assert 20.0 < ratio < 45.0

    def test_time_dependent_field(self):
        y = rk4_step(lambda t, y: np.array([2.0 * t]), 0.0, np.array([0.0]), 0.5)
        assert y[0] == pytest.approx(0.25, rel=1e-12)


class TestSimulationConfig:
    def test_defaults(self):
        sim = SimulationConfig()
        assert sim.dt == 1e-3 and sim.horizon == 20.0 and sim.record_stride == 1

    @pytest.mark.parametrize(
        "kwargs", [dict(dt=0.0), dict(dt=-1.0), dict(horizon=1e-4), dict(record_stride=0)]
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SimulationConfig(**kwargs)


class TestSimulate:
    def test_equilibrium_stays_fixed(self, params):
        traj = simulate(
            FaultScenario(delta0=params.delta_bar, horizon=1.0), None, params
        )
        assert np.all(traj.delta_tilde == 0.0)
        assert np.all(traj.delta_tilde_dot == 0.0)
        assert not traj.diverged

    def test_determinism(self, params, make_controller, fault):
        cfg = make_controller(0.2)
        a = simulate(fault, cfg, params)
        b = simulate(fault, cfg, params)
        for name in ("t", "delta_tilde", "delta_tilde_dot", "x3", "w", "p_battery"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
        assert np.array_equal(a.mode, b.mode)

    def test_matches_generic_rk4(self, params, make_controller):
        # Re-integrate a switch-free stretch with the generic stepper over
        # the public operations and compare against the engine's inner loop.
        cfg = make_controller(0.2)
        fault = FaultScenario(delta0=0.4, horizon=0.05)
        traj = simulate(fault, cfg, params, SimulationConfig(dt=1e-3, horizon=0.05))
        assert np.all(traj.mode), "window must stay in linear mode"

        def rhs(t, y):
            state = PlantState(y[0], y[1])
            w = saturation_variable(y[2], y[1], cfg, params)
            accel, rate = swing_rhs(state, sat(w, cfg.b), params)
            x3_rate = (-y[2] + cfg.K * y[1]) / cfg.tau
            return np.array([accel, rate, x3_rate])

        y = np.array([0.0, 0.4 - params.delta_bar, 0.0])
        for i in range(traj.n_samples - 1):
            y = rk4_step(rhs, float(traj.t[i]), y, 1e-3)
            assert traj.delta_tilde_dot[i + 1] == pytest.approx(y[0], rel=1e-13, abs=1e-15)
            assert traj.delta_tilde[i + 1] == pytest.approx(y[1], rel=1e-13, abs=1e-15)
            assert traj.x3[i + 1] == pytest.approx(y[2], rel=1e-13, abs=1e-15)

    def test_record_invariants(self, traj_b02, make_controller):
        cfg = make_controller(0.2)
        t = traj_b02.t
        spacing = np.diff(t)
        assert np.all(spacing > 0)
        assert np.allclose(spacing, traj_b02.dt * traj_b02.record_stride, rtol=0, atol=1e-12)
        clipped = np.clip(traj_b02.w, -cfg.b, cfg.b)
        assert np.array_equal(traj_b02.p_battery, clipped)
        assert np.array_equal(traj_b02.mode, np.abs(traj_b02.w) < cfg.b)

    def test_stride_subsamples_same_run(self, params, make_controller, fault):
        cfg = make_controller(0.2)
        dense = simulate(fault, cfg, params, SimulationConfig(dt=1e-3, horizon=2.0))
        coarse = simulate(
            fault, cfg, params, SimulationConfig(dt=1e-3, horizon=2.0, record_stride=10)
        )
        assert coarse.n_samples == dense.n_samples // 10 + 1
        assert np.array_equal(coarse.delta_tilde, dense.delta_tilde[::10])
        assert np.array_equal(coarse.x3, dense.x3[::10])

    def test_divergence_flag(self, traj_unstable):
        assert traj_unstable.diverged
        assert traj_unstable.divergence_time is not None
        assert traj_unstable.divergence_time < 20.0
        assert np.abs(traj_unstable.delta_tilde).max() > DIVERGENCE_LIMIT
        assert traj_unstable.t[-1] == pytest.approx(traj_unstable.divergence_time)
        assert traj_unstable.metadata["diverged"]

    def test_uncontrolled_equals_zero_limit_battery(self, params, fault, make_controller):
        bare = simulate(fault, None, params, SimulationConfig(horizon=2.0))
        idle = simulate(fault, make_controller(0.0), params, SimulationConfig(horizon=2.0))
        assert np.array_equal(bare.delta_tilde, idle.delta_tilde)
        assert np.array_equal(bare.delta_tilde_dot, idle.delta_tilde_dot)
        assert np.all(idle.x3 == 0.0)
        assert np.all(idle.p_battery == 0.0)
        assert not idle.mode.any()  # b = 0 pins the saturated branch

    def test_fault_horizon_overrides_sim(self, params):
        traj = simulate(
            FaultScenario(delta0=0.4, horizon=1.0),
            None,
            params,
            SimulationConfig(dt=1e-3, horizon=20.0),
        )
        assert traj.t[-1] == pytest.approx(1.0)

    def test_metadata_echo(self, traj_b02):
        meta = traj_b02.metadata
        assert meta["plant"]["p_max"] == 1.0
        assert meta["fault"]["delta0"] == 0.2
        assert meta["controller"]["b"] == 0.2
        assert meta["sim"]["dt"] == 1e-3

    def test_state_accessors(self, traj_b02):
        state = traj_b02.plant_state(10)
        assert state.delta_tilde == traj_b02.delta_tilde[10]
        ctrl = traj_b02.controller_state(10)
        assert ctrl.x3 == traj_b02.x3[10]


class TestSaturationExit:
    def test_never_saturated(self, traj_binf):
        assert detect_saturation_exit(traj_binf, math.inf) == 0.0

    def test_small_fault_never_saturates(self, params, make_controller):
        traj = simulate(
            FaultScenario(delta0=params.delta_bar + 0.01, horizon=5.0),
            make_controller(0.3),
            params,
        )
        assert detect_saturation_exit(traj, 0.3) == 0.0

    def test_benchmark_exit(self, traj_b02, make_controller):
        cfg = make_controller(0.2)
        exit_time = detect_saturation_exit(traj_b02, cfg.b)
        assert exit_time is not None
        assert 0.0 < exit_time < 20.0
        after = traj_b02.t > exit_time
        assert np.all(np.abs(traj_b02.w[after]) < cfg.b)
        assert np.all(traj_b02.mode[after])

    def test_persistent_saturation(self, params, make_controller, fault):
        # b = 0 keeps |w| >= b at every sample by construction.
        traj = simulate(fault, make_controller(0.0), params, SimulationConfig(horizon=2.0))
        assert detect_saturation_exit(traj, 0.0) is None
