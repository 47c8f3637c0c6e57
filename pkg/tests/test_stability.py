import math

import numpy as np
import pytest

from smibstab.lyapunov import lyapunov_W
from smibstab.model import FaultScenario, PlantState, SmibParams
from smibstab.stability import (
    Classification,
    build_report,
    c_max,
    classify_by_simulation,
    classify_trajectory,
    default_invariant_level,
    eac_margin,
    in_invariant_set,
    q1_is_positive_definite,
    q1_matrix,
    q2_is_negative_semidefinite,
    q2_matrix,
    sample_invariant_states,
)


class TestEacMargin:
    def test_at_equilibrium_angle(self, params):
        margin = eac_margin(params.delta_bar, params)
        assert margin == pytest.approx(-0.17039822593074505, rel=1e-12)
        assert margin == pytest.approx(-c_max(params) / params.p_max, rel=1e-12)

    def test_benchmark_fault_unstable(self, params):
        assert eac_margin(0.2, params) == pytest.approx(
            0.031371370629303064, rel=1e-12
        )

    def test_moderate_fault_stable(self, params):
        assert eac_margin(0.4, params) == pytest.approx(
            -0.06962304553234022, rel=1e-12
        )


class TestCMax:
    def test_benchmark(self, params):
        assert c_max(params) == pytest.approx(0.17039822593074505, rel=1e-12)

    def test_vanishes_at_peak_transfer(self):
        delta_bar = math.pi / 2 - 1e-6
        p = SmibParams(
            H=4.0, omega0=100 * math.pi, D=0.0,
            p_mech=math.sin(delta_bar), p_max=1.0, delta_bar=delta_bar,
        )
        assert c_max(p) == pytest.approx(0.0, abs=1e-11)

    def test_small_angle_limit(self):
        delta_bar = 1e-9
        p = SmibParams(
            H=4.0, omega0=100 * math.pi, D=0.0,
            p_mech=math.sin(delta_bar) * 2.0, p_max=2.0, delta_bar=delta_bar,
        )
        assert c_max(p) == pytest.approx(2.0 * p.p_max, rel=1e-6)

    def test_positive_for_valid_params(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            delta_bar = float(rng.uniform(1e-3, math.pi / 2 - 1e-3))
            p_max = float(rng.uniform(0.1, 5.0))
            p = SmibParams(
                H=1.0, omega0=1.0, D=0.0,
                p_mech=p_max * math.sin(delta_bar), p_max=p_max, delta_bar=delta_bar,
            )
            assert c_max(p) > 0.0


class TestInvariantSet:
    def test_origin_inside(self, params):
        assert in_invariant_set(PlantState(0.0, 0.0), 0.1, params)

    def test_fault_state_outside(self, params):
        # W = 0.2018 exceeds any admissible level.
        assert not in_invariant_set(PlantState(0.0, -0.727295), 0.17, params)

    def test_interior_point(self, params):
        assert in_invariant_set(PlantState(0.0, 0.3), 0.17, params)

    def test_angle_bound_enforced(self, params):
        # Low energy but beyond the angle cut.
        state = PlantState(0.0, math.pi - 2 * params.delta_bar + 0.01)
        if lyapunov_W(state, params) <= 0.17:
            assert not in_invariant_set(state, 0.17, params)

    def test_level_range_enforced(self, params):
        with pytest.raises(ValueError):
            in_invariant_set(PlantState(0.0, 0.0), 0.0, params)
        with pytest.raises(ValueError):
            in_invariant_set(PlantState(0.0, 0.0), c_max(params), params)

    def test_sampler_respects_membership(self, params):
        rng = np.random.default_rng(22)
        c = default_invariant_level(params)
        states = sample_invariant_states(params, 100, c, rng)
        assert len(states) == 100
        for s in states:
            assert in_invariant_set(s, c, params)

    def test_consistency_with_equal_area(self, params):
        # Membership of the at-rest post-fault state at the limiting level
        # agrees with the sign of the equal-area margin.
        db = params.delta_bar
        c = c_max(params) * (1.0 - 1e-9)
        for delta0 in np.arange(2 * db - math.pi + 0.015, math.pi - db - 0.01, 0.025):
            margin = eac_margin(float(delta0), params)
            if abs(margin) < 1e-6:
                continue
            member = in_invariant_set(
                PlantState(0.0, float(delta0) - db), c, params
            )
            assert member == (margin < 0.0), f"delta0={delta0}, margin={margin}"


class TestQ1:
    def test_benchmark_gains(self, params, make_controller):
        assert q1_is_positive_definite(make_controller(0.2), params)

    def test_reversed_gains(self, params, make_controller):
        assert not q1_is_positive_definite(make_controller(0.2, K=1.2), params)

    def test_singular_boundary(self, params, make_controller):
        assert not q1_is_positive_definite(make_controller(0.2, K=1.1, L=1.1), params)

    def test_structure(self, params, make_controller):
        cfg = make_controller(0.2)
        q1 = q1_matrix(cfg, params)
        expected = np.array(
            [[params.M, 0, 0], [0, cfg.L, -1], [0, -1, 1 / cfg.K]]
        )
        assert np.allclose(q1, expected, rtol=0, atol=0)

    def test_minors_agree_with_eigenvalues(self, params, make_controller):
        rng = np.random.default_rng(23)
        for _ in range(200):
            cfg = make_controller(
                0.2, K=float(rng.uniform(0.05, 3.0)), L=float(rng.uniform(0.05, 3.0))
            )
            by_minors = q1_is_positive_definite(cfg, params)
            eigenvalues = np.linalg.eigvalsh(q1_matrix(cfg, params))
            by_eigen = bool(eigenvalues.min() > 1e-12)
            assert by_minors == by_eigen


class TestQ2:
    def test_undamped_has_zero_eigenvalue(self, params, make_controller):
        cfg = make_controller(0.2)
        assert q2_is_negative_semidefinite(cfg, params)
        eigenvalues = np.linalg.eigvalsh(q2_matrix(cfg, params))
        assert np.min(np.abs(eigenvalues)) <= 1e-10

    def test_damped_example(self, make_controller):
        p = SmibParams.from_operating_point(
            H=0.5, f0=1.0, D=1.0, p_mech=0.5, p_max=1.0, omega0=1.0
        )
        cfg = make_controller(0.2, tau=1.0, K=1.0)
        eigenvalues = np.sort(np.linalg.eigvalsh(q2_matrix(cfg, p)))
        assert eigenvalues == pytest.approx([-2.0, -1.0, 0.0], abs=1e-12)

    def test_block_determinant_identically_zero(self, params, make_controller):
        rng = np.random.default_rng(24)
        for _ in range(50):
            cfg = make_controller(
                0.2,
                tau=float(rng.uniform(0.02, 2.0)),
                K=float(rng.uniform(0.05, 4.0)),
            )
            q2 = q2_matrix(cfg, params)
            det = q2[1, 1] * q2[2, 2] - q2[1, 2] * q2[2, 1]
            assert det == pytest.approx(0.0, abs=1e-9 * (1.0 / cfg.tau) ** 2)
            assert q2_is_negative_semidefinite(cfg, params)


class TestClassification:
    def test_start_at_equilibrium(self, params):
        label = classify_by_simulation(
            FaultScenario(delta0=params.delta_bar), None, params
        )
        assert label is Classification.STABLE

    def test_benchmark_fault_uncontrolled(self, params, traj_unstable):
        assert classify_trajectory(traj_unstable, params) is Classification.UNSTABLE

    def test_benchmark_fault_controlled(self, params, make_controller, traj_b02):
        cfg = make_controller(0.2)
        assert classify_trajectory(traj_b02, params, cfg) is Classification.STABLE

    def test_short_horizon_is_undecided(self, params, make_controller):
        label = classify_by_simulation(
            FaultScenario(delta0=0.2, horizon=0.5),
            make_controller(0.2),
            params,
        )
        assert label is Classification.UNDECIDED

    def test_bounded_oscillation_with_idle_battery(self, params, make_controller):
        # b = 0 never decays; boundedness alone should classify stable.
        label = classify_by_simulation(
            FaultScenario(delta0=0.4), make_controller(0.0), params
        )
        assert label is Classification.STABLE


class TestBuildReport:
    def test_controlled_report(self, params, make_controller, fault, traj_b02):
        report = build_report(fault, make_controller(0.2), params, traj=traj_b02)
        assert report.classification is Classification.STABLE
        assert report.empirical_stable and report.empirical_converged
        assert report.q1_positive_definite is True
        assert report.q2_negative_semidefinite is True
        assert not report.in_omega
        assert report.eac_margin > 0.0
        assert report.c_max == pytest.approx(0.17039822593074505, rel=1e-12)

    def test_uncontrolled_report(self, params, fault, traj_unstable):
        report = build_report(fault, None, params, traj=traj_unstable)
        assert report.classification is Classification.UNSTABLE
        assert not report.empirical_stable
        assert report.q1_positive_definite is None
        assert report.q2_negative_semidefinite is None

    def test_in_omega_for_interior_start(self, params):
        fault = FaultScenario(delta0=params.delta_bar + 0.3, horizon=5.0)
        report = build_report(fault, None, params)
        assert report.in_omega
        assert report.classification is Classification.STABLE
