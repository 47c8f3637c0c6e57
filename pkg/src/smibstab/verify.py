"""Numerical verification of the stability certificates for one scenario.

Each check turns one of the analysis properties into a pass/fail
verdict on a simulated run:

* plant dissipation        dV1/dt <= u1 * dy1/dt
* controller dissipation   dV3/dt <= u3 * dx3/dt (linear), <= 0 (saturated)
* Lyapunov monotonicity    dW/dt <= tol (uncontrolled) or dW_hat/dt <= tol
* energy conservation      W constant when D = 0 without battery action
* Q1 / Q2 definiteness     gain condition K - L < 0
* invariant-set containment  sampled states never leave Omega

Derivatives are finite-difference estimates on the recorded grid, with
a one-step window around controller mode switches excluded (the
candidate jumps across the branch change there). Certificate checks
are skipped for runs that leave the analysis domain (|delta_tilde|
beyond pi): the theory makes no claim there and the fixed-step
derivative estimates are no longer resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lyapunov as lyap
from .engine import Trajectory, simulate
from .model import FaultScenario
from .scenario import ScenarioFile
from .stability import (
    default_invariant_level,
    q1_is_positive_definite,
    q2_is_negative_semidefinite,
    sample_invariant_states,
)

DISSIPATION_TOL = 1e-4
ENERGY_RTOL = 1e-6
CONTAINMENT_SAMPLES = 25


@dataclass(frozen=True)
class CheckResult:
    """One verification line: passed is None when not applicable."""

    name: str
    passed: Optional[bool]
    detail: str


def _in_domain(traj: Trajectory) -> bool:
    return not traj.diverged and float(np.max(np.abs(traj.delta_tilde))) <= math.pi


def run_verification(
    scenario: ScenarioFile,
    dissipation_tol: float = DISSIPATION_TOL,
    energy_rtol: float = ENERGY_RTOL,
    containment_samples: int = CONTAINMENT_SAMPLES,
    seed: int = 0,
) -> list[CheckResult]:
    """Run every applicable certificate check for the scenario."""
    params = scenario.params
    cfg = scenario.controller
    traj = simulate(scenario.fault, cfg, params, scenario.sim)
    in_domain = _in_domain(traj)
    results: list[CheckResult] = []

    skip_note = "skipped: run left the analysis domain (|delta_tilde| > pi)"
    exclude = lyap.switch_exclusion_mask(traj) if cfg is not None else None

    # Plant dissipation inequality.
    if in_domain:
        report = lyap.check_dissipation(
            traj,
            lyap.v1_series(traj, params),
            lyap.v1_supply_series(traj, params),
            dissipation_tol,
            exclude=exclude,
        )
        results.append(
            CheckResult(
                "plant_dissipation",
                report.passed,
                f"max dV1/dt - supply = {report.max_violation:.3e} "
                f"(tol {dissipation_tol:g})",
            )
        )
    else:
        results.append(CheckResult("plant_dissipation", None, skip_note))

    # Controller dissipation inequality.
    if cfg is None:
        results.append(
            CheckResult("controller_dissipation", None, "skipped: no controller")
        )
    elif not in_domain:
        results.append(CheckResult("controller_dissipation", None, skip_note))
    else:
        report = lyap.check_dissipation(
            traj,
            lyap.v3_series(traj, cfg),
            lyap.v3_supply_series(traj, cfg),
            dissipation_tol,
            exclude=exclude,
        )
        results.append(
            CheckResult(
                "controller_dissipation",
                report.passed,
                f"max dV3/dt - supply = {report.max_violation:.3e} "
                f"(tol {dissipation_tol:g})",
            )
        )

    # Monotone decrease of the composite candidate.
    monotone_name = "w_hat_monotone" if cfg is not None else "w_monotone"
    if in_domain:
        values = lyap.lyapunov_series(traj, cfg, params)
        report = lyap.check_dissipation(
            traj,
            values,
            np.zeros(traj.n_samples),
            dissipation_tol,
            exclude=exclude,
        )
        results.append(
            CheckResult(
                monotone_name,
                report.passed,
                f"max dV/dt = {report.max_violation:.3e} (tol {dissipation_tol:g})",
            )
        )
    else:
        results.append(CheckResult(monotone_name, None, skip_note))

    # Energy conservation for the conservative configuration.
    conservative = params.D == 0.0 and (cfg is None or cfg.b == 0.0)
    if not conservative:
        results.append(
            CheckResult(
                "energy_conservation",
                None,
                "skipped: requires D = 0 without battery action",
            )
        )
    elif not in_domain:
        results.append(CheckResult("energy_conservation", None, skip_note))
    else:
        w = lyap.w_series(traj, params)
        drift = float(np.max(np.abs(w - w[0])))
        bound = energy_rtol * max(w[0], 1.0)
        results.append(
            CheckResult(
                "energy_conservation",
                drift <= bound,
                f"max |W - W(0)| = {drift:.3e} (bound {bound:.3e})",
            )
        )

    # Gain-condition definiteness checks.
    if cfg is None:
        results.append(CheckResult("q1_positive_definite", None, "skipped: no controller"))
        results.append(CheckResult("q2_negative_semidefinite", None, "skipped: no controller"))
    else:
        q1_ok = q1_is_positive_definite(cfg, params)
        results.append(
            CheckResult(
                "q1_positive_definite",
                q1_ok,
                f"K - L = {cfg.K - cfg.L:g} (needs < 0)",
            )
        )
        q2_ok = q2_is_negative_semidefinite(cfg, params)
        results.append(
            CheckResult("q2_negative_semidefinite", q2_ok, "eigenvalues <= 1e-12")
        )

    # Forward invariance of Omega for the bare plant.
    c = default_invariant_level(params)
    rng = np.random.default_rng(seed)
    states = sample_invariant_states(params, containment_samples, c, rng)
    angle_bound = math.pi - 2.0 * params.delta_bar
    escaped = 0
    for state in states:
        fault = FaultScenario(
            delta0=params.delta_bar + state.delta_tilde,
            delta_dot0=state.delta_tilde_dot,
        )
        run = simulate(fault, None, params, scenario.sim)
        w_values = lyap.w_series(run, params)
        inside = np.all(w_values <= c) and np.all(
            np.abs(run.delta_tilde) <= angle_bound
        )
        if run.diverged or not inside:
            escaped += 1
    results.append(
        CheckResult(
            "invariant_set_containment",
            escaped == 0,
            f"{len(states) - escaped}/{len(states)} sampled states stayed in "
            f"Omega(c = {c:.6g})",
        )
    )
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed is not False for r in results)
