"""Analytic stability predicates and the simulation oracle.

The equal-area criterion, the invariant-set level bound c and region
membership, and the definiteness checks behind the compensator gain
condition K - L < 0. A brute-force simulation classifier cross-checks
the analytic predicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .controllers import ControllerConfig
from .engine import SimulationConfig, Trajectory, simulate
from .lyapunov import lyapunov_W
from .model import FaultScenario, PlantState, SmibParams

# Slack added to the invariant-set angle bound when classifying bounded
# oscillations; well below the gap to the pi divergence threshold.
REGION_MARGIN = 0.05
# Final-window settling thresholds for runs expected to decay.
SETTLE_WINDOW = 2.0
SETTLE_TOL = 0.02
CONVERGED_TOL = 0.01


class Classification(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class StabilityReport:
    """Analytic predicates plus the empirical verdict for one scenario."""

    eac_margin: float
    c_max: float
    in_omega: bool
    q1_positive_definite: Optional[bool]
    q2_negative_semidefinite: Optional[bool]
    empirical_stable: bool
    empirical_converged: bool
    classification: Classification


def eac_margin(delta0: float, params: SmibParams) -> float:
    """Equal-area stability margin; negative means stable.

    (pi - delta_bar - delta0)*sin(delta_bar) - cos(delta_bar) - cos(delta0),
    the accelerating-minus-available-decelerating area for a post-fault
    start at rest. Valid for the undamped, uncontrolled plant.
    """
    db = params.delta_bar
    return (math.pi - db - delta0) * math.sin(db) - math.cos(db) - math.cos(delta0)


def c_max(params: SmibParams) -> float:
    """Supremum of admissible invariant-set levels: Gamma at pi - 2*delta_bar."""
    db = params.delta_bar
    if not 0.0 < db < math.pi / 2.0:
        raise ValueError(f"delta_bar must lie in (0, pi/2), got {db}")
    return params.p_max * (
        2.0 * math.cos(db) - (math.pi - 2.0 * db) * math.sin(db)
    )


def in_invariant_set(state: PlantState, c: float, params: SmibParams) -> bool:
    """Membership in Omega = {W <= c} cut to |delta_tilde| <= pi - 2*delta_bar."""
    upper = c_max(params)
    if not 0.0 < c < upper:
        raise ValueError(f"level c must lie in (0, {upper:.6g}), got {c}")
    angle_bound = math.pi - 2.0 * params.delta_bar
    return (
        lyapunov_W(state, params) <= c
        and abs(state.delta_tilde) <= angle_bound
    )


def default_invariant_level(params: SmibParams) -> float:
    """Largest level used in practice: 0.99 of the strict supremum."""
    return 0.99 * c_max(params)


def q1_matrix(cfg: ControllerConfig, params: SmibParams) -> np.ndarray:
    """Quadratic form of the compensator-loop Lyapunov candidate."""
    return np.array(
        [
            [params.M, 0.0, 0.0],
            [0.0, cfg.L, -1.0],
            [0.0, -1.0, 1.0 / cfg.K],
        ]
    )


def q1_is_positive_definite(cfg: ControllerConfig, params: SmibParams) -> bool:
    """Leading principal minors of Q1: M > 0, M*L > 0, M*(L/K - 1) > 0."""
    return params.M > 0.0 and cfg.L > 0.0 and cfg.L / cfg.K - 1.0 > 0.0


def q2_matrix(cfg: ControllerConfig, params: SmibParams) -> np.ndarray:
    """Quadratic form of the candidate's time derivative."""
    return np.array(
        [
            [-params.D, 0.0, 0.0],
            [0.0, -cfg.K / cfg.tau, 1.0 / cfg.tau],
            [0.0, 1.0 / cfg.tau, -1.0 / (cfg.tau * cfg.K)],
        ]
    )


def q2_is_negative_semidefinite(
    cfg: ControllerConfig, params: SmibParams, tol: float = 1e-12
) -> bool:
    """All eigenvalues of Q2 below +tol.

    The lower 2x2 block has determinant identically zero, so Q2 is never
    strictly negative definite; semidefiniteness is the meaningful check.
    """
    eigenvalues = np.linalg.eigvalsh(q2_matrix(cfg, params))
    return bool(np.all(eigenvalues <= tol))


def classify_trajectory(
    traj: Trajectory,
    params: SmibParams,
    cfg: Optional[ControllerConfig] = None,
) -> Classification:
    """Label a recorded run as stable, unstable, or undecided.

    Unstable once |delta_tilde| passes pi (synchronism lost). Stable
    requires the swing to stay inside the invariant-set angle bound
    (plus a small margin); runs expected to decay (damped or actively
    controlled) must additionally settle in the final window.
    """
    abs_dt = np.abs(traj.delta_tilde)
    if traj.diverged or abs_dt.max() > math.pi:
        return Classification.UNSTABLE
    in_region = abs_dt.max() <= math.pi - 2.0 * params.delta_bar + REGION_MARGIN
    decays = params.D > 0.0 or (cfg is not None and cfg.b > 0.0)
    if not decays:
        return Classification.STABLE if in_region else Classification.UNDECIDED
    if not in_region:
        return Classification.UNDECIDED
    window = _final_window(traj)
    drift = float(np.mean(np.abs(traj.delta_tilde[window] - traj.delta_tilde[-1])))
    settled = drift < SETTLE_TOL and abs(traj.delta_tilde[-1]) < math.pi / 2.0
    return Classification.STABLE if settled else Classification.UNDECIDED


def _final_window(traj: Trajectory) -> np.ndarray:
    span = traj.t[-1] - traj.t[0]
    width = min(SETTLE_WINDOW, span / 4.0) if span > 0 else 0.0
    return traj.t >= traj.t[-1] - width


def is_converged(traj: Trajectory, tol: float = CONVERGED_TOL) -> bool:
    """Whether |delta_tilde| stays below tol over the final window."""
    window = _final_window(traj)
    return bool(np.max(np.abs(traj.delta_tilde[window])) < tol)


def classify_by_simulation(
    scenario: FaultScenario,
    cfg: Optional[ControllerConfig],
    params: SmibParams,
    sim: Optional[SimulationConfig] = None,
) -> Classification:
    """Simulate the scenario and classify the resulting trajectory."""
    traj = simulate(scenario, cfg, params, sim)
    return classify_trajectory(traj, params, cfg)


def sample_invariant_states(
    params: SmibParams,
    n: int,
    c: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> list[PlantState]:
    """Rejection-sample n states uniformly from the invariant set at level c."""
    if c is None:
        c = default_invariant_level(params)
    upper = c_max(params)
    if not 0.0 < c < upper:
        raise ValueError(f"level c must lie in (0, {upper:.6g}), got {c}")
    if rng is None:
        rng = np.random.default_rng(0)
    angle_bound = math.pi - 2.0 * params.delta_bar
    rate_bound = math.sqrt(2.0 * c / params.M)
    states: list[PlantState] = []
    attempts = 0
    while len(states) < n:
        attempts += 1
        if attempts > 1000 * max(n, 1):
            raise RuntimeError("invariant-set sampling failed to converge")
        candidate = PlantState(
            rng.uniform(-rate_bound, rate_bound),
            rng.uniform(-angle_bound, angle_bound),
        )
        if lyapunov_W(candidate, params) <= c:
            states.append(candidate)
    return states


def build_report(
    scenario: FaultScenario,
    cfg: Optional[ControllerConfig],
    params: SmibParams,
    sim: Optional[SimulationConfig] = None,
    traj: Optional[Trajectory] = None,
) -> StabilityReport:
    """Assemble the analytic predicates and the empirical classification."""
    if traj is None:
        traj = simulate(scenario, cfg, params, sim)
    classification = classify_trajectory(traj, params, cfg)
    initial = PlantState(scenario.delta_dot0, scenario.delta0 - params.delta_bar)
    return StabilityReport(
        eac_margin=eac_margin(scenario.delta0, params),
        c_max=c_max(params),
        in_omega=in_invariant_set(initial, default_invariant_level(params), params),
        q1_positive_definite=(
            None if cfg is None else q1_is_positive_definite(cfg, params)
        ),
        q2_negative_semidefinite=(
            None if cfg is None else q2_is_negative_semidefinite(cfg, params)
        ),
        empirical_stable=classification is Classification.STABLE,
        empirical_converged=is_converged(traj),
        classification=classification,
    )
