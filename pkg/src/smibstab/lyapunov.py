"""Storage functions, composite Lyapunov functions, and dissipation checks.

The building blocks:

* V1(x1) = (M/2)*delta_tilde_dot^2        plant storage
* V2 = 0                                  storage of the static sine block
* V3(x3) = x3^2/(2K)                      controller storage
* Gamma(dt) = p_max*(cos(db) - dt*sin(db) - cos(dt + db))
                                          potential-energy term, db = delta_bar

Composite candidates along the three loop configurations:

* W      = V1 + Gamma                      bare plant
* W_hat  = V1 + V3 - F                     anti-windup loop, with F the
           piecewise path integral of the controller output over the
           plant output, branch selected by the saturation variable
* W_lead = (1/2) z' Q1 z, z = (ddt, dt, x3)   unsaturated compensator loop

All path integrals have closed forms; `f_integral_quadrature` evaluates
the selected branch by composite Simpson quadrature so tests can
validate the closed forms independently.

`check_dissipation` turns the defining inequality dV/dt <= supply into a
finite-difference test along simulated trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.integrate import simpson

from .controllers import ControllerConfig, ControllerState, saturation_variable
from .model import PlantState, SmibParams

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Trajectory


@dataclass(frozen=True)
class LyapunovSample:
    """One storage-function evaluation along a trajectory."""

    t: float
    value: float
    derivative_estimate: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("Lyapunov value must be finite")


@dataclass(frozen=True)
class DissipationReport:
    """Outcome of a finite-difference dissipation-inequality check."""

    max_violation: float
    violation_times: np.ndarray
    passed: bool
    tolerance: float


def storage_V1(state: PlantState, params: SmibParams) -> float:
    """Kinetic-energy storage (M/2)*delta_tilde_dot^2 of the plant."""
    return 0.5 * params.M * state.delta_tilde_dot**2


def storage_V2(state: object = None) -> float:
    """Storage of the static sine block: identically zero."""
    return 0.0


def storage_V3(x3: float, K: float) -> float:
    """Controller storage x3^2/(2K)."""
    if K <= 0.0:
        raise ValueError(f"K must be positive, got {K}")
    return x3 * x3 / (2.0 * K)


def gamma(delta_tilde: float, params: SmibParams) -> float:
    """Potential-energy term of the bare-plant Lyapunov function; gamma(0) = 0."""
    db = params.delta_bar
    return params.p_max * (
        math.cos(db) - delta_tilde * math.sin(db) - math.cos(delta_tilde + db)
    )


def lyapunov_W(state: PlantState, params: SmibParams) -> float:
    """Bare-plant candidate W = V1 + Gamma(delta_tilde)."""
    return storage_V1(state, params) + gamma(state.delta_tilde, params)


def restoring_integral(delta_tilde: float, params: SmibParams) -> float:
    """Closed form of the path integral of g from 0 to delta_tilde (= -Gamma)."""
    return -gamma(delta_tilde, params)


def F_integral(
    state: PlantState, x3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """Piecewise path integral of the saturated controller output.

    The integration path runs over the plant output xi in [0, delta_tilde];
    the branch is chosen by the saturation variable at the current state:

        w <= -b:  integral of (g(xi) - b)
        |w| < b:  integral of (x3 - L*xi)
        w >= +b:  integral of (g(xi) + b)
    """
    dt = state.delta_tilde
    w = saturation_variable(x3, state.delta_tilde, cfg, params)
    if abs(w) < cfg.b:
        return x3 * dt - 0.5 * cfg.L * dt * dt
    bound = cfg.b if w > 0.0 else -cfg.b
    return restoring_integral(dt, params) + bound * dt


def f_integral_quadrature(
    state: PlantState,
    x3: float,
    cfg: ControllerConfig,
    params: SmibParams,
    panels: int = 64,
) -> float:
    """Composite-Simpson evaluation of the active F branch (test oracle)."""
    if panels < 2 or panels % 2:
        raise ValueError(f"panels must be a positive even count, got {panels}")
    dt = state.delta_tilde
    w = saturation_variable(x3, state.delta_tilde, cfg, params)
    xi = np.linspace(0.0, dt, panels + 1)
    if abs(w) < cfg.b:
        integrand = x3 - cfg.L * xi
    else:
        bound = cfg.b if w > 0.0 else -cfg.b
        g_xi = params.p_max * (
            np.sin(params.delta_bar) - np.sin(xi + params.delta_bar)
        )
        integrand = g_xi + bound
    if dt == 0.0:
        return 0.0
    return float(simpson(integrand, x=xi))


def lyapunov_W_hat(
    state: PlantState,
    ctrl: ControllerState,
    cfg: ControllerConfig,
    params: SmibParams,
) -> float:
    """Anti-windup loop candidate W_hat = V1 + V3 - F."""
    return (
        storage_V1(state, params)
        + storage_V3(ctrl.x3, cfg.K)
        - F_integral(state, ctrl.x3, cfg, params)
    )


def lyapunov_W_lead(
    state: PlantState, x3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """Quadratic candidate (1/2) z' Q1 z for the unsaturated compensator loop."""
    z = np.array([state.delta_tilde_dot, state.delta_tilde, x3])
    q1 = np.array(
        [
            [params.M, 0.0, 0.0],
            [0.0, cfg.L, -1.0],
            [0.0, -1.0, 1.0 / cfg.K],
        ]
    )
    return float(0.5 * z @ q1 @ z)


def lyapunov_samples(traj: "Trajectory", values: np.ndarray) -> list[LyapunovSample]:
    """Package a storage-function series with its derivative estimates."""
    values = np.asarray(values, dtype=float)
    t = traj.t
    n = len(t)
    if len(values) != n:
        raise ValueError(f"series length {len(values)} does not match trajectory {n}")
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    vdot = _derivative_estimates(t, values)
    return [
        LyapunovSample(float(t[i]), float(values[i]), float(vdot[i]))
        for i in range(n)
    ]


def _derivative_estimates(t: np.ndarray, values: np.ndarray) -> np.ndarray:
    h = t[1] - t[0]
    vdot = np.empty(len(t))
    vdot[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    vdot[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    vdot[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return vdot


def check_dissipation(
    traj: "Trajectory",
    storage: np.ndarray,
    supply: np.ndarray,
    tol: float,
    exclude: Optional[np.ndarray] = None,
) -> DissipationReport:
    """Check dV/dt <= supply along a trajectory, within tolerance.

    dV/dt is estimated by second-order finite differences on the
    recorded grid (central in the interior, one-sided at the ends).
    The comparison itself runs on the interior grid: the one-sided
    endpoint estimates carry a doubled error constant and are reported
    but not judged. `exclude` marks further samples left out of the
    comparison, e.g. a window around controller mode switches where
    the derivative jumps.
    """
    storage = np.asarray(storage, dtype=float)
    supply = np.asarray(supply, dtype=float)
    t = traj.t
    n = len(t)
    if len(storage) != n or len(supply) != n:
        raise ValueError(
            f"series lengths {len(storage)}, {len(supply)} do not match "
            f"trajectory length {n}"
        )
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    vdot = _derivative_estimates(t, storage)

    violation = vdot - supply
    included = np.ones(n, dtype=bool)
    included[0] = included[-1] = False
    if exclude is not None:
        exclude = np.asarray(exclude, dtype=bool)
        if len(exclude) != n:
            raise ValueError("exclude mask length does not match trajectory")
        included &= ~exclude
    if not included.any():
        raise ValueError("all samples excluded from dissipation check")

    max_violation = float(violation[included].max())
    bad = included & (violation > tol)
    return DissipationReport(
        max_violation=max_violation,
        violation_times=t[bad].copy(),
        passed=max_violation <= tol,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# Vectorized series over recorded trajectories.

def _gamma_array(delta_tilde: np.ndarray, params: SmibParams) -> np.ndarray:
    db = params.delta_bar
    return params.p_max * (
        math.cos(db) - delta_tilde * math.sin(db) - np.cos(delta_tilde + db)
    )


def _g_array(delta_tilde: np.ndarray, params: SmibParams) -> np.ndarray:
    return params.p_max * (
        math.sin(params.delta_bar) - np.sin(delta_tilde + params.delta_bar)
    )


def v1_series(traj: "Trajectory", params: SmibParams) -> np.ndarray:
    """V1 sampled along a trajectory."""
    return 0.5 * params.M * traj.delta_tilde_dot**2


def v3_series(traj: "Trajectory", cfg: ControllerConfig) -> np.ndarray:
    """V3 sampled along a trajectory."""
    return traj.x3**2 / (2.0 * cfg.K)


def w_series(traj: "Trajectory", params: SmibParams) -> np.ndarray:
    """Bare-plant W sampled along a trajectory."""
    return v1_series(traj, params) + _gamma_array(traj.delta_tilde, params)


def w_hat_series(
    traj: "Trajectory", cfg: ControllerConfig, params: SmibParams
) -> np.ndarray:
    """W_hat sampled along a trajectory, branch following the recorded w."""
    dt = traj.delta_tilde
    f_interior = traj.x3 * dt - 0.5 * cfg.L * dt * dt
    if math.isinf(cfg.b):
        f = f_interior
    else:
        interior = np.abs(traj.w) < cfg.b
        bound = np.where(traj.w > 0.0, cfg.b, -cfg.b)
        f_clamped = -_gamma_array(dt, params) + bound * dt
        f = np.where(interior, f_interior, f_clamped)
    return v1_series(traj, params) + v3_series(traj, cfg) - f


def lyapunov_series(
    traj: "Trajectory", cfg: Optional[ControllerConfig], params: SmibParams
) -> np.ndarray:
    """W for uncontrolled runs, W_hat for controlled ones."""
    if cfg is None:
        return w_series(traj, params)
    return w_hat_series(traj, cfg, params)


def v1_supply_series(traj: "Trajectory", params: SmibParams) -> np.ndarray:
    """Supply u1*dot(y1) of the plant: (g + battery power)*delta_tilde_dot."""
    u1 = _g_array(traj.delta_tilde, params) + traj.p_battery
    return u1 * traj.delta_tilde_dot


def v3_supply_series(traj: "Trajectory", cfg: ControllerConfig) -> np.ndarray:
    """Supply of the anti-windup controller: u3*dot(x3) while linear, else 0."""
    lead_rate = (-traj.x3 + cfg.K * traj.delta_tilde) / cfg.tau
    return np.where(traj.mode, traj.delta_tilde * lead_rate, 0.0)


def switch_exclusion_mask(traj: "Trajectory", pad: int = 1) -> np.ndarray:
    """Samples within `pad` steps of a controller mode switch."""
    mode = np.asarray(traj.mode, dtype=bool)
    n = len(mode)
    mask = np.zeros(n, dtype=bool)
    switches = np.flatnonzero(mode[1:] != mode[:-1]) + 1
    for i in switches:
        mask[max(0, i - pad) : min(n, i + pad + 1)] = True
    return mask
