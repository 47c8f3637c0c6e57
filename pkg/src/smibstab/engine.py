"""Deterministic fixed-step integration of the plant/controller loop.

Classical RK4 with a fixed step. The controller mode (linear vs
saturated) is evaluated once per step from the step-start state and
frozen for the four substages; the battery clamp itself is algebraic
and applies continuously inside the step. No adaptive stepping and no
event localization: identical inputs give bit-identical trajectories.

Runs abort early with a divergence flag once |delta_tilde| passes
4*pi, far beyond loss of synchronism but still plottable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .controllers import ControllerConfig, ControllerState, Mode
from .model import FaultScenario, PlantState, SmibParams

DIVERGENCE_LIMIT = 4.0 * math.pi


@dataclass(frozen=True)
class SimulationConfig:
    """Integration step, default horizon, and recording stride."""

    dt: float = 1e-3
    horizon: float = 20.0
    record_stride: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.horizon < self.dt:
            raise ValueError(
                f"horizon {self.horizon} must be at least one step {self.dt}"
            )
        if not isinstance(self.record_stride, int) or self.record_stride < 1:
            raise ValueError(
                f"record_stride must be an integer >= 1, got {self.record_stride}"
            )


@dataclass
class Trajectory:
    """Uniformly sampled record of a closed-loop run.

    Samples are spaced dt*record_stride apart. For every sample,
    p_battery = sat(w, b) and mode holds the switching predicate
    evaluated at that sample (True = linear). Uncontrolled runs carry
    zero w/p_battery/x3 and an all-linear mode column.
    """

    dt: float
    record_stride: int
    t: np.ndarray
    delta_tilde_dot: np.ndarray
    delta_tilde: np.ndarray
    x3: np.ndarray
    w: np.ndarray
    p_battery: np.ndarray
    mode: np.ndarray
    diverged: bool = False
    divergence_time: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.t)

    def plant_state(self, i: int) -> PlantState:
        return PlantState(float(self.delta_tilde_dot[i]), float(self.delta_tilde[i]))

    def controller_state(self, i: int) -> ControllerState:
        mode = Mode.LINEAR if self.mode[i] else Mode.SATURATED
        return ControllerState(float(self.x3[i]), mode)


def rk4_step(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    dt: float,
) -> np.ndarray:
    """One classical 4th-order Runge-Kutta update of y' = rhs(t, y)."""
    y = np.asarray(y, dtype=float)
    k1 = np.asarray(rhs(t, y), dtype=float)
    k2 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(rhs(t + dt, y + dt * k3), dtype=float)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _echo_metadata(
    scenario: FaultScenario,
    cfg: Optional[ControllerConfig],
    params: SmibParams,
    sim: SimulationConfig,
) -> dict:
    return {
        "plant": asdict(params),
        "fault": asdict(scenario),
        "controller": None if cfg is None else asdict(cfg),
        "sim": asdict(sim),
    }


def simulate(
    scenario: FaultScenario,
    cfg: Optional[ControllerConfig],
    params: SmibParams,
    sim: Optional[SimulationConfig] = None,
) -> Trajectory:
    """Integrate the post-fault transient and record the trajectory.

    The loop wires the controller input to the plant output (the angle
    deviation) and the plant input to the controller output. cfg=None
    runs the bare plant. Initial state: (delta_dot0, delta0 - delta_bar)
    for the plant, x3 = 0 for the controller.

    The inner loop is written in plain scalar arithmetic; it performs
    the identical classical RK4 update as `rk4_step` but avoids array
    overhead on this 3-state system (the equivalence is pinned by tests).
    """
    if sim is None:
        sim = SimulationConfig()
    dt = sim.dt
    stride = sim.record_stride
    horizon = scenario.horizon if scenario.horizon is not None else sim.horizon
    if horizon < dt:
        raise ValueError(f"horizon {horizon} must be at least one step {dt}")
    n_steps = max(1, round(horizon / dt))

    # Local bindings keep the hot loop free of attribute lookups.
    sin = math.sin
    isfinite = math.isfinite
    M = params.M
    D = params.D
    p_max = params.p_max
    db = params.delta_bar
    g0 = p_max * sin(db)

    controlled = cfg is not None
    if controlled:
        tau, K, L = cfg.tau, cfg.K, cfg.L
        alpha, b, hyst = cfg.alpha, cfg.b, cfg.hysteresis

        def rhs_linear(a: float, c: float, x: float) -> tuple[float, float, float]:
            gc = g0 - p_max * sin(c + db)
            wl = x - L * c - gc
            p = b if wl >= b else -b if wl <= -b else wl
            return (p + gc - D * a) / M, a, (K * c - x) / tau

        def rhs_saturated(a: float, c: float, x: float) -> tuple[float, float, float]:
            gc = g0 - p_max * sin(c + db)
            wl = x - L * c - gc
            p = b if wl >= b else -b if wl <= -b else wl
            return (p + gc - D * a) / M, a, -(alpha / K) * x

    else:

        def rhs_plant(a: float, c: float) -> tuple[float, float]:
            return (g0 - p_max * sin(c + db) - D * a) / M, a

    n_rec_max = n_steps // stride + 1
    rec_t = np.empty(n_rec_max)
    rec_dd = np.empty(n_rec_max)
    rec_dt = np.empty(n_rec_max)
    rec_x3 = np.empty(n_rec_max)
    rec_w = np.empty(n_rec_max)
    rec_pb = np.empty(n_rec_max)
    rec_mode = np.empty(n_rec_max, dtype=bool)

    dd = scenario.delta_dot0
    dtl = scenario.delta0 - db
    x3v = 0.0
    linear = True
    w_val = 0.0
    p_bat = 0.0
    rec = 0
    diverged = False
    div_time: Optional[float] = None
    half = 0.5 * dt
    sixth = dt / 6.0

    for i in range(n_steps + 1):
        finite = isfinite(dd) and isfinite(dtl) and isfinite(x3v)
        if finite:
            if controlled:
                w_val = x3v - L * dtl - (g0 - p_max * sin(dtl + db))
                p_bat = b if w_val >= b else -b if w_val <= -b else w_val
                if hyst > 0.0 and not linear:
                    linear = abs(w_val) < b - hyst
                else:
                    linear = abs(w_val) < b
            if i % stride == 0:
                rec_t[rec] = i * dt
                rec_dd[rec] = dd
                rec_dt[rec] = dtl
                rec_x3[rec] = x3v
                rec_w[rec] = w_val
                rec_pb[rec] = p_bat
                rec_mode[rec] = linear
                rec += 1
        if not finite or abs(dtl) > DIVERGENCE_LIMIT:
            diverged = True
            div_time = i * dt
            break
        if i == n_steps:
            break

        if controlled:
            f = rhs_linear if linear else rhs_saturated
            k1a, k1c, k1x = f(dd, dtl, x3v)
            k2a, k2c, k2x = f(dd + half * k1a, dtl + half * k1c, x3v + half * k1x)
            k3a, k3c, k3x = f(dd + half * k2a, dtl + half * k2c, x3v + half * k2x)
            k4a, k4c, k4x = f(dd + dt * k3a, dtl + dt * k3c, x3v + dt * k3x)
            dd += sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            dtl += sixth * (k1c + 2.0 * (k2c + k3c) + k4c)
            x3v += sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
        else:
            k1a, k1c = rhs_plant(dd, dtl)
            k2a, k2c = rhs_plant(dd + half * k1a, dtl + half * k1c)
            k3a, k3c = rhs_plant(dd + half * k2a, dtl + half * k2c)
            k4a, k4c = rhs_plant(dd + dt * k3a, dtl + dt * k3c)
            dd += sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            dtl += sixth * (k1c + 2.0 * (k2c + k3c) + k4c)

    traj = Trajectory(
        dt=dt,
        record_stride=stride,
        t=rec_t[:rec].copy(),
        delta_tilde_dot=rec_dd[:rec].copy(),
        delta_tilde=rec_dt[:rec].copy(),
        x3=rec_x3[:rec].copy(),
        w=rec_w[:rec].copy(),
        p_battery=rec_pb[:rec].copy(),
        mode=rec_mode[:rec].copy(),
        diverged=diverged,
        divergence_time=div_time,
        metadata=_echo_metadata(scenario, cfg, params, sim),
    )
    traj.metadata["diverged"] = diverged
    traj.metadata["divergence_time"] = div_time
    return traj


def detect_saturation_exit(traj: Trajectory, b: float) -> Optional[float]:
    """Earliest recorded time after which the controller stays unsaturated.

    Returns 0.0 when the run never saturates, and None when saturation
    persists through the final sample.
    """
    saturated = np.flatnonzero(np.abs(traj.w) >= b)
    if len(saturated) == 0:
        return 0.0
    last = int(saturated[-1])
    if last == traj.n_samples - 1:
        return None
    return float(traj.t[last])
