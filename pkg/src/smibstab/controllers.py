"""Angle-feedback battery controllers for the SMIB plant.

Two controllers act on the measured angle deviation u3:

* a first-order phase-lead compensator
      dot(x3) = (-x3 + K*u3) / tau,      y3 = x3 - L*u3
  which stabilizes the loop globally when K - L < 0, and

* its anti-windup variant for a battery with output limit b: the output
  is clamped to within b of the nominal nonlinear feedback g(u3), and
  while the clamp is active the internal state decays instead of
  integrating the input,
      dot(x3) = (-x3 + K*u3)/tau   if |w| <  b   (linear mode)
      dot(x3) = -(alpha/K)*x3      if |w| >= b   (saturated mode)
  with saturation variable w = x3 - L*u3 - g(u3). The battery power
  deviation actually commanded is sat(w, b), so it never exceeds b.

b = 0 removes the storage device entirely (output reduces to g, the
bare plant is recovered); b = inf recovers the unsaturated compensator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import SmibParams


class Mode(Enum):
    """Active branch of the anti-windup controller."""

    LINEAR = "linear"
    SATURATED = "saturated"


@dataclass(frozen=True)
class ControllerConfig:
    """Gains and limits of the battery angle-feedback controller.

    Attributes:
        tau: compensator time constant (s).
        K: compensator gain.
        L: feedthrough gain.
        alpha: state decay gain while saturated (1/s scale).
        b: battery power limit (per-unit); may be math.inf.
        hysteresis: optional dead band on the mode switch. Leaving
            saturation requires |w| < b - hysteresis. Default 0 gives the
            sharp memoryless threshold.
    """

    tau: float
    K: float
    L: float
    alpha: float
    b: float
    hysteresis: float = 0.0

    def __post_init__(self) -> None:
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.K <= 0.0:
            raise ValueError(f"K must be positive, got {self.K}")
        if self.L <= 0.0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.b < 0.0 or math.isnan(self.b):
            raise ValueError(f"b must be >= 0 (math.inf allowed), got {self.b}")
        if self.hysteresis < 0.0:
            raise ValueError(f"hysteresis must be >= 0, got {self.hysteresis}")

    @property
    def is_stabilizing(self) -> bool:
        """Gain design condition K - L < 0 for global asymptotic stability."""
        return self.K - self.L < 0.0


@dataclass(frozen=True)
class ControllerState:
    """Scalar controller state with the mode active since the last step boundary."""

    x3: float
    mode: Mode = Mode.LINEAR

    def __post_init__(self) -> None:
        if not math.isfinite(self.x3):
            raise ValueError("controller state must be finite")


def sat(w: float, b: float) -> float:
    """Clamp w to [-b, b]; the identity when b is infinite."""
    if b < 0.0:
        raise ValueError(f"saturation bound must be >= 0, got {b}")
    if w >= b:
        return b
    if w <= -b:
        return -b
    return w


def nominal_feedback_g(u3: float, params: SmibParams) -> float:
    """Nominal nonlinear feedback cancelled by feedback linearization.

    g(u3) = p_max*sin(delta_bar) - p_max*sin(u3 + delta_bar); equals the
    plant's sine restoring term evaluated at angle deviation u3.
    """
    return params.p_max * (
        math.sin(params.delta_bar) - math.sin(u3 + params.delta_bar)
    )


def saturation_variable(
    x3: float, u3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """w = x3 - L*u3 - g(u3), the signal compared against the limit b."""
    return x3 - cfg.L * u3 - nominal_feedback_g(u3, params)


def controller_mode(
    x3: float,
    u3: float,
    cfg: ControllerConfig,
    params: SmibParams,
    prev: Mode | None = None,
) -> Mode:
    """Mode implied by the saturation variable at the current state.

    With hysteresis = 0 this is the memoryless predicate |w| < b. With a
    positive hysteresis, a previously saturated controller stays
    saturated until |w| < b - hysteresis.
    """
    w = saturation_variable(x3, u3, cfg, params)
    if prev is Mode.SATURATED and cfg.hysteresis > 0.0:
        return Mode.LINEAR if abs(w) < cfg.b - cfg.hysteresis else Mode.SATURATED
    return Mode.LINEAR if abs(w) < cfg.b else Mode.SATURATED


def phase_lead_rhs(x3: float, u3: float, cfg: ControllerConfig) -> float:
    """State derivative of the unsaturated compensator: (-x3 + K*u3)/tau."""
    return (-x3 + cfg.K * u3) / cfg.tau


def phase_lead_output(x3: float, u3: float, cfg: ControllerConfig) -> float:
    """Output of the unsaturated compensator: y3 = x3 - L*u3."""
    return x3 - cfg.L * u3


def saturated_rhs(
    state: ControllerState, u3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """State derivative of the anti-windup controller.

    The branch follows the instantaneous predicate |w| < b; during
    saturation the state slides down the storage-function gradient,
    dot(x3) = -alpha * d/dx3 [x3^2/(2K)] = -(alpha/K)*x3.
    """
    w = saturation_variable(state.x3, u3, cfg, params)
    if abs(w) < cfg.b:
        return phase_lead_rhs(state.x3, u3, cfg)
    return -(cfg.alpha / cfg.K) * state.x3


def saturated_output(
    state: ControllerState, u3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """Controller output g(u3) + sat(w, b), continuous across the mode boundary."""
    w = saturation_variable(state.x3, u3, cfg, params)
    return nominal_feedback_g(u3, params) + sat(w, cfg.b)


def battery_command(
    x3: float, u3: float, cfg: ControllerConfig, params: SmibParams
) -> float:
    """Battery power deviation sat(w, b); bounded by b in magnitude."""
    return sat(saturation_variable(x3, u3, cfg, params), cfg.b)
