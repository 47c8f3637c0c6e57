"""Single-machine-infinite-bus (SMIB) plant model.

A synchronous generator is tied through a reactance to an ideal
fixed-voltage bus. The rotor obeys the classical swing equation,
written here in terms of the angle deviation ``dt = delta - delta_bar``
from the pre-fault operating angle:

    M * ddot(dt) + D * dot(dt) = p_control + p_max*sin(delta_bar)
                                            - p_max*sin(dt + delta_bar)

``p_control`` is the deviation of the battery power output from its
pre-fault value (zero for the bare plant). All powers are per-unit,
angles in radians, time in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

EQUILIBRIUM_TOL = 1e-12


def inertia_from_H(H: float, f0: float) -> float:
    """Inertia coefficient M = 2H/omega0 with omega0 = 2*pi*f0.

    H is the lumped inertia constant in seconds, f0 the nominal grid
    frequency in Hz. Returns M in s^2/rad (per-unit power base).
    """
    if H <= 0.0:
        raise ValueError(f"inertia constant H must be positive, got {H}")
    if f0 <= 0.0:
        raise ValueError(f"nominal frequency f0 must be positive, got {f0}")
    return 2.0 * H / (2.0 * math.pi * f0)


def electric_power(delta: float, p_max: float) -> float:
    """Electric power transferred to the infinite bus at rotor angle delta."""
    if p_max <= 0.0:
        raise ValueError(f"p_max must be positive, got {p_max}")
    return p_max * math.sin(delta)


def equilibrium_angle(p_injection: float, p_max: float) -> float:
    """Steady-state angle solving p_injection = p_max*sin(delta_bar).

    Principal branch in [0, pi/2). Injections at or above p_max have no
    stable equilibrium and are rejected.
    """
    if p_max <= 0.0:
        raise ValueError(f"p_max must be positive, got {p_max}")
    if p_injection < 0.0:
        raise ValueError(f"power injection must be nonnegative, got {p_injection}")
    if p_injection >= p_max:
        raise ValueError(
            f"no stable equilibrium: injection {p_injection} >= p_max {p_max}"
        )
    return math.asin(p_injection / p_max)


@dataclass(frozen=True)
class SmibParams:
    """Physical constants of the SMIB plant.

    Attributes:
        H: inertia constant (s).
        omega0: nominal angular frequency (rad/s).
        D: damping coefficient (per-unit), >= 0.
        p_mech: pre-fault mechanical power (per-unit).
        p_max: maximum electric power transfer (per-unit). Bus voltages
            and line reactance are folded into this single constant.
        delta_bar: steady-state angle (rad), in (0, pi/2).
        p_storage_bar: pre-fault battery output (per-unit); 0 recovers
            the plain SMIB system without a storage device.
    """

    H: float
    omega0: float
    D: float
    p_mech: float
    p_max: float
    delta_bar: float
    p_storage_bar: float = 0.0

    def __post_init__(self) -> None:
        if self.H <= 0.0:
            raise ValueError(f"H must be positive, got {self.H}")
        if self.omega0 <= 0.0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.D < 0.0:
            raise ValueError(f"D must be nonnegative, got {self.D}")
        if self.p_max <= 0.0:
            raise ValueError(f"p_max must be positive, got {self.p_max}")
        if not 0.0 < self.delta_bar < math.pi / 2.0:
            raise ValueError(
                f"delta_bar must lie in (0, pi/2), got {self.delta_bar}"
            )
        residual = (
            self.p_mech
            + self.p_storage_bar
            - self.p_max * math.sin(self.delta_bar)
        )
        if abs(residual) > EQUILIBRIUM_TOL:
            raise ValueError(
                "inconsistent equilibrium: p_mech + p_storage_bar - "
                f"p_max*sin(delta_bar) = {residual:.3e} exceeds {EQUILIBRIUM_TOL}"
            )

    @property
    def M(self) -> float:
        """Inertia coefficient 2H/omega0 (s^2/rad)."""
        return 2.0 * self.H / self.omega0

    @classmethod
    def from_operating_point(
        cls,
        H: float,
        f0: float,
        D: float,
        p_mech: float,
        p_max: float,
        p_storage_bar: float = 0.0,
        omega0: Optional[float] = None,
    ) -> "SmibParams":
        """Build params from the pre-fault operating point.

        delta_bar is computed from the power balance, and omega0 from the
        nominal frequency f0 in Hz unless given explicitly (an explicit
        omega0 supports non-SI per-unit conventions for M = 2H/omega0).
        """
        if omega0 is None:
            if f0 <= 0.0:
                raise ValueError(f"f0 must be positive, got {f0}")
            omega0 = 2.0 * math.pi * f0
        delta_bar = equilibrium_angle(p_mech + p_storage_bar, p_max)
        return cls(
            H=H,
            omega0=omega0,
            D=D,
            p_mech=p_mech,
            p_max=p_max,
            delta_bar=delta_bar,
            p_storage_bar=p_storage_bar,
        )


@dataclass(frozen=True)
class PlantState:
    """Plant state x1 = (angle-deviation rate, angle deviation)."""

    delta_tilde_dot: float
    delta_tilde: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_tilde_dot) and math.isfinite(self.delta_tilde)):
            raise ValueError("plant state must be finite")


@dataclass(frozen=True)
class FaultScenario:
    """Post-fault initial condition and simulation length.

    The fault leaves the machine at absolute angle delta0 with rate
    delta_dot0; mechanical power and line capacity are back at their
    pre-fault values for the whole simulated transient. When horizon is
    None the simulation-config horizon applies.
    """

    delta0: float
    delta_dot0: float = 0.0
    horizon: Optional[float] = None

    def __post_init__(self) -> None:
        if self.horizon is not None and self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")


def swing_rhs(
    state: PlantState, p_control: float, params: SmibParams
) -> tuple[float, float]:
    """Time derivative of the plant state under battery deviation p_control.

    Returns (ddot(delta_tilde), dot(delta_tilde)), ordered like the state.
    """
    accel = (
        p_control
        + params.p_max * math.sin(params.delta_bar)
        - params.p_max * math.sin(state.delta_tilde + params.delta_bar)
        - params.D * state.delta_tilde_dot
    ) / params.M
    return accel, state.delta_tilde_dot


def rotor_angle(t: float, delta_tilde: float, params: SmibParams) -> float:
    """Rotor angle in the stationary frame: omega0*t + delta_bar + delta_tilde."""
    return params.omega0 * t + params.delta_bar + delta_tilde


def rotor_frequency(delta_tilde_dot: float, params: SmibParams) -> float:
    """Generator bus frequency omega0 + dot(delta_tilde) (rad/s)."""
    return params.omega0 + delta_tilde_dot
