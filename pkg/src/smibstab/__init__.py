"""Transient stability of SMIB power systems under battery angle-feedback control.

Plant and controller models, a deterministic fixed-step simulator,
Lyapunov/dissipation certificates, the equal-area criterion, and
invariant-set estimation, plus a CLI for scenario runs and sweeps.
"""

from .controllers import (
    ControllerConfig,
    ControllerState,
    Mode,
    battery_command,
    nominal_feedback_g,
    phase_lead_output,
    phase_lead_rhs,
    sat,
    saturated_output,
    saturated_rhs,
    saturation_variable,
)
from .engine import (
    SimulationConfig,
    Trajectory,
    detect_saturation_exit,
    rk4_step,
    simulate,
)
from .lyapunov import (
    DissipationReport,
    LyapunovSample,
    check_dissipation,
    F_integral,
    gamma,
    lyapunov_W,
    lyapunov_W_hat,
    lyapunov_W_lead,
    storage_V1,
    storage_V2,
    storage_V3,
)
from .model import (
    FaultScenario,
    PlantState,
    SmibParams,
    electric_power,
    equilibrium_angle,
    inertia_from_H,
    swing_rhs,
)
from .stability import (
    Classification,
    StabilityReport,
    build_report,
    c_max,
    classify_by_simulation,
    eac_margin,
    in_invariant_set,
    q1_is_positive_definite,
    q1_matrix,
    q2_is_negative_semidefinite,
    q2_matrix,
    sample_invariant_states,
)

__version__ = "0.1.0"

__all__ = [
    "ControllerConfig",
    "ControllerState",
    "Mode",
    "battery_command",
    "nominal_feedback_g",
    "phase_lead_output",
    "phase_lead_rhs",
    "sat",
    "saturated_output",
    "saturated_rhs",
    "saturation_variable",
    "SimulationConfig",
    "Trajectory",
    "detect_saturation_exit",
    "rk4_step",
    "simulate",
    "DissipationReport",
    "LyapunovSample",
    "check_dissipation",
    "F_integral",
    "gamma",
    "lyapunov_W",
    "lyapunov_W_hat",
    "lyapunov_W_lead",
    "storage_V1",
    "storage_V2",
    "storage_V3",
    "FaultScenario",
    "PlantState",
    "SmibParams",
    "electric_power",
    "equilibrium_angle",
    "inertia_from_H",
    "swing_rhs",
    "Classification",
    "StabilityReport",
    "build_report",
    "c_max",
    "classify_by_simulation",
    "eac_margin",
    "in_invariant_set",
    "q1_is_positive_definite",
    "q1_matrix",
    "q2_is_negative_semidefinite",
    "q2_matrix",
    "sample_invariant_states",
]
