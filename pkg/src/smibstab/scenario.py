"""Scenario and sweep configuration files.

YAML documents with one section per parameter record:

    plant:       H, f0 (or omega0), D, p_mech, p_max
                 [p_storage_bar, delta_bar]
    fault:       delta0 [, delta_dot0, horizon]
    controller:  tau, K, L, alpha, b [, hysteresis]   (optional section)
    sim:         dt, horizon, record_stride           (all optional)
    outputs:     subset of [csv, report, plot]        (optional)

Parsing is strict: unknown keys are rejected and missing required keys
are reported by name. The string "inf" (or YAML's .inf) for the battery
limit b selects the unsaturated controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import yaml

from .controllers import ControllerConfig
from .engine import SimulationConfig
from .model import FaultScenario, SmibParams, equilibrium_angle

VALID_OUTPUTS = ("csv", "report", "plot")
SWEEP_AXES = ("delta0", "delta_dot0", "b", "K", "L")


class ScenarioError(ValueError):
    """Malformed or inconsistent configuration input."""


@dataclass(frozen=True)
class ScenarioFile:
    """A fully validated scenario: plant, fault, controller, sim, outputs."""

    params: SmibParams
    fault: FaultScenario
    controller: Optional[ControllerConfig]
    sim: SimulationConfig
    outputs: tuple[str, ...] = ("csv", "report")


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis, its values, and the base scenario."""

    axis: str
    values: tuple[float, ...]
    base: ScenarioFile


def _as_float(value: object, keypath: str) -> float:
    if isinstance(value, bool) or value is None:
        raise ScenarioError(f"key '{keypath}' must be a number, got {value!r}")
    try:
        result = float(value)  # accepts the string "inf"
    except (TypeError, ValueError):
        raise ScenarioError(
            f"key '{keypath}' must be a number, got {value!r}"
        ) from None
    if math.isnan(result):
        raise ScenarioError(f"key '{keypath}' must not be NaN")
    return result


def _as_int(value: object, keypath: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"key '{keypath}' must be an integer, got {value!r}")
    return value


def _take_section(data: dict, name: str, required: bool) -> Optional[dict]:
    section = data.pop(name, None)
    if section is None:
        if required:
            raise ScenarioError(f"missing required section '{name}'")
        return None
    if not isinstance(section, Mapping):
        raise ScenarioError(f"section '{name}' must be a mapping")
    return dict(section)


def _reject_unknown(section: dict, name: str) -> None:
    if section:
        keys = ", ".join(sorted(str(k) for k in section))
        raise ScenarioError(f"unknown key(s) in section '{name}': {keys}")


def _require(section: dict, key: str, name: str) -> object:
    if key not in section:
        raise ScenarioError(f"missing required key '{key}' in section '{name}'")
    return section.pop(key)


def _parse_plant(section: dict) -> SmibParams:
    H = _as_float(_require(section, "H", "plant"), "plant.H")
    D = _as_float(_require(section, "D", "plant"), "plant.D")
    p_mech = _as_float(_require(section, "p_mech", "plant"), "plant.p_mech")
    p_max = _as_float(_require(section, "p_max", "plant"), "plant.p_max")
    has_f0 = "f0" in section
    has_omega0 = "omega0" in section
    if has_f0 == has_omega0:
        raise ScenarioError(
            "section 'plant' needs exactly one of the keys 'f0' and 'omega0'"
        )
    if has_f0:
        f0 = _as_float(section.pop("f0"), "plant.f0")
        if f0 <= 0.0:
            raise ScenarioError(f"key 'plant.f0' must be positive, got {f0}")
        omega0 = 2.0 * math.pi * f0
    else:
        omega0 = _as_float(section.pop("omega0"), "plant.omega0")
    p_storage_bar = 0.0
    if "p_storage_bar" in section:
        p_storage_bar = _as_float(section.pop("p_storage_bar"), "plant.p_storage_bar")
    if "delta_bar" in section:
        delta_bar = _as_float(section.pop("delta_bar"), "plant.delta_bar")
    else:
        try:
            delta_bar = equilibrium_angle(p_mech + p_storage_bar, p_max)
        except ValueError as exc:
            raise ScenarioError(f"section 'plant': {exc}") from None
    _reject_unknown(section, "plant")
    try:
        return SmibParams(
            H=H,
            omega0=omega0,
            D=D,
            p_mech=p_mech,
            p_max=p_max,
            delta_bar=delta_bar,
            p_storage_bar=p_storage_bar,
        )
    except ValueError as exc:
        raise ScenarioError(f"section 'plant': {exc}") from None


def _parse_fault(section: dict) -> FaultScenario:
    delta0 = _as_float(_require(section, "delta0", "fault"), "fault.delta0")
    delta_dot0 = 0.0
    if "delta_dot0" in section:
        delta_dot0 = _as_float(section.pop("delta_dot0"), "fault.delta_dot0")
    horizon = None
    if "horizon" in section:
        raw = section.pop("horizon")
        horizon = None if raw is None else _as_float(raw, "fault.horizon")
    _reject_unknown(section, "fault")
    try:
        return FaultScenario(delta0=delta0, delta_dot0=delta_dot0, horizon=horizon)
    except ValueError as exc:
        raise ScenarioError(f"section 'fault': {exc}") from None


def _parse_controller(section: dict) -> ControllerConfig:
    tau = _as_float(_require(section, "tau", "controller"), "controller.tau")
    K = _as_float(_require(section, "K", "controller"), "controller.K")
    L = _as_float(_require(section, "L", "controller"), "controller.L")
    alpha = _as_float(_require(section, "alpha", "controller"), "controller.alpha")
    b = _as_float(_require(section, "b", "controller"), "controller.b")
    hysteresis = 0.0
    if "hysteresis" in section:
        hysteresis = _as_float(section.pop("hysteresis"), "controller.hysteresis")
    _reject_unknown(section, "controller")
    try:
        return ControllerConfig(
            tau=tau, K=K, L=L, alpha=alpha, b=b, hysteresis=hysteresis
        )
    except ValueError as exc:
        raise ScenarioError(f"section 'controller': {exc}") from None


def _parse_sim(section: Optional[dict]) -> SimulationConfig:
    if section is None:
        return SimulationConfig()
    kwargs: dict = {}
    if "dt" in section:
        kwargs["dt"] = _as_float(section.pop("dt"), "sim.dt")
    if "horizon" in section:
        kwargs["horizon"] = _as_float(section.pop("horizon"), "sim.horizon")
    if "record_stride" in section:
        kwargs["record_stride"] = _as_int(
            section.pop("record_stride"), "sim.record_stride"
        )
    _reject_unknown(section, "sim")
    try:
        return SimulationConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"section 'sim': {exc}") from None


def _parse_outputs(raw: object) -> tuple[str, ...]:
    if raw is None:
        return ("csv", "report")
    if not isinstance(raw, Sequence) or isinstance(raw, str):
        raise ScenarioError("'outputs' must be a list of artifact names")
    outputs = []
    for item in raw:
        if item not in VALID_OUTPUTS:
            raise ScenarioError(
                f"unknown output '{item}'; valid outputs: {', '.join(VALID_OUTPUTS)}"
            )
        if item not in outputs:
            outputs.append(item)
    if not outputs:
        raise ScenarioError("'outputs' must not be empty")
    return tuple(outputs)


def scenario_from_dict(data: Mapping) -> ScenarioFile:
    """Validate a scenario mapping and build the parameter records."""
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario document must be a mapping")
    data = dict(data)
    plant = _parse_plant(_take_section(data, "plant", required=True))
    fault = _parse_fault(_take_section(data, "fault", required=True))
    controller_section = _take_section(data, "controller", required=False)
    controller = (
        None if controller_section is None else _parse_controller(controller_section)
    )
    sim = _parse_sim(_take_section(data, "sim", required=False))
    outputs = _parse_outputs(data.pop("outputs", None))
    _reject_unknown(data, "<top level>")
    if fault.horizon is not None and fault.horizon < sim.dt:
        raise ScenarioError(
            f"'fault.horizon' {fault.horizon} is shorter than one step "
            f"'sim.dt' {sim.dt}"
        )
    return ScenarioFile(
        params=plant, fault=fault, controller=controller, sim=sim, outputs=outputs
    )


def scenario_to_dict(scenario: ScenarioFile) -> dict:
    """Normalized echo of a scenario; inverse of `scenario_from_dict`."""
    p = scenario.params
    doc: dict = {
        "plant": {
            "H": p.H,
            "omega0": p.omega0,
            "D": p.D,
            "p_mech": p.p_mech,
            "p_max": p.p_max,
            "delta_bar": p.delta_bar,
            "p_storage_bar": p.p_storage_bar,
        },
        "fault": {
            "delta0": scenario.fault.delta0,
            "delta_dot0": scenario.fault.delta_dot0,
        },
        "sim": {
            "dt": scenario.sim.dt,
            "horizon": scenario.sim.horizon,
            "record_stride": scenario.sim.record_stride,
        },
        "outputs": list(scenario.outputs),
    }
    if scenario.fault.horizon is not None:
        doc["fault"]["horizon"] = scenario.fault.horizon
    if scenario.controller is not None:
        c = scenario.controller
        doc["controller"] = {
            "tau": c.tau,
            "K": c.K,
            "L": c.L,
            "alpha": c.alpha,
            "b": "inf" if math.isinf(c.b) else c.b,
            "hysteresis": c.hysteresis,
        }
    return doc


def load_scenario(path: str | Path) -> ScenarioFile:
    """Load and validate a scenario YAML file."""
    return scenario_from_dict(_load_yaml(path, "scenario"))


def sweep_from_dict(data: Mapping) -> SweepSpec:
    """Validate a sweep mapping: axis, values or grid, base scenario."""
    if not isinstance(data, Mapping):
        raise ScenarioError("sweep document must be a mapping")
    data = dict(data)
    axis = data.pop("axis", None)
    if axis not in SWEEP_AXES:
        raise ScenarioError(
            f"'axis' must be one of {', '.join(SWEEP_AXES)}, got {axis!r}"
        )
    has_values = "values" in data
    has_grid = "grid" in data
    if has_values == has_grid:
        raise ScenarioError("sweep needs exactly one of 'values' and 'grid'")
    if has_values:
        raw = data.pop("values")
        if not isinstance(raw, Sequence) or isinstance(raw, str) or len(raw) == 0:
            raise ScenarioError("'values' must be a non-empty list of numbers")
        values = tuple(_as_float(v, f"values[{i}]") for i, v in enumerate(raw))
    else:
        grid = _take_section(data, "grid", required=True)
        start = _as_float(_require(grid, "start", "grid"), "grid.start")
        stop = _as_float(_require(grid, "stop", "grid"), "grid.stop")
        count = _as_int(_require(grid, "count", "grid"), "grid.count")
        _reject_unknown(grid, "grid")
        if count < 1:
            raise ScenarioError(f"'grid.count' must be >= 1, got {count}")
        if not (math.isfinite(start) and math.isfinite(stop)):
            raise ScenarioError("'grid.start' and 'grid.stop' must be finite")
        if count == 1:
            values = (start,)
        else:
            step = (stop - start) / (count - 1)
            values = tuple(start + i * step for i in range(count))
    base_section = _take_section(data, "base", required=True)
    base = scenario_from_dict(base_section)
    _reject_unknown(data, "<top level>")
    if axis in ("b", "K", "L") and base.controller is None:
        raise ScenarioError(
            f"sweep axis '{axis}' needs a 'controller' section in the base scenario"
        )
    # Only the battery limit has a meaningful unbounded setting.
    if axis != "b" and any(math.isinf(v) for v in values):
        raise ScenarioError(f"sweep axis '{axis}' requires finite values")
    return SweepSpec(axis=axis, values=values, base=base)


def load_sweep(path: str | Path) -> SweepSpec:
    """Load and validate a sweep YAML file."""
    return sweep_from_dict(_load_yaml(path, "sweep"))


def apply_axis(base: ScenarioFile, axis: str, value: float) -> ScenarioFile:
    """Scenario at one sweep grid point."""
    try:
        if axis == "delta0":
            return replace(base, fault=replace(base.fault, delta0=value))
        if axis == "delta_dot0":
            return replace(base, fault=replace(base.fault, delta_dot0=value))
        if axis in ("b", "K", "L"):
            if base.controller is None:
                raise ScenarioError(f"axis '{axis}' requires a controller")
            return replace(base, controller=replace(base.controller, **{axis: value}))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"axis '{axis}' value {value!r}: {exc}") from None
    raise ScenarioError(f"unknown sweep axis '{axis}'")


def _load_yaml(path: str | Path, kind: str) -> Mapping:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {kind} file {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"malformed YAML in {path}: {exc}") from None
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{kind} file {path} must contain a mapping")
    return data
