"""File artifacts: trajectory CSV, stability report, SVG plots, sweep summary.

Numeric CSV fields carry 9 significant digits; column order is fixed.
Infinities are spelled "inf" in JSON and CSV so reports stay parseable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from .controllers import ControllerConfig
from .engine import Trajectory, detect_saturation_exit
from .lyapunov import lyapunov_series
from .model import SmibParams
from .scenario import ScenarioFile, scenario_to_dict
from .stability import StabilityReport

TRAJECTORY_COLUMNS = (
    "t",
    "delta_tilde",
    "delta_tilde_dot",
    "x3",
    "w",
    "p_battery",
    "mode",
    "lyapunov",
)


def format_float(x: float) -> str:
    return f"{x:.9g}"


def write_trajectory_csv(
    path: Path,
    traj: Trajectory,
    cfg: Optional[ControllerConfig],
    params: SmibParams,
) -> None:
    """Write the recorded samples plus the Lyapunov value column."""
    values = lyapunov_series(traj, cfg, params)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_COLUMNS)
        for i in range(traj.n_samples):
            writer.writerow(
                (
                    format_float(traj.t[i]),
                    format_float(traj.delta_tilde[i]),
                    format_float(traj.delta_tilde_dot[i]),
                    format_float(traj.x3[i]),
                    format_float(traj.w[i]),
                    format_float(traj.p_battery[i]),
                    "linear" if traj.mode[i] else "saturated",
                    format_float(values[i]),
                )
            )


def _sanitize(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def write_report_json(
    path: Path,
    scenario: ScenarioFile,
    report: StabilityReport,
    traj: Trajectory,
) -> None:
    """Structured stability report with the scenario echoed back."""
    cfg = scenario.controller
    exit_time = (
        detect_saturation_exit(traj, cfg.b) if cfg is not None else None
    )
    stability = asdict(report)
    stability["classification"] = report.classification.value
    doc = {
        "scenario": scenario_to_dict(scenario),
        "stability": stability,
        "run": {
            "samples": traj.n_samples,
            "diverged": traj.diverged,
            "divergence_time": traj.divergence_time,
            "saturation_exit_time": exit_time,
            "final_delta_tilde": float(traj.delta_tilde[-1]),
            "max_abs_delta_tilde": float(abs(traj.delta_tilde).max()),
        },
    }
    path.write_text(json.dumps(_sanitize(doc), indent=2) + "\n")


def write_plots(outdir: Path, stem: str, traj: Trajectory) -> list[Path]:
    """Self-contained SVG line plots of the angle deviation and battery power."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    panels = (
        ("angle", traj.delta_tilde, "Angle deviation (rad)"),
        ("battery", traj.p_battery, "Battery power output change (p.u.)"),
    )
    for suffix, series, ylabel in panels:
        fig, ax = plt.subplots(figsize=(6.0, 3.2))
        ax.plot(traj.t, series, linewidth=1.2)
        ax.set_xlabel("Time (s)")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
        fig.tight_layout()
        path = outdir / f"{stem}_{suffix}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths


SUMMARY_COLUMNS = (
    "index",
    "axis",
    "value",
    "classification",
    "eac_margin",
    "in_omega",
    "saturation_exit_time",
    "diverged",
    "error",
)


def write_sweep_summary(path: Path, rows: list[dict]) -> None:
    """One line per grid point, in grid order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([_summary_cell(row.get(col)) for col in SUMMARY_COLUMNS])


def _summary_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)
