"""Command-line interface.

Subcommands:
    simulate       run one scenario, write trajectory/report/plots
    sweep          run a one-axis parameter sweep with a worker pool
    verify         numerical certificate checks, pass/fail table
    eac            equal-area margin and verdict for an initial angle
    invariant-set  level bound c_max and membership of a state

Exit codes: 0 success, 1 configuration error, 2 divergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .engine import detect_saturation_exit, simulate
from .lyapunov import lyapunov_W
from .model import PlantState
from .outputs import (
    write_plots,
    write_report_json,
    write_sweep_summary,
    write_trajectory_csv,
)
from .scenario import (
    ScenarioError,
    ScenarioFile,
    apply_axis,
    load_scenario,
    load_sweep,
    scenario_from_dict,
    scenario_to_dict,
)
from .stability import (
    build_report,
    c_max,
    default_invariant_level,
    eac_margin,
    in_invariant_set,
)
from .verify import all_passed, run_verification

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_VERIFY = 3


def _apply_overrides(scenario: ScenarioFile, args: argparse.Namespace) -> ScenarioFile:
    sim = scenario.sim
    try:
        if getattr(args, "dt", None) is not None:
            sim = replace(sim, dt=args.dt)
        if getattr(args, "horizon", None) is not None:
            sim = replace(sim, horizon=args.horizon)
            scenario = replace(scenario, fault=replace(scenario.fault, horizon=None))
        if getattr(args, "stride", None) is not None:
            sim = replace(sim, record_stride=args.stride)
    except ValueError as exc:
        raise ScenarioError(f"invalid override: {exc}") from None
    fault_horizon = scenario.fault.horizon
    if fault_horizon is not None and fault_horizon < sim.dt:
        raise ScenarioError(
            f"fault horizon {fault_horizon} is shorter than one step {sim.dt}"
        )
    return replace(scenario, sim=sim)


def _execute_scenario(scenario: ScenarioFile, outdir: Path, stem: str) -> dict:
    """Run one scenario and write the requested artifacts."""
    traj = simulate(scenario.fault, scenario.controller, scenario.params, scenario.sim)
    report = build_report(
        scenario.fault, scenario.controller, scenario.params, scenario.sim, traj=traj
    )
    outdir.mkdir(parents=True, exist_ok=True)
    if "csv" in scenario.outputs:
        write_trajectory_csv(
            outdir / f"{stem}.csv", traj, scenario.controller, scenario.params
        )
    if "report" in scenario.outputs:
        write_report_json(outdir / f"{stem}_report.json", scenario, report, traj)
    if "plot" in scenario.outputs:
        write_plots(outdir, stem, traj)
    exit_time = (
        detect_saturation_exit(traj, scenario.controller.b)
        if scenario.controller is not None
        else None
    )
    return {
        "classification": report.classification.value,
        "eac_margin": report.eac_margin,
        "in_omega": report.in_omega,
        "saturation_exit_time": exit_time,
        "diverged": traj.diverged,
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        result = _execute_scenario(scenario, Path(args.out), "trajectory")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"classification: {result['classification']}")
    print(f"eac_margin: {result['eac_margin']:.6g}")
    print(f"outputs written to {args.out}")
    if result["diverged"]:
        print("run diverged; partial outputs written", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _sweep_worker(payload: tuple[int, str, float, dict, str]) -> dict:
    index, axis, value, base_dict, outdir = payload
    row = {"index": index, "axis": axis, "value": value}
    try:
        point = apply_axis(scenario_from_dict(base_dict), axis, value)
        row.update(_execute_scenario(point, Path(outdir), f"point_{index:03d}"))
    except Exception as exc:  # recorded per point, sweep continues
        row["classification"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = load_sweep(args.sweep)
        base_dict = scenario_to_dict(_apply_overrides(spec.base, args))
        payloads = [
            (i, spec.axis, value, base_dict, args.out)
            for i, value in enumerate(spec.values)
        ]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs <= 1 or len(payloads) == 1:
        rows = [_sweep_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(payloads))) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    write_sweep_summary(outdir / "summary.csv", rows)
    for row in rows:
        value = row["value"]
        label = "inf" if isinstance(value, float) and math.isinf(value) else f"{value:g}"
        print(f"{spec.axis} = {label}: {row['classification']}")
    print(f"summary written to {outdir / 'summary.csv'}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        results = run_verification(
            scenario,
            dissipation_tol=args.tol,
            containment_samples=args.samples,
            seed=args.seed,
        )
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    width = max(len(r.name) for r in results)
    for r in results:
        status = "SKIP" if r.passed is None else ("PASS" if r.passed else "FAIL")
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    if not all_passed(results):
        failed = ", ".join(r.name for r in results if r.passed is False)
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_eac(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    delta0 = args.delta0 if args.delta0 is not None else scenario.fault.delta0
    margin = eac_margin(delta0, scenario.params)
    verdict = "stable" if margin < 0.0 else "unstable"
    print(f"delta0 = {delta0:.9g} rad")
    print(f"eac_margin = {margin:.9g} (stable iff < 0)")
    print(f"verdict: {verdict}")
    return EXIT_OK


def cmd_invariant_set(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    params = scenario.params
    delta_tilde = (
        args.delta_tilde
        if args.delta_tilde is not None
        else scenario.fault.delta0 - params.delta_bar
    )
    delta_tilde_dot = (
        args.delta_tilde_dot
        if args.delta_tilde_dot is not None
        else scenario.fault.delta_dot0
    )
    state = PlantState(delta_tilde_dot, delta_tilde)
    level = args.level if args.level is not None else default_invariant_level(params)
    try:
        member = in_invariant_set(state, level, params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"c_max = {c_max(params):.9g}")
    print(f"level c = {level:.9g}")
    print(
        f"state: delta_tilde = {delta_tilde:.9g}, "
        f"delta_tilde_dot = {delta_tilde_dot:.9g}"
    )
    print(f"W(state) = {lyapunov_W(state, params):.9g}")
    print(f"in_omega: {'true' if member else 'false'}")
    return EXIT_OK


def _add_sim_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dt", type=float, help="integration step override (s)")
    parser.add_argument("--horizon", type=float, help="simulation length override (s)")
    parser.add_argument(
        "--stride", type=int, help="record every N-th integration step"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smibstab",
        description=(
            "Transient-stability simulation and verification for SMIB power "
            "systems with battery-based angle-feedback control."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--out", default="out", help="output directory")
    _add_sim_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a one-axis parameter sweep")
    p.add_argument("sweep", help="sweep YAML file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker pool size (default: CPU count)")
    _add_sim_overrides(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the certificate checks")
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--tol", type=float, default=1e-4, help="dissipation tolerance")
    p.add_argument(
        "--samples", type=int, default=25, help="invariant-set sample count"
    )
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    _add_sim_overrides(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eac", help="equal-area margin for an initial angle")
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--delta0", type=float, help="initial angle override (rad)")
    p.set_defaults(func=cmd_eac)

    p = sub.add_parser("invariant-set", help="invariant-set membership of a state")
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--delta-tilde", type=float, dest="delta_tilde")
    p.add_argument("--delta-tilde-dot", type=float, dest="delta_tilde_dot")
    p.add_argument("--level", type=float, help="level c (default 0.99 * c_max)")
    p.set_defaults(func=cmd_invariant_set)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
