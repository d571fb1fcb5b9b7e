"""Command-line front end: ``dressed-hqc run|validate <config.json>``.

Exit codes: 0 success, 2 configuration error, 3 propagation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import derive_cell_params, scaling_check
from .errors import AccuracyError, ConfigurationError, StiffnessError
from .hamiltonians import DriveSpec
from .holonomy import (
    average_gate_fidelity,
    check_parallel_transport,
    ideal_u1,
    ideal_u2,
    rwa_convergence,
    rwa_two_qubit_gate,
    simulate_gate_fidelity,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .units import to_ghz, to_mhz

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROPAGATION = 3


def _key(key) -> str:
    if isinstance(key, tuple):
        return "".join(map(str, key))
    return str(key)


def _plain(value):
    """Convert numpy scalars/arrays and tuple keys into JSON-ready values."""
    if isinstance(value, dict):
        return {_key(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) for v in row])


def _run_single(scenario: Scenario, out_dir: Path) -> dict:
    spec = scenario.single()
    report = simulate_gate_fidelity(spec, frame=scenario.config["numerics"]["frame"] == "interaction")
    run = report.run
    _write_csv(
        out_dir / "timeseries.csv",
        ["t_ns", "pop_G", "pop_minus", "pop_plus", "leakage", "fidelity"],
        [run.times, run.populations["G"], run.populations["minus"], run.populations["plus"],
         run.populations["leakage"], run.fidelity],
    )
    return {
        "gate_time_ns": report.gate_time,
        "duration_ns": spec.total_time,
        "final_fidelity": report.final_fidelity,
        "final_leakage": float(run.populations["leakage"][-1]),
        "diagnostics": run.diagnostics,
    }


def _run_average(scenario: Scenario, out_dir: Path) -> dict:
    spec = scenario.single()
    avg = scenario.config["average"]
    report = average_gate_fidelity(spec, avg["n_states"], avg["method"], avg["workers"])
    per_state = np.asarray(report.details["per_state"])
    out = {
        "gate_time_ns": report.gate_time,
        "duration_ns": spec.total_time,
        "final_fidelity": report.final_fidelity,
        "fidelity_min": float(per_state.min()),
        "fidelity_max": float(per_state.max()),
        "n_states": avg["n_states"],
        "method": avg["method"],
        "diagnostics": report.run.diagnostics if report.run is not None else {},
    }
    if report.run is not None:
        run = report.run
        _write_csv(
            out_dir / "timeseries.csv",
            ["t_ns", "fidelity", "fidelity_min", "fidelity_max"],
            [run.times, run.fidelity, run.populations["min"], run.populations["max"]],
        )
    return out


def _run_two(scenario: Scenario, out_dir: Path) -> dict:
    spec = scenario.two()
    frame = scenario.config["numerics"]["frame"] == "interaction"
    report = simulate_gate_fidelity(spec, frame=frame)
    run = report.run
    names = [f"{level}_{unit}" for unit in (1, 2, 3) for level in ("G", "minus", "plus")]
    _write_csv(
        out_dir / "timeseries.csv",
        ["t_ns"] + [f"pop_{name}" for name in names] + ["fidelity"],
        [run.times] + [run.populations[name] for name in names] + [run.fidelity],
    )
    out = {
        "gate_time_ns": report.gate_time,
        "duration_ns": spec.total_time,
        "final_fidelity": report.final_fidelity,
        "diagnostics": run.diagnostics,
    }
    other = simulate_gate_fidelity(replace(spec, decoherence=not spec.decoherence, output_resolution=None), frame=frame)
    key = "final_fidelity_without_decoherence" if spec.decoherence else "final_fidelity_with_decoherence"
    out[key] = other.final_fidelity
    gate = rwa_two_qubit_gate(spec.cell)
    out["rwa_gate_on_GG_Gm_mG_mm"] = {"real": np.real(gate).round(12), "imag": np.imag(gate).round(12)}
    return out


def _run_circuit(scenario: Scenario, out_dir: Path) -> dict:
    device = scenario.device()
    params = derive_cell_params(device)
    points = scenario.config["circuit"]["scaling_points"]
    table, slope = scaling_check(np.geomspace(params.E_J0 / 4, params.E_J0 * 4, points), device)
    summary = {
        "eigenfrequencies_ghz": [to_ghz(w) for w in params.omega_c],
        "delta_c_ghz": to_ghz(params.delta_c),
        "E_J0_over_h_thz": to_ghz(params.E_J0) * 1e-3,
        "phi_rms": params.phi_rms,
        "phi_rms_estimated": params.phi_rms_estimated,
        "J_dc_mhz": {f"{m}{n}": to_mhz(v) for (m, n), v in params.J_dc.items()},
        "T_ac_mhz": {f"{m}{n}": to_mhz(v) for (m, n), v in params.T_ac.items()},
        "plasma_frequency_ghz": to_ghz(params.omega_p),
        "plasma_to_delta_c": params.omega_p / params.delta_c,
        "fourth_order_ratio": params.fourth_order_ratio,
        "scaling_slope": slope,
        "scaling_table": {"E_J0_rad_per_ns": table[:, 0], "J_dc_13_mhz": to_mhz(table[:, 1])},
        "checks": params.checks,
    }
    lines = ["Cell parameter report", ""]
    for k, f in enumerate(summary["eigenfrequencies_ghz"], start=1):
        lines.append(f"resonator {k}: omega/2pi = {f:.4f} GHz")
    lines.append(f"E_J0/h = {summary['E_J0_over_h_thz']:.3f} THz")
    for pair, value in summary["J_dc_mhz"].items():
        lines.append(f"dc mixing J_{pair}/2pi = {value:.2f} MHz")
    for pair, value in summary["T_ac_mhz"].items():
        lines.append(f"parametric hopping T_{pair}/2pi = {value:.3f} MHz")
    lines.append(f"plasma frequency omega_p/2pi = {summary['plasma_frequency_ghz']:.2f} GHz "
                 f"({summary['plasma_to_delta_c']:.1f} delta_c)")
    lines.append(f"fourth-order ratio = {summary['fourth_order_ratio']:.3g}")
    lines.append(f"log-log slope of J_dc versus E_J0 = {slope:.4f}")
    for name, ok in params.checks.items():
        lines.append(f"check {name}: {'pass' if ok else 'FAIL'}")
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    return summary


def _run_holonomy(scenario: Scenario, out_dir: Path) -> dict:
    spec = scenario.single()
    drive = DriveSpec.from_gate(spec.theta, spec.phi, spec.Omega, spec.g0, spec.omega_c)
    pt = check_parallel_transport(drive)
    u1 = ideal_u1(spec.theta, spec.phi).matrix
    u2 = ideal_u2().matrix
    omegas = spec.Omega / 2.0 ** np.arange(4)
    return {
        "gate_time_ns": pt.gate_time,
        "parallel_transport_max_over_Omega": pt.max_transport / pt.Omega,
        "cyclicity_defect": pt.cyclicity_defect,
        "dark_state_residual_over_Omega": pt.dark_residual / pt.Omega,
        "u1_unitarity_error": float(np.max(np.abs(u1 @ u1.conj().T - np.eye(2)))),
        "u1_involution_error": float(np.max(np.abs(u1 @ u1 - np.eye(2)))),
        "u1_determinant": complex(np.linalg.det(u1)),
        "u2_involution_error": float(np.max(np.abs(u2 @ u2 - np.eye(4)))),
        "rwa_convergence": {
            "omega_mhz": to_mhz(omegas),
            "distance_with_ground_shift": rwa_convergence(
                spec.theta, spec.phi, omegas, spec.g0, spec.omega_c, keep_ground_shift=True),
            "distance_without_ground_shift": rwa_convergence(
                spec.theta, spec.phi, omegas, spec.g0, spec.omega_c, keep_ground_shift=False),
        },
    }


RUNNERS = {
    "single_gate": _run_single,
    "single_average": _run_average,
    "two_qubit_gate": _run_two,
    "circuit_params": _run_circuit,
    "holonomy_checks": _run_holonomy,
}


def _say(args, message):
    if not args.quiet:
        print(message)


def _load(args) -> Scenario | None:
    try:
        return load_scenario(args.config, args.override)
    except ScenarioError as exc:
        for line in exc.diagnostics:
            print(f"error: {line}", file=sys.stderr)
        return None


def cmd_validate(args) -> int:
    scenario = _load(args)
    if scenario is None:
        return EXIT_CONFIG
    warnings = scenario.warnings()
    _say(args, f"{args.config}: valid {scenario.kind} scenario '{scenario.name}'")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    derived = scenario.derived()
    if "theta" in derived:
        _say(args, f"theta = {derived['theta']:.6f} rad ({derived['theta_over_pi']:.6g} pi)")
    for key, value in derived.items():
        if key not in ("theta", "theta_over_pi"):
            _say(args, f"{key} = {value}")
    _say(args, f"{len(warnings)} warning(s)")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load(args)
    if scenario is None:
        return EXIT_CONFIG
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    warnings = scenario.warnings()
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    started = time.perf_counter()
    try:
        results = RUNNERS[scenario.kind](scenario, out_dir)
    except (StiffnessError, AccuracyError) as exc:
        print(f"propagation failed: {exc}", file=sys.stderr)
        return EXIT_PROPAGATION
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {
        "version": __version__,
        "schema_version": scenario.config["schema_version"],
        "kind": scenario.kind,
        "name": scenario.name,
        "scenario": scenario.echo(),
        "overrides": list(scenario.overrides),
        "derived": scenario.derived(),
        "warnings": warnings,
        **results,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out_dir / "summary.json").write_text(json.dumps(_plain(summary), indent=2) + "\n")
    elapsed = time.perf_counter() - started
    if "final_fidelity" in results:
        _say(args, f"{scenario.name}: final fidelity {results['final_fidelity']:.6f} "
                   f"at t = {results['duration_ns']:.4f} ns ({elapsed:.1f} s)")
    else:
        _say(args, f"{scenario.name}: done ({elapsed:.1f} s)")
    _say(args, f"wrote {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dressed-hqc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario JSON file")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, e.g. drive.omega_mhz=4 (repeatable)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario and write its outputs")
    run.add_argument("--out-dir", default="out", help="output directory (default: ./out)")
    run.set_defaults(func=cmd_run)
    val = sub.add_parser("validate", parents=[common], help="check a scenario without simulating")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
