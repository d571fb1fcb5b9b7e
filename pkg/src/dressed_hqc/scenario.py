"""Scenario configuration: JSON schema, defaults, overrides and diagnostics.

Frequencies in configuration files are entered as omega/2pi in MHz (keys end
in ``_mhz``) and converted to rad/ns when a scenario is built.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .circuit import DeviceSpec
from .holonomy import SingleQubitScenario, TwoQubitScenario, cyclic_time
from .units import mhz

SCHEMA_VERSION = 1
KINDS = ("single_gate", "single_average", "two_qubit_gate", "circuit_params", "holonomy_checks")

_positive = {"type": "number", "exclusiveMinimum": 0}
_non_negative = {"type": "number", "minimum": 0}


def _object(properties, required=()):
    return {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}


SCHEMA = _object(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "system": _object(
            {
                "omega_c_mhz": _positive,
                "g0_mhz": _positive,
                "anharmonicity_mhz": _non_negative,
                "transmon_levels": {"enum": [2, 3]},
                "fock_cutoff": {"type": "integer", "minimum": 2, "maximum": 40},
            }
        ),
        "drive": _object(
            {
                "gate": {"enum": ["hadamard", "not", "custom"]},
                "omega_mhz": _positive,
                "theta": {"type": "number"},
                "phi": {"type": "number"},
                "omega1_mhz": {"type": "number"},
                "omega2_mhz": {"type": "number"},
                "initial": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            }
        ),
        "decoherence": _object(
            {
                "enabled": {"type": "boolean"},
                "kappa_mhz": _non_negative,
                "gamma1_mhz": _non_negative,
                "gamma2_mhz": _non_negative,
            }
        ),
        "cell": _object(
            {
                "omega_c_mhz": _positive,
                "g_mhz": _positive,
                "T13_mhz": {"type": "number"},
                "T23_mhz": {"type": ["number", "null"]},
                "rate_mhz": _non_negative,
                "initial": {"type": "string", "pattern": "^[G+-]{3}$"},
                "target": {"type": "string", "pattern": "^[G+-]{3}$"},
            }
        ),
        "circuit": _object(
            {
                "unit_inductance_h_per_m": _positive,
                "unit_capacitance_f_per_m": _positive,
                "lengths_mm": {"type": "array", "items": _positive, "minItems": 3, "maxItems": 3},
                "I_J0_uA": _positive,
                "dc_bias": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "C_J_pF": _positive,
                "ac_amplitude_13": _positive,
                "ac_amplitude_23": _positive,
                "phi_rms": {"type": "array", "items": _positive, "minItems": 3, "maxItems": 3},
                "scaling_points": {"type": "integer", "minimum": 2},
            }
        ),
        "average": _object(
            {
                "n_states": {"type": "integer", "minimum": 2},
                "method": {"enum": ["linear", "direct"]},
                "workers": {"type": ["integer", "null"], "minimum": 1},
            }
        ),
        "numerics": _object(
            {
                "rtol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-3},
                "output_resolution_ns": _positive,
                "duration_ns": {"type": ["number", "null"], "minimum": 0},
                "drive_extension": {"enum": ["pauli", "ladder"]},
                "frame": {"enum": ["interaction", "lab"]},
            }
        ),
    },
    required=("schema_version", "kind"),
)

DEFAULTS = {
    "name": "",
    "system": {
        "omega_c_mhz": 6000.0,
        "g0_mhz": 300.0,
        "anharmonicity_mhz": 310.0,
        "transmon_levels": 3,
        "fock_cutoff": 5,
    },
    "drive": {"gate": "hadamard", "omega_mhz": 8.0, "initial": [1.0, 0.0]},
    "decoherence": {"enabled": True, "kappa_mhz": 0.01, "gamma1_mhz": 0.01, "gamma2_mhz": 0.01},
    "cell": {
        "omega_c_mhz": 6000.0,
        "g_mhz": 100.0,
        "T13_mhz": 6.0,
        "T23_mhz": None,
        "rate_mhz": 0.01,
        "initial": "-GG",
        "target": "G-G",
    },
    "circuit": {
        "unit_inductance_h_per_m": 4.1e-7,
        "unit_capacitance_f_per_m": 1.6e-10,
        "lengths_mm": [10.2, 8.5, 9.57],
        "I_J0_uA": 46.0,
        "dc_bias": 0.43,
        "C_J_pF": 0.5,
        "ac_amplitude_13": 0.0153,
        "ac_amplitude_23": 0.0166,
        "phi_rms": [3.6e-3, 3.4e-3, 3.1e-3],
        "scaling_points": 9,
    },
    "average": {"n_states": 1000, "method": "linear", "workers": None},
    "numerics": {
        "rtol": 1e-8,
        "output_resolution_ns": 0.5,
        "duration_ns": None,
        "drive_extension": "pauli",
        "frame": "interaction",
    },
}


class ScenarioError(ValueError):
    """Configuration could not be read or violates the schema."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


def _line_of(text: str, path: list) -> int | None:
    """Best-effort line number of the innermost key of ``path`` in the JSON text."""
    position = 0
    line = None
    for part in path:
        if isinstance(part, int):
            continue
        match = re.compile(r'"' + re.escape(str(part)) + r'"\s*:').search(text, position)
        if match is None:
            return line
        position = match.end()
        line = text.count("\n", 0, match.start()) + 1
    return line


def _parse_override(item: str):
    if "=" not in item:
        raise ScenarioError([f"override {item!r} must look like key.path=value"])
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(config: dict, overrides) -> dict:
    config = copy.deepcopy(config)
    for item in overrides or ():
        path, value = _parse_override(item)
        node = config
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ScenarioError([f"override {item!r}: {part!r} is not an object"])
        node[path[-1]] = value
    return config


def _merge(defaults: dict, config: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in config.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def validate_config(config: dict, text: str = "", overrides=()) -> list[str]:
    """Schema diagnostics as ``field: message (line N)`` strings; empty when valid."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    overridden = {_parse_override(item)[0][0] for item in overrides or ()}
    messages = []
    for error in sorted(validator.iter_errors(config), key=lambda err: list(map(str, err.absolute_path))):
        path = list(error.absolute_path)
        where = ".".join(str(p) for p in path) or "<root>"
        line = _line_of(text, path) if text else None
        origin = f" (line {line})" if line else ""
        if path and path[0] in overridden:
            origin += " (possibly from --override)"
        messages.append(f"{where}: {error.message}{origin}")
    if not messages:
        messages.extend(_semantic_errors(config, text))
    return messages


def _semantic_errors(config: dict, text: str) -> list[str]:
    drive = config.get("drive", {})
    out = []
    if config.get("kind") in ("single_gate", "single_average", "holonomy_checks") and drive.get("gate") == "custom":
        has_angles = "theta" in drive and "phi" in drive
        has_amplitudes = "omega1_mhz" in drive and "omega2_mhz" in drive
        if not (has_angles or has_amplitudes):
            line = _line_of(text, ["drive", "gate"])
            out.append(
                "drive: a custom gate needs theta and phi, or omega1_mhz and omega2_mhz"
                + (f" (line {line})" if line else "")
            )
        if has_amplitudes and np.hypot(drive["omega1_mhz"], drive["omega2_mhz"]) == 0:
            out.append("drive: omega1_mhz and omega2_mhz cannot both be zero")
    if np.allclose(drive.get("initial", [1.0, 0.0]), 0.0):
        out.append("drive.initial: amplitudes cannot all be zero")
    return out


@dataclass(frozen=True)
class Scenario:
    """A validated configuration with defaults filled in (frequencies still in MHz)."""

    kind: str
    config: dict
    source: str = ""
    overrides: tuple[str, ...] = field(default=())

    @property
    def name(self) -> str:
        return self.config["name"] or self.kind

    # -- builders ---------------------------------------------------------

    def drive_angles(self) -> tuple[float, float, float]:
        """(theta, phi, Omega in rad/ns) of the configured single-qubit drive."""
        drive = self.config["drive"]
        gate = drive["gate"]
        if gate == "hadamard":
            return np.pi / 4, np.pi, mhz(drive["omega_mhz"])
        if gate == "not":
            return np.pi / 2, 0.0, mhz(drive["omega_mhz"])
        if "omega1_mhz" in drive and "omega2_mhz" in drive:
            o1, o2 = drive["omega1_mhz"], drive["omega2_mhz"]
            theta = float(np.mod(2.0 * np.arctan2(o2, o1), 2.0 * np.pi))
            return theta, float(drive.get("phi", 0.0)), mhz(np.hypot(o1, o2))
        return float(drive["theta"]), float(drive["phi"]), mhz(drive["omega_mhz"])

    def single(self) -> SingleQubitScenario:
        system, deco, num = self.config["system"], self.config["decoherence"], self.config["numerics"]
        theta, phi, omega = self.drive_angles()
        return SingleQubitScenario(
            theta=theta,
            phi=phi,
            name=self.name,
            Omega=omega,
            omega_c=mhz(system["omega_c_mhz"]),
            g0=mhz(system["g0_mhz"]),
            anharmonicity=mhz(system["anharmonicity_mhz"]),
            kappa=mhz(deco["kappa_mhz"]),
            gamma1=mhz(deco["gamma1_mhz"]),
            gamma2=mhz(deco["gamma2_mhz"]),
            levels=system["transmon_levels"],
            fock_cutoff=system["fock_cutoff"],
            decoherence=deco["enabled"],
            drive_extension=num["drive_extension"],
            duration=num["duration_ns"],
            output_resolution=num["output_resolution_ns"],
            rtol=num["rtol"],
            initial=tuple(self.config["drive"]["initial"]),
        )

    def two(self) -> TwoQubitScenario:
        cell, deco, num = self.config["cell"], self.config["decoherence"], self.config["numerics"]
        return TwoQubitScenario(
            name=self.name,
            T13=mhz(cell["T13_mhz"]),
            T23=None if cell["T23_mhz"] is None else mhz(cell["T23_mhz"]),
            omega_c=mhz(cell["omega_c_mhz"]),
            g=mhz(cell["g_mhz"]),
            rate=mhz(cell["rate_mhz"]),
            decoherence=deco["enabled"],
            initial=cell["initial"],
            target=cell["target"],
            duration=num["duration_ns"],
            output_resolution=num["output_resolution_ns"],
            rtol=num["rtol"],
        )

    def device(self) -> DeviceSpec:
        circ = self.config["circuit"]
        return DeviceSpec(
            l=circ["unit_inductance_h_per_m"],
            c=circ["unit_capacitance_f_per_m"],
            lengths=tuple(x * 1e-3 for x in circ["lengths_mm"]),
            I_J0=circ["I_J0_uA"] * 1e-6,
            dc_bias=circ["dc_bias"],
            C_J=circ["C_J_pF"] * 1e-12,
            ac_amplitudes={(1, 3): circ["ac_amplitude_13"], (2, 3): circ["ac_amplitude_23"]},
            phi_rms=tuple(circ["phi_rms"]),
        )

    # -- diagnostics ------------------------------------------------------

    def warnings(self) -> list[str]:
        out = []
        if self.kind in ("single_gate", "single_average", "holonomy_checks"):
            _, _, omega = self.drive_angles()
            g0 = mhz(self.config["system"]["g0_mhz"])
            if omega / g0 > 0.1:
                out.append(
                    f"Omega/g0 = {omega / g0:.3g} > 0.1: counter-rotating terms are not negligible and "
                    "the effective Lambda-system description loses accuracy"
                )
        if self.kind == "two_qubit_gate":
            cell = self.config["cell"]
            for key in ("T13_mhz", "T23_mhz"):
                value = cell[key] if cell[key] is not None else cell["T13_mhz"]
                if abs(value) > 0.1 * cell["g_mhz"]:
                    out.append(f"cell.{key} = {value} MHz exceeds g/10; neglected transitions (>= 2g) may matter")
        if self.kind == "circuit_params":
            out.extend(self.device().warnings())
        return out

    def derived(self) -> dict:
        if self.kind in ("single_gate", "single_average", "holonomy_checks"):
            theta, phi, omega = self.drive_angles()
            system = self.config["system"]
            dims = {"transmon": system["transmon_levels"], "cavity": system["fock_cutoff"]}
            return {
                "theta": theta,
                "theta_over_pi": theta / np.pi,
                "phi": phi,
                "Omega1_mhz": float(np.cos(theta / 2) * omega / mhz(1.0)),
                "Omega2_mhz": float(np.sin(theta / 2) * omega / mhz(1.0)),
                "gate_time_ns": cyclic_time("single", omega),
                "hilbert_dims": dims,
                "hilbert_dim": dims["transmon"] * dims["cavity"],
            }
        if self.kind == "two_qubit_gate":
            cell = self.config["cell"]
            return {
                "gate_time_ns": cyclic_time("two", abs(mhz(cell["T13_mhz"]))),
                "hilbert_dims": {"unit1": 3, "unit2": 3, "unit3": 3},
                "hilbert_dim": 27,
                "modulation_frequency_mhz": 6.0 * cell["g_mhz"],
            }
        return {}

    def echo(self) -> dict:
        """The configuration plus every ``*_mhz`` field converted to rad/ns."""
        angular = {}
        for section, values in self.config.items():
            if isinstance(values, dict):
                converted = {
                    key[: -len("_mhz")] + "_rad_per_ns": (None if v is None else mhz(v))
                    for key, v in values.items()
                    if key.endswith("_mhz")
                }
                if converted:
                    angular[section] = converted
        return {"config_mhz": copy.deepcopy(self.config), "angular_rad_per_ns": angular}


def load_scenario(path, overrides=()) -> Scenario:
    """Read, override, validate and default-fill a scenario file.

    Raises
    ------
    ScenarioError
        With one diagnostic per problem (unreadable file, JSON syntax,
        schema or consistency violation).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read configuration ({exc.strerror})"]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    if not isinstance(raw, dict):
        raise ScenarioError([f"{path}: top level must be a JSON object"])
    raw = apply_overrides(raw, overrides)
    problems = validate_config(raw, text, overrides)
    if problems:
        raise ScenarioError(problems)
    config = _merge(DEFAULTS, raw)
    problems = _semantic_errors(config, text)
    if problems:
        raise ScenarioError(problems)
    return Scenario(config["kind"], config, str(path), tuple(overrides or ()))
