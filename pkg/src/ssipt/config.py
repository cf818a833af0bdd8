"""Workbench configuration: strict, line-oriented, unit-suffixed keys.

Format: `[section]` headers with `key = value` lines, `#` comments.
Every physical key carries its display unit in the name (l1_uH, fs_kHz,
air_gap_mm) and is converted to SI on load; unknown keys and sections are
rejected with the offending line number. serialize() emits text that
reparses to an equal configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import CircuitParams
from .design import DesignSpec
from .errors import ConfigError, DomainError
from .magnetics import CouplerGeometry


@dataclass(frozen=True)
class SimOptions:
    max_cycles: int = 2000
    steps_per_cycle: int = 1000
    steady_rel_tol: float = 1e-4
    keep_cycles: int = 16


@dataclass(frozen=True)
class SweepGrids:
    k_values: tuple = tuple(round(0.02 * i, 10) for i in range(21))
    dx_values: tuple = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)
    dy_values: tuple = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)


@dataclass(frozen=True)
class CalibrationTargets:
    aligned_k: float = 0.38
    misaligned_k: float | None = None
    misaligned_dx: float = 0.010
    misaligned_dy: float = 0.050


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    csv: bool = True
    svg: bool = True


@dataclass(frozen=True)
class WorkbenchConfig:
    circuit: CircuitParams
    geometry: CouplerGeometry | None = None
    design: DesignSpec | None = None
    sim: SimOptions = field(default_factory=SimOptions)
    sweeps: SweepGrids = field(default_factory=SweepGrids)
    calibration: CalibrationTargets = field(default_factory=CalibrationTargets)
    output: OutputOptions = field(default_factory=OutputOptions)


# key -> (target field, SI scale). Types are inferred from the scale
# entry: "int", "bool", "str", "floats" (comma list) or a float factor.
_CIRCUIT_KEYS = {
    "vdc_V": ("vdc", 1.0),
    "vb_V": ("vb", 1.0),
    "fs_kHz": ("fs", 1e3),
    "l1_uH": ("l1", 1e-6),
    "l2_uH": ("l2", 1e-6),
    "c1_nF": ("c1", 1e-9),
    "c2_nF": ("c2", 1e-9),
    "k": ("k", 1.0),
    "r1_ohm": ("r1", 1.0),
    "r2_ohm": ("r2", 1.0),
    "vd_V": ("vd", 1.0),
    "dead_time_ns": ("dead_time", 1e-9),
}
_CIRCUIT_REQUIRED = ("vdc_V", "vb_V", "fs_kHz", "l1_uH", "l2_uH",
                     "c1_nF", "c2_nF", "k")

_GEOMETRY_KEYS = {
    "tx_rod_diameter_mm": ("tx_rod_diameter", 1e-3),
    "tx_rod_length_mm": ("tx_rod_length", 1e-3),
    "tx_turns_per_rod": ("tx_turns_per_rod", "int"),
    "tx_rod_spacing_mm": ("tx_rod_spacing", 1e-3),
    "rx_ferrite_diameter_mm": ("rx_ferrite_diameter", 1e-3),
    "rx_ferrite_length_mm": ("rx_ferrite_length", 1e-3),
    "rx_turns_per_leg": ("rx_turns_per_leg", "int"),
    "rx_leg_spacing_mm": ("rx_leg_spacing", 1e-3),
    "air_gap_mm": ("air_gap", 1e-3),
    "dx_mm": ("dx", 1e-3),
    "dy_mm": ("dy", 1e-3),
    "mu_eff_tx": ("mu_eff_tx", 1.0),
    "mu_eff_rx": ("mu_eff_rx", 1.0),
    "tx_wire_radius_mm": ("tx_wire_radius", 1e-3),
    "rx_wire_radius_mm": ("rx_wire_radius", 1e-3),
}
_GEOMETRY_REQUIRED = ("tx_rod_diameter_mm", "tx_rod_length_mm",
                      "tx_turns_per_rod", "tx_rod_spacing_mm",
                      "rx_ferrite_diameter_mm", "rx_ferrite_length_mm",
                      "rx_turns_per_leg", "rx_leg_spacing_mm", "air_gap_mm")

_DESIGN_KEYS = {
    "i1_max_zero_k_A": ("i1_max_zero_k", 1.0),
    "target_pout_W": ("target_pout", 1.0),
    "k_nominal": ("k_nominal", 1.0),
    "k_min": ("k_min", 1.0),
    "k_max": ("k_max", 1.0),
    "zvs_required": ("zvs_required", "bool"),
    "power_band_low": ("power_band_low", 1.0),
    "power_band_high": ("power_band_high", 1.0),
}
_DESIGN_REQUIRED = ("i1_max_zero_k_A", "target_pout_W", "k_nominal",
                    "k_min", "k_max")

_SIM_KEYS = {
    "max_cycles": ("max_cycles", "int"),
    "steps_per_cycle": ("steps_per_cycle", "int"),
    "steady_rel_tol": ("steady_rel_tol", 1.0),
    "keep_cycles": ("keep_cycles", "int"),
}

_SWEEPS_KEYS = {
    "k_values": ("k_values", "floats"),
    "dx_values_mm": ("dx_values", "floats_mm"),
    "dy_values_mm": ("dy_values", "floats_mm"),
}

_CALIBRATION_KEYS = {
    "aligned_k": ("aligned_k", 1.0),
    "misaligned_k": ("misaligned_k", 1.0),
    "misaligned_dx_mm": ("misaligned_dx", 1e-3),
    "misaligned_dy_mm": ("misaligned_dy", 1e-3),
}

_OUTPUT_KEYS = {
    "directory": ("directory", "str"),
    "csv": ("csv", "bool"),
    "svg": ("svg", "bool"),
}

_SECTIONS = {
    "circuit": _CIRCUIT_KEYS,
    "geometry": _GEOMETRY_KEYS,
    "design": _DESIGN_KEYS,
    "sim": _SIM_KEYS,
    "sweeps": _SWEEPS_KEYS,
    "calibration": _CALIBRATION_KEYS,
    "output": _OUTPUT_KEYS,
}


def _parse_value(raw: str, kind, key: str, line: int):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "on", "1", "yes"):
                return True
            if low in ("false", "off", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "str":
            return raw
        if kind == "floats":
            return tuple(float(v) for v in raw.split(","))
        if kind == "floats_mm":
            return tuple(float(v) * 1e-3 for v in raw.split(","))
        return float(raw) * kind
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {e}", line=line) from e


def _suggest(key: str, table: dict) -> str:
    for known in table:
        if known.startswith(key + "_") or known.split("_")[0] == key:
            return f"; did you mean '{known}'? (keys carry their units)"
    return ""


def parse_config(text: str) -> WorkbenchConfig:
    """Parse and fully validate configuration text.

    Raises ConfigError with line numbers for unknown sections/keys,
    malformed values, missing required keys, and any physical-invariant
    violation (reported with the offending key).
    """
    section = None
    values: dict = {name: {} for name in _SECTIONS}
    lines_of: dict = {}
    seen_sections = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            seen_sections.add(section)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside any [section]", line=lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        table = _SECTIONS[section]
        if key not in table:
            raise ConfigError(
                f"unknown key '{key}' in [{section}]{_suggest(key, table)}",
                line=lineno,
            )
        if key in values[section]:
            raise ConfigError(f"duplicate key '{key}'", line=lineno)
        field_name, kind = table[key]
        values[section][field_name] = _parse_value(raw_value, kind, key, lineno)
        lines_of[(section, field_name)] = lineno

    if "circuit" not in seen_sections:
        raise ConfigError("missing circuit section ([circuit] block is required)")
    _check_required(values, "circuit", _CIRCUIT_REQUIRED, lines_of)
    circuit = _build(CircuitParams, values["circuit"], "circuit", lines_of)

    geometry = None
    if "geometry" in seen_sections:
        _check_required(values, "geometry", _GEOMETRY_REQUIRED, lines_of)
        geometry = _build(CouplerGeometry, values["geometry"], "geometry", lines_of)

    design = None
    if "design" in seen_sections:
        _check_required(values, "design", _DESIGN_REQUIRED, lines_of)
        dvals = dict(values["design"])
        lo = dvals.pop("power_band_low", 0.9)
        hi = dvals.pop("power_band_high", 1.5)
        dvals["power_band"] = (lo, hi)
        design = _build(DesignSpec, dvals, "design", lines_of)

    sim = _build(SimOptions, values["sim"], "sim", lines_of)
    sweeps = _build(SweepGrids, values["sweeps"], "sweeps", lines_of)
    calibration = _build(CalibrationTargets, values["calibration"],
                         "calibration", lines_of)
    output = _build(OutputOptions, values["output"], "output", lines_of)
    return WorkbenchConfig(
        circuit=circuit, geometry=geometry, design=design, sim=sim,
        sweeps=sweeps, calibration=calibration, output=output,
    )


def _check_required(values, section, required, lines_of):
    table = _SECTIONS[section]
    present = values[section]
    for key in required:
        field_name = table[key][0]
        if field_name not in present:
            raise ConfigError(f"missing required key '{key}' in [{section}]")


def _build(cls, kwargs, section, lines_of):
    try:
        return cls(**kwargs)
    except DomainError as e:
        msg = str(e)
        offending = msg.split(" ", 1)[0]
        line = lines_of.get((section, offending))
        key = _key_for(section, offending)
        detail = f"[{section}] {key or offending} violates a constraint: {msg}"
        raise ConfigError(detail, line=line) from e


def _key_for(section, field_name):
    for key, (name, _) in _SECTIONS[section].items():
        if name == field_name:
            return key
    return None


def _display(si_value: float, scale: float) -> str:
    """Display string whose parse reproduces si_value bit-exactly."""
    base = si_value / scale
    for cand in (base, math.nextafter(base, math.inf),
                 math.nextafter(base, -math.inf)):
        if float(repr(cand)) * scale == si_value:
            return repr(cand)
    return repr(base)


def _emit_section(out, name, table, obj, extra=None):
    out.append(f"[{name}]")
    data = dict(extra or {})
    for key, (field_name, kind) in table.items():
        if field_name in data:
            value = data[field_name]
        elif hasattr(obj, field_name):
            value = getattr(obj, field_name)
        else:
            continue
        if value is None:
            continue
        if kind == "int":
            out.append(f"{key} = {int(value)}")
        elif kind == "bool":
            out.append(f"{key} = {'true' if value else 'false'}")
        elif kind == "str":
            out.append(f"{key} = {value}")
        elif kind == "floats":
            out.append(f"{key} = {', '.join(repr(v) for v in value)}")
        elif kind == "floats_mm":
            out.append(f"{key} = {', '.join(_display(v, 1e-3) for v in value)}")
        else:
            out.append(f"{key} = {_display(value, kind)}")
    out.append("")


def serialize_config(config: WorkbenchConfig) -> str:
    """Emit text that parses back to an equal configuration."""
    out: list = []
    _emit_section(out, "circuit", _CIRCUIT_KEYS, config.circuit)
    if config.geometry is not None:
        _emit_section(out, "geometry", _GEOMETRY_KEYS, config.geometry)
    if config.design is not None:
        d = config.design
        extra = {"power_band_low": d.power_band[0],
                 "power_band_high": d.power_band[1]}
        _emit_section(out, "design", _DESIGN_KEYS, d, extra)
    _emit_section(out, "sim", _SIM_KEYS, config.sim)
    _emit_section(out, "sweeps", _SWEEPS_KEYS, config.sweeps)
    _emit_section(out, "calibration", _CALIBRATION_KEYS, config.calibration)
    _emit_section(out, "output", _OUTPUT_KEYS, config.output)
    return "\n".join(out)


def load_config(path) -> WorkbenchConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)
