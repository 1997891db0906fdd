"""JSON configuration with engineering units at the boundary.

Schema (every key optional, unknown keys rejected)::

    {
      "scenario": {
        "num_icvs": 10, "speed_mps": 30,
        "bandwidth_MHz": 20, "power_dBm": 23, "noise_dBm_per_Hz": -174,
        "F_local_Gcps": 2, "F_rsu_Gcps": 32, "F_haps_Gcps": 100,
        "input_bits_Kbit": [100, 300, 500, 700, 900],
        "density_cycles_per_bit": [500, 1000, 1500, 2000, 2500],
        "rsu_positions_m": [80, 240], "rsu_coverage_m": 160,
        "haps_altitude_m": 20000, "haps_horizontal_m": null,
        "alpha": 3.7, "beta0": null, "rician_K_dB": 10,
        "haps_antenna_gain_dBi": 17, "rsu_antenna_gain_dBi": 0,
        "carrier_GHz": 2, "slot_s": 1, "d_min_m": 1
      },
      "experiment": {
        "axis": "none", "values": [], "schemes": ["HRVIN"], "modes": ["sum"],
        "enforce_handoff": true, "seeds": {"base": 0, "count": 20}, "slots": 1
      },
      "solver": {"i_max": 50, "zeta": 1e-6}
    }

``seeds`` may also be an explicit list of integers.
"""
from __future__ import annotations

import copy
import json
from typing import Any

from .scenario import ConfigError, ScenarioConfig


def _db(x):
    return 10 ** (float(x) / 10)


def _dbm(x):
    return 10 ** (float(x) / 10) * 1e-3


# config key -> (ScenarioConfig field, converter to SI)
SCENARIO_KEYS = {
    "num_icvs": ("num_icvs", int),
    "speed_mps": ("speed", float),
    "bandwidth_MHz": ("B_max", lambda v: float(v) * 1e6),
    "power_dBm": ("P_max", _dbm),
    "noise_dBm_per_Hz": ("N0", _dbm),
    "F_local_Gcps": ("F_local", lambda v: float(v) * 1e9),
    "F_rsu_Gcps": ("F_rsu", lambda v: float(v) * 1e9),
    "F_haps_Gcps": ("F_haps", lambda v: float(v) * 1e9),
    "input_bits_Kbit": ("input_bits_set", lambda v: tuple(float(x) * 1e3 for x in v)),
    "density_cycles_per_bit": ("density_set", lambda v: tuple(float(x) for x in v)),
    "rsu_positions_m": ("rsu_positions", lambda v: tuple(float(x) for x in v)),
    "rsu_coverage_m": ("rsu_coverage_D", float),
    "road_length_m": ("road_length", lambda v: None if v is None else float(v)),
    "haps_altitude_m": ("haps_altitude", float),
    "haps_horizontal_m": ("haps_horizontal", lambda v: None if v is None else float(v)),
    "alpha": ("alpha", float),
    "beta0": ("beta0", lambda v: None if v is None else float(v)),
    "rician_K_dB": ("rician_K_dB", float),
    "haps_antenna_gain_dBi": ("haps_antenna_gain", _db),
    "rsu_antenna_gain_dBi": ("rsu_antenna_gain", _db),
    "carrier_GHz": ("carrier_hz", lambda v: float(v) * 1e9),
    "slot_s": ("slot_s", float),
    "d_min_m": ("d_min", float),
}

EXPERIMENT_DEFAULTS = {
    "axis": "none",
    "values": [],
    "schemes": ["HRVIN"],
    "modes": ["sum"],
    "enforce_handoff": True,
    "seeds": {"base": 0, "count": 20},
    "slots": 1,
}

SOLVER_DEFAULTS = {"i_max": 50, "zeta": 1e-6}

SECTIONS = ("scenario", "experiment", "solver")


def _check_keys(section: str, given: dict, allowed) -> None:
    if not isinstance(given, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")


def validate_document(doc: Any) -> dict:
    """Normalised copy of a raw config document, with defaults filled in."""
    if doc is None:
        doc = {}
    _check_keys("<root>", doc, SECTIONS)
    _check_keys("scenario", doc.get("scenario", {}), SCENARIO_KEYS)
    _check_keys("experiment", doc.get("experiment", {}), EXPERIMENT_DEFAULTS)
    _check_keys("solver", doc.get("solver", {}), SOLVER_DEFAULTS)
    out = {
        "scenario": dict(doc.get("scenario", {})),
        "experiment": {**copy.deepcopy(EXPERIMENT_DEFAULTS), **doc.get("experiment", {})},
        "solver": {**SOLVER_DEFAULTS, **doc.get("solver", {})},
    }
    scenario_config(out)  # surfaces conversion and range errors early
    return out


def scenario_config(doc: dict) -> ScenarioConfig:
    kwargs = {}
    for key, value in doc.get("scenario", {}).items():
        name, conv = SCENARIO_KEYS[key]
        try:
            kwargs[name] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for scenario.{key}: {value!r}") from exc
    cfg = ScenarioConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return validate_document(doc)


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``section.key=value`` overrides; values parse as JSON, else as strings."""
    raw = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        if "." not in path:
            raise ConfigError(f"override {item!r} needs a section prefix")
        section, key = path.split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r} in override {item!r}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        raw.setdefault(section, {})[key] = parsed
    return validate_document(raw)
