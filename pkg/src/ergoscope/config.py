"""Scenario configuration: loading (TOML or JSON), strict schema validation,
and the canonical content hash embedded in every emitted file."""

import hashlib
import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np


class ConfigError(ValueError):
    def __init__(self, path, key, message):
        self.path = path
        self.key = key
        super().__init__(f"{path}: {key}: {message}")


_SECTIONS = {
    "model": {"preset", "params", "d", "u0", "delta", "onsite_terms", "pair_terms"},
    "lattice": {"D", "L", "boundary"},
    "partition": {"l", "mode"},
    "state": {"kind", "lambda", "index", "beta", "digits", "l"},
    "reference": {"policy", "beta", "window"},
    "bounds": {"beta0", "beta1", "c_tilde", "T"},
    "fig1": {"l", "h", "lambda_points", "beta_min", "beta_max", "beta_points",
             "crosscheck_sizes"},
    "eth": {"reference_policy", "window", "channels_per_state",
            "gates_per_circuit", "band"},
    "dynamics": {"T", "dt", "stride", "l_values", "schedules"},
    "thermo": {"beta_min", "beta_max", "beta_points"},
}
_TOP_LEVEL = set(_SECTIONS) | {"channels", "seed", "output_dir"}
_CHANNEL_KEYS = {"kind", "count", "gates", "duration"}
_SCHEDULE_KEYS = {"sites", "type", "value", "start", "stop", "amp", "omega", "phase"}
_MODEL_PRESETS = ("ising_zz_field", "mixed_field_ising")


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(path, "-", "config file not found")
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    elif path.suffix == ".json":
        raw = json.loads(path.read_text())
    else:
        raise ConfigError(path, "-", f"unsupported config suffix {path.suffix!r}")
    validate_config(raw, path)
    return raw


def validate_config(raw: dict, path="<config>") -> None:
    if not isinstance(raw, dict):
        raise ConfigError(path, "-", "top level must be a table/object")
    for key in raw:
        if key not in _TOP_LEVEL:
            raise ConfigError(path, key, "unknown top-level key")
    for section, allowed in _SECTIONS.items():
        body = raw.get(section)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(path, section, "section must be a table/object")
        for key in body:
            if key not in allowed:
                raise ConfigError(path, f"{section}.{key}", "unknown key")
    preset = raw.get("model", {}).get("preset")
    if preset is not None and preset not in _MODEL_PRESETS:
        raise ConfigError(path, "model.preset",
                          f"unknown preset (choose from {_MODEL_PRESETS})")
    for idx, ch in enumerate(raw.get("channels", []) or []):
        if not isinstance(ch, dict):
            raise ConfigError(path, f"channels[{idx}]", "must be a table/object")
        for key in ch:
            if key not in _CHANNEL_KEYS:
                raise ConfigError(path, f"channels[{idx}].{key}", "unknown key")
        if ch.get("kind") not in ("identity", "cnot_protocol", "random_circuits"):
            raise ConfigError(path, f"channels[{idx}].kind",
                              f"unknown channel kind {ch.get('kind')!r}")
    for idx, sched in enumerate(raw.get("dynamics", {}).get("schedules", []) or []):
        if not isinstance(sched, dict):
            raise ConfigError(path, f"dynamics.schedules[{idx}]", "must be a table")
        for key in sched:
            if key not in _SCHEDULE_KEYS:
                raise ConfigError(path, f"dynamics.schedules[{idx}].{key}",
                                  "unknown key")
        if sched.get("type") not in ("constant", "ramp", "sine"):
            raise ConfigError(path, f"dynamics.schedules[{idx}].type",
                              f"unknown schedule type {sched.get('type')!r}")


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_matrix(nested) -> np.ndarray:
    """Nested array of numbers or [re, im] two-lists -> complex ndarray."""
    def scalar(v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError(f"complex entry must be [re, im], got {v}")
            return complex(float(v[0]), float(v[1]))
        return complex(float(v))

    rows = [[scalar(v) for v in row] for row in nested]
    mat = np.array(rows, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    return mat
