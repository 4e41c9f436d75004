"""Run configuration: TOML files validated against strict per-experiment schemas.

Unknown keys are rejected, every number carries a range, and error messages
name the offending key by its dotted path.
"""
from __future__ import annotations

import copy
import hashlib
import sys
from pathlib import Path
from typing import Any

import jsonschema

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = (
    "optics-tables",
    "static-spectrum",
    "pulse",
    "sweep",
    "floquet-spectrum",
    "floquet-bands",
    "winding",
)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


def _num(lo=None, hi=None, *, exclusive_lo=False, integer=False, default=None):
    schema: dict[str, Any] = {"type": "integer" if integer else "number"}
    if lo is not None:
        schema["exclusiveMinimum" if exclusive_lo else "minimum"] = lo
    if hi is not None:
        schema["maximum"] = hi
    if default is not None:
        schema["default"] = default
    return schema


def _obj(props: dict, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


def _grid(lo, hi, max_points=100001):
    return _obj(
        {"start": _num(lo, hi), "stop": _num(lo, hi), "points": _num(2, max_points, integer=True)},
        required=("start", "stop", "points"),
    )


OPTICS = _obj(
    {
        "focal_length": _num(0, 1e5, exclusive_lo=True, default=100.0),
        "wavelength": _num(0, 1.0, exclusive_lo=True, default=0.885e-3),
        "waist": _num(0, 100.0, exclusive_lo=True, default=0.2),
        "steps": {"type": "array", "items": _num(1, 20, integer=True), "minItems": 1, "default": [1, 2, 3, 4, 5]},
        "j_max": _num(1, 20, integer=True, default=4),
    }
)

CHAIN = _obj(
    {
        "j0": _num(0, 100.0, default=0.5),
        "j1": _num(0, 100.0, default=1.0),
        "phase": _num(-6.2832, 6.2832, default=0.0),
        "l_max": _num(1, 2000, integer=True, default=49),
        "step": _num(1, 20, integer=True, default=4),
        "boundary": {"enum": ["pinhole", "ideal", "soft"], "default": "pinhole"},
        "l_extra": _num(0, 500, integer=True, default=25),
        "gamma0": _num(0, 100.0, exclusive_lo=True, default=0.05),
        "decay_width": _num(0, 1e4, exclusive_lo=True, default=5.0),
        "mirror_L": _num(0, 1e4, exclusive_lo=True, default=30.0),
        "loss_rate": _num(0, 1e4, default=10.0),
        "eta": {"type": "array", "items": _num(0, 1), "default": None},
    }
)

PULSE = _obj(
    {
        "target_site": _num(-10000, 10000, integer=True, default=0),
        "center": _num(-1e4, 1e4, default=3.0),
        "width": _num(0, 1e4, exclusive_lo=True, default=2.0),
    }
)

DRIVE = _obj(
    {
        "j0": _num(0, 100.0, default=2.0),
        "j1": _num(0, 100.0, default=1.0),
        "lam": _num(0, 100.0, default=1.6),
        "omega": _num(0, 1e4, exclusive_lo=True, default=10.0),
        "replica_cutoff": _num(1, 64, integer=True, default=6),
        "k_points": _num(16, 65536, integer=True, default=256),
        "time_steps": _num(64, 65536, integer=True, default=512),
    }
)

GRID_KEYS = {
    "omega": _grid(-1e4, 1e4),
    "t": _grid(0, 1e5),
    "j0": _grid(0, 100.0),
    "Omega": _grid(1e-3, 1e4),
    "k": _obj({"points": _num(16, 65536, integer=True)}, required=("points",)),
}

SECTIONS = {
    "optics-tables": {"optics": True},
    "static-spectrum": {"optics": False, "chain": True, "grid": ("omega", "j0")},
    "pulse": {"optics": False, "chain": True, "pulse": False, "grid": ("t",)},
    "sweep": {"optics": False, "chain": True, "pulse": False, "grid": ("j0",), "t_star": True},
    "floquet-spectrum": {"optics": False, "chain": False, "drive": False, "grid": ("Omega", "omega")},
    "floquet-bands": {"drive": False, "grid": ("k",)},
    "winding": {"optics": False, "chain": False, "drive": False, "grid": ("Omega",)},
}


def schema_for(experiment: str) -> dict:
    spec = SECTIONS[experiment]
    props: dict[str, Any] = {
        "experiment": {"const": experiment},
        "seed": _num(0, 2**31 - 1, integer=True, default=0),
        "output_dir": {"type": "string", "minLength": 1},
        "threads": _num(1, 1024, integer=True, default=1),
    }
    required = ["experiment"]
    for name, section in (("optics", OPTICS), ("chain", CHAIN), ("pulse", PULSE), ("drive", DRIVE)):
        if name in spec:
            props[name] = section
            if spec[name]:
                required.append(name)
    if "grid" in spec:
        keys = spec["grid"]
        props["grid"] = _obj({k: GRID_KEYS[k] for k in keys}, required=keys)
        required.append("grid")
    if "t_star" in spec:
        props["t_star"] = _num(0, 1e5, exclusive_lo=True, default=15.0)
    if experiment == "pulse":
        props["sites"] = {"type": "array", "items": _num(-10000, 10000, integer=True), "minItems": 1}
    return _obj(props, required)


def _path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path) or "<root>"


def _describe(error: jsonschema.ValidationError) -> str:
    where = _path(error)
    if error.validator == "additionalProperties":
        allowed = sorted(error.schema.get("properties", {}))
        extra = sorted(set(error.instance) - set(allowed))
        key = ".".join(filter(None, [where if where != "<root>" else "", extra[0] if extra else ""]))
        return f"unknown key {key!r}; allowed here: {', '.join(allowed)}"
    if error.validator == "required":
        return f"missing required key in {where}: {error.message}"
    if error.validator == "type":
        return f"{where}: expected {error.validator_value}, got {type(error.instance).__name__} {error.instance!r}"
    if error.validator in ("minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum"):
        return f"{where}: value {error.instance!r} out of range ({error.validator} {error.validator_value})"
    return f"{where}: {error.message}"


def _fill_defaults(instance: dict, schema: dict) -> None:
    for key, sub in schema.get("properties", {}).items():
        if key not in instance:
            if "default" in sub and sub["default"] is not None:
                instance[key] = copy.deepcopy(sub["default"])
            elif sub.get("type") == "object" and not sub.get("required"):
                # an omitted optional section means "all defaults"
                instance[key] = {}
                _fill_defaults(instance[key], sub)
            continue
        if sub.get("type") == "object" and isinstance(instance[key], dict):
            _fill_defaults(instance[key], sub)


def validate(raw: dict) -> dict:
    """Validate a parsed config and return a copy with defaults filled in."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: expected one of {', '.join(EXPERIMENTS)}, got {experiment!r}")
    schema = schema_for(experiment)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(e.absolute_path), _path(e)))
    if errors:
        raise ConfigError(_describe(errors[0]))
    cfg = copy.deepcopy(raw)
    _fill_defaults(cfg, schema)
    for name, grid in cfg.get("grid", {}).items():
        if "start" in grid and not grid["stop"] > grid["start"]:
            raise ConfigError(f"grid.{name}: stop ({grid['stop']}) must exceed start ({grid['start']})")
    chain = cfg.get("chain")
    if chain and chain.get("boundary") == "soft" and experiment != "static-spectrum":
        raise ConfigError("chain.boundary: 'soft' is only available for static-spectrum")
    return cfg


def load(path: str | Path) -> tuple[dict, str]:
    """Parse and validate a TOML config; also return the SHA-256 of its bytes."""
    data = Path(path).read_bytes()
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return validate(raw), hashlib.sha256(data).hexdigest()


def leaf_paths(cfg: dict, prefix: tuple = ()) -> list[tuple]:
    """Dotted paths of every scalar or list leaf, for mutation tests."""
    out = []
    for key, value in cfg.items():
        if isinstance(value, dict):
            out.extend(leaf_paths(value, prefix + (key,)))
        else:
            out.append(prefix + (key,))
    return out
