"""Flat key-value configuration files and the bundled example fixtures.

Angles are written in degrees in files and converted to radians once at
parse time.  A sweep file is a config file plus two ``axis`` lines naming
the swept parameter, its range and step count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from math import radians, degrees

from .model import ContactConfig

SCHEMA_VERSION = 1

_ANGLE_KEYS = {"alpha", "phi1", "phi2"}
_FLOAT_KEYS = {"alpha", "l1", "l2", "h", "phi1", "phi2", "mu1", "mu2",
               "f_mag", "tau_ex", "m", "rho"}
_REQUIRED = {"l1", "l2", "h", "phi1", "phi2", "mu1", "mu2"}

SWEEP_PARAMETERS = ("alpha", "mu1", "mu2", "l1", "l2", "h", "phi1", "phi2",
                    "com_x", "com_y")


class ConfigError(ValueError):
    """Malformed or invalid configuration input."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float
    steps: int

    def values(self):
        if self.steps == 1:
            return [self.lo]
        w = (self.hi - self.lo) / (self.steps - 1)
        return [self.lo + k * w for k in range(self.steps)]


@dataclass(frozen=True)
class SweepSpec:
    base: ContactConfig
    axis1: SweepAxis
    axis2: SweepAxis
    map_points: int = 301


def _parse_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        yield lineno, key, value


def _build_config(fields: dict) -> ContactConfig:
    missing = _REQUIRED - fields.keys()
    if missing:
        raise ConfigError(f"missing required fields: {', '.join(sorted(missing))}")
    kwargs = dict(fields)
    for key in _ANGLE_KEYS & kwargs.keys():
        kwargs[key] = radians(kwargs[key])
    try:
        return ContactConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> ContactConfig:
    fields = {}
    for lineno, key, value in _parse_lines(text):
        if key == "schema":
            if value.strip() != str(SCHEMA_VERSION):
                raise ConfigError(f"line {lineno}: unsupported schema version {value!r}")
            continue
        if key.startswith("axis"):
            raise ConfigError(f"line {lineno}: axis entries belong in sweep files")
        if key not in _FLOAT_KEYS:
            raise ConfigError(f"line {lineno}: unknown field {key!r}")
        try:
            fields[key] = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: field {key!r} is not a number: {value!r}")
    return _build_config(fields)


def format_config(config: ContactConfig) -> str:
    lines = [f"schema = {SCHEMA_VERSION}"]
    for key in ("alpha", "l1", "l2", "h", "phi1", "phi2", "mu1", "mu2",
                "f_mag", "tau_ex", "m", "rho"):
        value = getattr(config, key if key != "alpha" else "alpha")
        if key in _ANGLE_KEYS:
            value = degrees(value)
        lines.append(f"{key} = {format(float(value), '.17g')}")
    return "\n".join(lines) + "\n"


def _parse_axis(lineno: int, value: str) -> SweepAxis:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"line {lineno}: axis needs 'name, min, max, steps'")
    name = parts[0]
    if name not in SWEEP_PARAMETERS:
        raise ConfigError(f"line {lineno}: unknown sweep parameter {name!r}")
    try:
        lo, hi = float(parts[1]), float(parts[2])
        steps = int(parts[3])
    except ValueError:
        raise ConfigError(f"line {lineno}: bad axis numbers in {value!r}")
    if steps < 2:
        raise ConfigError(f"line {lineno}: axis needs at least 2 steps")
    if not lo < hi:
        raise ConfigError(f"line {lineno}: axis needs min < max")
    return SweepAxis(name, lo, hi, steps)


def parse_sweep(text: str) -> SweepSpec:
    fields = {}
    axes = {}
    map_points = 301
    for lineno, key, value in _parse_lines(text):
        if key == "schema":
            if value.strip() != str(SCHEMA_VERSION):
                raise ConfigError(f"line {lineno}: unsupported schema version {value!r}")
        elif key in ("axis1", "axis2"):
            axes[key] = _parse_axis(lineno, value)
        elif key == "map_points":
            map_points = int(value)
        elif key in _FLOAT_KEYS:
            try:
                fields[key] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: field {key!r} is not a number")
        else:
            raise ConfigError(f"line {lineno}: unknown field {key!r}")
    if "axis1" not in axes or "axis2" not in axes:
        raise ConfigError("sweep file needs axis1 and axis2")
    return SweepSpec(base=_build_config(fields), axis1=axes["axis1"],
                     axis2=axes["axis2"], map_points=map_points)


def apply_parameter(config: ContactConfig, name: str, value: float) -> ContactConfig:
    """Return the config with one sweep parameter set.  Angle parameters take
    degrees.  com_x/com_y translate the center of mass while the contacts
    stay fixed in space, which shifts the contact offsets and height."""
    if name not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    kwargs = {
        "l1": config.l1, "l2": config.l2, "h": config.h,
        "phi1": config.phi1, "phi2": config.phi2,
        "mu1": config.mu1, "mu2": config.mu2,
        "alpha": config.alpha, "f_mag": config.f_mag, "tau_ex": config.tau_ex,
        "m": config.m, "rho": config.rho,
    }
    if name == "com_x":
        kwargs["l1"] = config.l1 - value
        kwargs["l2"] = config.l2 - value
    elif name == "com_y":
        kwargs["h"] = config.h + value
    elif name in _ANGLE_KEYS:
        kwargs[name] = radians(value)
    else:
        kwargs[name] = value
    return ContactConfig(**kwargs)


def config_digest(config: ContactConfig) -> str:
    payload = ",".join(format(float(getattr(config, f)), ".17g") for f in (
        "l1", "l2", "h", "phi1", "phi2", "mu1", "mu2", "alpha", "f_mag",
        "tau_ex", "m", "rho"))
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def load_fixture(name: str) -> str:
    """Text of a bundled example file, e.g. 'example3.cfg'."""
    return resources.files("contactstab.fixtures").joinpath(name).read_text()


def fixture_config(name: str) -> ContactConfig:
    return parse_config(load_fixture(name))
