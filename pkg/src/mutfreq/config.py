"""Experiment configuration: sectioned INI files with typed, validated keys.

Example::

    [model]
    kind = multisite
    a = 0.25
    b = 0.18
    mu = 0.001
    S = 50
    c0 = 1

    [stop]
    rule = total_size
    n = 1000

    [run]
    reps = 10000
    seed = 1
    conditioning = on_reached

Command-line overrides use ``section.key=value``.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    """Invalid or unknown configuration entry."""


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _int(s: str) -> int:
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"not an integer: {s!r}")
    return int(f)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        v = s.strip()
        if v not in options:
            raise ValueError(f"{s!r} is not one of {', '.join(options)}")
        return v

    return parse


TWO_TYPE_KEYS = {"alpha_a": float, "beta_a": float, "nu": float, "alpha_b": float, "beta_b": float, "a0": _int}
MULTISITE_KEYS = {"a": float, "b": float, "mu": float, "S": _int, "c0": _int, "limit_calibrated": _bool}

SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "model": {"kind": _choice("two_type", "multisite"), **TWO_TYPE_KEYS, **MULTISITE_KEYS},
    "stop": {"rule": _choice("fixed_time", "wildtype_size", "total_size"), "t": float, "n": _int},
    "run": {
        "reps": _int,
        "seed": _int,
        "conditioning": _choice("none", "on_reached"),
        "count": _choice("attempts", "accepted"),
        "max_events": _int,
        "sampler": _choice("direct", "yule"),
        "theory": _bool,
        "archive": _bool,
    },
    "dist": {
        "kind": _choice("clone", "bstar", "bcirc", "angerer", "btau", "btau-pgf", "sfs-limit"),
        "kmax": _int,
        "tol": float,
        "theta": float,
        "eta": float,
        "n": _int,
        "mode": _choice("population", "time"),
        "z": float,
    },
    "output": {"dir": str, "prefix": str},
}

DEFAULTS = {
    "model": {"kind": "two_type", "a0": 1, "c0": 1, "limit_calibrated": False},
    "run": {"reps": 1000, "seed": 0, "conditioning": "none", "max_events": 10**8, "sampler": "direct", "theory": True, "archive": False},
    "dist": {"kmax": 1000, "tol": 1e-12, "mode": "population"},
    "output": {"dir": ".", "prefix": ""},
}


@dataclass
class ExperimentConfig:
    """Parsed configuration; ``raw`` keeps the text values for hashing."""

    values: dict[str, dict[str, Any]]
    raw: dict[str, dict[str, str]] = field(default_factory=dict)

    def get(self, section: str, key: str, default=None):
        sec = self.values.get(section, {})
        if key in sec:
            return sec[key]
        return DEFAULTS.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        v = self.get(section, key)
        if v is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return v

    def digest(self) -> str:
        """SHA-256 over the canonical text of every entry that can change results.

        ``[output]`` is left out so the same experiment written to two
        directories carries the same digest.
        """
        lines = []
        for sec in sorted(self.raw):
            if sec == "output":
                continue
            for key in sorted(self.raw[sec]):
                lines.append(f"{sec}.{key}={self.raw[sec][key]}")
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (S)
    return cp


def parse_overrides(overrides: list[str] | None) -> list[tuple[str, str, str]]:
    out = []
    for item in overrides or []:
        lhs, eq, value = item.partition("=")
        section, dot, key = lhs.strip().partition(".")
        if not eq or not dot or not key:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        out.append((section, key, value.strip()))
    return out


def load_config(path=None, overrides: list[str] | None = None, text: str | None = None) -> ExperimentConfig:
    cp = _parser()
    if text is not None:
        cp.read_string(text)
    elif path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            cp.read(p)
        except configparser.Error as err:
            raise ConfigError(str(err)) from err
    raw: dict[str, dict[str, str]] = {s: dict(cp[s]) for s in cp.sections()}
    for section, key, value in parse_overrides(overrides):
        raw.setdefault(section, {})[key] = value
    return validate(raw)


def validate(raw: dict[str, dict[str, str]]) -> ExperimentConfig:
    values: dict[str, dict[str, Any]] = {}
    for section, entries in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        values[section] = {}
        for key, text in entries.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            try:
                v = SCHEMA[section][key](text)
            except ValueError as err:
                raise ConfigError(f"{section}.{key}: {err}") from err
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{section}.{key} must be finite")
            values[section][key] = v
    cfg = ExperimentConfig(values, raw)
    kind = cfg.get("model", "kind")
    allowed = set(TWO_TYPE_KEYS if kind == "two_type" else MULTISITE_KEYS) | {"kind"}
    extra = set(values.get("model", {})) - allowed
    if extra:
        raise ConfigError(f"keys not valid for model kind {kind!r}: {', '.join(sorted(extra))}")
    return cfg
