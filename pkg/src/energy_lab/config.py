"""
Sweep configuration files.

The format is INI-style ``key = value`` text with two sections::

    [sweep]
    dims = 16, 32, 64
    mu1_values = 0.02, 0.04, 0.06
    n_cov = 28
    n_samples = 16384
    master_seed = 0
    mode = ustat
    closeness = 0.1
    moment_mc_samples = 4194304
    threads = 1

    [families]
    Gaussian =
    MultivariateT = 2, 3, 5
    ExpScale = 0.75, 1, 1.25
    SinhArcsinhSkew = 0.05, 0.1, 0.2

Every key is optional; missing keys take the :class:`SweepConfig` defaults.
"""
from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

from .distributions import FAMILIES
from .harness import SweepConfig


class ConfigError(ValueError):
    """Invalid configuration file or override."""


_SWEEP_KEYS = {
    "dims": "int_list",
    "mu1_values": "float_list",
    "n_cov": "int",
    "n_samples": "int",
    "master_seed": "int",
    "mode": "str",
    "closeness": "float",
    "moment_mc_samples": "int",
    "threads": "int",
}


def _convert(key: str, kind: str, raw: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "int_list":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "float_list":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw.strip().lower()
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None


def parse_config_text(text: str, source: str = "<string>") -> dict:
    parser = configparser.ConfigParser(interpolation=None, empty_lines_in_values=False,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from None

    unknown_sections = [s for s in parser.sections() if s not in ("sweep", "families")]
    if unknown_sections:
        raise ConfigError(f"unknown section(s): {', '.join(unknown_sections)}")
    values: dict = {}
    if parser.has_section("sweep"):
        for key, raw in parser.items("sweep"):
            if key not in _SWEEP_KEYS:
                raise ConfigError(f"unknown config key: sweep.{key}")
            values[key] = _convert(key, _SWEEP_KEYS[key], raw)
    if parser.has_section("families"):
        fams = []
        for name, raw in parser.items("families"):
            if name not in FAMILIES:
                raise ConfigError(f"unknown config key: families.{name}")
            if name == "Gaussian":
                fams.append((name, None))
                continue
            params = _convert(name, "float_list", raw)
            if not params:
                raise ConfigError(f"family {name} needs at least one parameter value")
            fams.extend((name, p) for p in params)
        values["families"] = tuple(fams)
    return values


def load_config(path=None, overrides: dict | None = None) -> SweepConfig:
    """Build a :class:`SweepConfig` from an optional file plus overrides (which win)."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
        values.update(parse_config_text(text, str(p)))
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    allowed = {f.name for f in dataclasses.fields(SweepConfig)}
    extra = sorted(set(values) - allowed)
    if extra:
        raise ConfigError(f"unknown config key(s): {', '.join(extra)}")
    try:
        return SweepConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
