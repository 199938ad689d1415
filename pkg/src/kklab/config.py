"""Configuration files.

A configuration is a flat list of ``key = value`` lines; ``#`` and ``;``
start comments and string values may be quoted.  Example::

    scenario = riemann
    left = 2, 2
    right = 1, 1
    epsilon = 0.1

Keys and defaults
-----------------
Run: ``flux_law`` (thin_film), ``epsilon`` (0.1), ``k`` (1), ``p`` (1),
``m`` (0.5), ``M`` (4), ``n_cells`` (400), ``boundary`` (periodic for
smooth_sine/constant, else outflow), ``t_end`` (1), ``cfl_adv`` (0.45),
``cfl_diff`` (0.4), ``representation`` (invariant), ``system`` (tailored),
``snapshot_every`` (10), ``max_steps`` (10000000).

Scenario: ``scenario`` (riemann; a built-in name such as ``shock`` or
``smooth_sine`` starts from that scenario's settings), ``left``, ``right``, ``x0`` (0),
``base``, ``amplitude`` (0), ``wavelength`` (1), ``phase_u`` (0),
``phase_v`` (pi/2), ``table`` (``x,u,v; x,u,v; ...``), ``x_left`` (-5),
``x_right`` (5), ``mollifier_width`` (two cells).
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from typing import Iterable

from .errors import IoError, ParseError, ValidationError
from .model import State, parse_state
from .scenarios import Scenario, builtin_scenarios
from .viscous import SimConfig

__all__ = ["parse_config", "parse_config_text", "config_to_dict", "CONFIG_KEYS"]

_SECTION = "run"


def _str(text):
    return text


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _optional_float(text):
    return None if text.lower() in ("", "none", "auto") else float(text)


def _optional_str(text):
    return None if text.lower() in ("", "none", "auto") else text


def _table(text):
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = [float(t) for t in chunk.split(",")]
        if len(vals) != 3:
            raise ValueError(f"table rows need x,u,v; got {chunk!r}")
        rows.append(tuple(vals))
    return tuple(rows)


RUN_KEYS = {
    "flux_law": _str,
    "epsilon": float,
    "k": float,
    "p": float,
    "m": float,
    "M": float,
    "n_cells": _int,
    "boundary": _optional_str,
    "t_end": float,
    "cfl_adv": float,
    "cfl_diff": float,
    "representation": _str,
    "system": _str,
    "snapshot_every": _int,
    "max_steps": _int,
}

SCENARIO_KEYS = {
    "scenario": _str,
    "left": parse_state,
    "right": parse_state,
    "x0": float,
    "base": parse_state,
    "amplitude": float,
    "wavelength": float,
    "phase_u": float,
    "phase_v": float,
    "table": _table,
    "x_left": float,
    "x_right": float,
    "mollifier_width": _optional_float,
}

CONFIG_KEYS = {**RUN_KEYS, **SCENARIO_KEYS}


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _read_pairs(text: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";")
    )
    parser.optionxform = str  # keep "m" and "M" apart
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        msg = str(exc)
        line = getattr(exc, "lineno", None)
        if line is not None:
            msg = f"line {line - 1}: {msg}"
        raise ParseError(msg) from None
    if parser.sections() != [_SECTION]:
        raise ParseError("section headers are not allowed")
    return {key: _unquote(val) for key, val in parser.items(_SECTION)}


def _convert(raw: dict) -> dict:
    out = {}
    for key, text in raw.items():
        if key not in CONFIG_KEYS:
            raise ValidationError(key, "unknown configuration key")
        try:
            out[key] = CONFIG_KEYS[key](text)
        except ValueError as exc:
            raise ParseError(f"{key}: cannot parse {text!r} ({exc})") from None
    return out


def build_config(values: dict) -> SimConfig:
    """Build and validate a :class:`SimConfig` from converted key/values."""
    scen = {k: v for k, v in values.items() if k in SCENARIO_KEYS}
    run = {k: v for k, v in values.items() if k in RUN_KEYS}
    name = scen.pop("scenario", "riemann")
    builtin = builtin_scenarios().get(name)
    scenario = dataclasses.replace(builtin, **scen) if builtin else Scenario(id=name, **scen)
    cfg = SimConfig(scenario=scenario, **run)
    return cfg.validate()


def parse_config_text(text: str, overrides: Iterable[str] = ()) -> SimConfig:
    """Parse configuration text; ``overrides`` are extra ``key=value`` strings."""
    raw = _read_pairs(text)
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r} is not of the form key=value")
        key, val = item.split("=", 1)
        raw[key.strip()] = _unquote(val)
    return build_config(_convert(raw))


def parse_config(path, overrides: Iterable[str] = ()) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config_text(text, overrides)


def _jsonable(obj):
    if isinstance(obj, State):
        return [obj.u, obj.v]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, tuple):
        return [_jsonable(x) for x in obj]
    return obj


def config_to_dict(cfg: SimConfig) -> dict:
    """Flat ``key -> value`` echo of a configuration (round-trips through JSON)."""
    out = {}
    for f in dataclasses.fields(cfg):
        if f.name == "scenario":
            continue
        if f.name in RUN_KEYS:
            out[f.name] = _jsonable(getattr(cfg, f.name))
    sc = cfg.scenario
    out["scenario"] = sc.id
    for f in dataclasses.fields(sc):
        if f.name in SCENARIO_KEYS:
            val = getattr(sc, f.name)
            if val is not None and val != ():
                out[f.name] = _jsonable(val)
    out["boundary"] = cfg.grid().boundary
    return out
