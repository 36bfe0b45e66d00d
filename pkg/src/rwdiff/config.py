"""Run configuration files.

A config is an INI file. Every section and key is optional::

    [run]
    command = ergodic

    [model]
    family = exponential        ; or power_exponential
    h_infinity = 1.0
    p = 0

    [integrator]
    step = 1e-3
    sigma = 1.0
    horizon = 2000
    stride = 100                ; record every 100th step

    [initial]
    t = 1.0
    tdot = 1.5
    theta = 1, 0, 0
    x = 0, 0, 0

    [ensemble]
    n_paths = 100
    master_seed = 0
    threads = 1

    [output]
    directory = rwdiff-out
    formats = csv, json

Command-specific sections are ``[simulate]`` (representation),
``[ergodic]`` (burn_in), ``[coupling]`` (mode and the second initial
state t2, tdot2, theta2) and ``[measure]`` (a, b).

A manifest written by a previous run (JSON) is accepted in place of an
INI file and reproduces that run.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
import hashlib
import json
import math

from .dynamics import IntegratorConfig
from .errors import ConfigError, RWDiffError
from .expansion import FAMILIES, ExpansionModel

COMMANDS = ("simulate", "ergodic", "coupling", "measure", "limit")
REPRESENTATIONS = ("temporal", "spherical", "full", "direct")
COUPLING_MODES = ("comparison", "shift", "mirror")
FORMATS = ("csv", "json")

_REAL, _INT, _VEC, _STR, _LIST = "real", "int", "vector", "str", "list"

# section -> key -> (kind, default)
SCHEMA = {
    "run": {"command": (_STR, None)},
    "model": {"family": (_STR, "exponential"), "h_infinity": (_REAL, 1.0), "p": (_REAL, 0.0)},
    "integrator": {
        "step": (_REAL, 1e-3), "sigma": (_REAL, 1.0), "horizon": (_REAL, 2000.0),
        "pn_tolerance": (_REAL, None), "stride": (_INT, 100), "max_dc": (_REAL, 0.01),
    },
    "initial": {"t": (_REAL, 1.0), "tdot": (_REAL, 1.5), "theta": (_VEC, (1.0, 0.0, 0.0)), "x": (_VEC, (0.0, 0.0, 0.0))},
    "ensemble": {"n_paths": (_INT, 100), "master_seed": (_INT, 0), "threads": (_INT, None)},
    "output": {"directory": (_STR, "rwdiff-out"), "formats": (_LIST, ("csv", "json"))},
    "simulate": {"representation": (_STR, "spherical")},
    "ergodic": {"burn_in": (_REAL, 200.0)},
    "coupling": {"mode": (_STR, "shift"), "t2": (_REAL, 2.0), "tdot2": (_REAL, 6.0), "theta2": (_VEC, (0.0, 1.0, 0.0))},
    "measure": {"a": (_REAL, None), "b": (_REAL, None)},
}


@dataclass
class RunConfig:
    command: str | None
    model: ExpansionModel
    integrator: IntegratorConfig
    values: dict = field(default_factory=dict)

    def get(self, section, key):
        return self.values[section][key]

    @property
    def n_paths(self):
        return self.get("ensemble", "n_paths")

    @property
    def master_seed(self):
        return self.get("ensemble", "master_seed")

    @property
    def threads(self):
        return self.get("ensemble", "threads")

    def to_dict(self):
        out = {}
        for section, keys in self.values.items():
            out[section] = {k: list(v) if isinstance(v, tuple) else v for k, v in keys.items()}
        return out

    def digest(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def override(self, section, key, value):
        values = {s: dict(k) for s, k in self.values.items()}
        values[section][key] = value
        return _build(values)


def _convert(kind, raw, where, problems):
    text = str(raw).strip() if not isinstance(raw, (list, tuple)) else raw
    try:
        if kind == _REAL:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == _INT:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind == _VEC:
            parts = text if isinstance(text, (list, tuple)) else [v for v in text.split(",")]
            vec = tuple(float(v) for v in parts)
            if len(vec) != 3:
                raise ValueError
            return vec
        if kind == _LIST:
            parts = text if isinstance(text, (list, tuple)) else text.split(",")
            return tuple(str(v).strip() for v in parts if str(v).strip())
        return str(text)
    except (TypeError, ValueError):
        problems.append(f"{where}: cannot read {raw!r} as {kind}")
        return None


def _read_ini(text):
    parser = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source="<config>")
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside of any [section]") from None
    except configparser.ParsingError as exc:
        lines = ", ".join(str(lineno) for lineno, _ in exc.errors)
        raise ConfigError(f"cannot parse line(s) {lines}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def parse_config(text) -> RunConfig:
    """Parse INI text (or a JSON manifest) into a validated RunConfig."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: invalid JSON manifest ({exc.msg})") from None
        raw = raw.get("config", raw)
        if not isinstance(raw, dict) or not all(isinstance(v, dict) for v in raw.values()):
            raise ConfigError("manifest must map section names to key/value tables")
    else:
        raw = _read_ini(text)
    problems = []
    values = {}
    for section in raw:
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        values[section] = {}
        for key in given:
            if key not in keys:
                problems.append(f"unknown key {section}.{key}")
        for key, (kind, default) in keys.items():
            if key in given and given[key] is not None:
                values[section][key] = _convert(kind, given[key], f"{section}.{key}", problems)
            else:
                values[section][key] = default
    return _build(values, problems)


def _build(values, problems=None) -> RunConfig:
    problems = list(problems or [])

    def need(check, where, message):
        try:
            ok = check()
        except TypeError:
            # a value that failed to convert has already been reported
            return
        if not ok:
            problems.append(f"{where} {message}")

    v = values
    command = v["run"]["command"]
    need(lambda: command is None or command in COMMANDS, "run.command", f"must be one of {COMMANDS}")
    need(lambda: v["model"]["family"] in FAMILIES, "model.family", f"must be one of {FAMILIES}")
    need(lambda: v["model"]["h_infinity"] > 0, "model.h_infinity", "must be positive")
    need(lambda: v["model"]["p"] >= 0, "model.p", "must be nonnegative")
    if v["model"]["family"] == "exponential":
        need(lambda: v["model"]["p"] == 0, "model.p", "must be 0 for the exponential family")
    integ = v["integrator"]
    need(lambda: integ["step"] > 0, "integrator.step", "must be positive")
    need(lambda: integ["sigma"] >= 0, "integrator.sigma", "must be nonnegative")
    need(lambda: integ["horizon"] > 0, "integrator.horizon", "must be positive")
    need(lambda: integ["step"] < integ["horizon"], "integrator.step", "must be smaller than integrator.horizon")
    need(lambda: integ["pn_tolerance"] is None or integ["pn_tolerance"] > 0, "integrator.pn_tolerance", "must be positive")
    need(lambda: integ["stride"] >= 1, "integrator.stride", "must be a positive integer")
    need(lambda: integ["max_dc"] > 0, "integrator.max_dc", "must be positive")
    init = v["initial"]
    need(lambda: init["t"] > 0, "initial.t", "must be positive")
    need(lambda: init["tdot"] >= 1, "initial.tdot", "must be >= 1")
    need(lambda: any(init["theta"]), "initial.theta", "must be a nonzero vector")
    ens = v["ensemble"]
    need(lambda: ens["n_paths"] >= 1, "ensemble.n_paths", "must be positive")
    need(lambda: 0 <= ens["master_seed"] < 2**64, "ensemble.master_seed", "must be a 64-bit unsigned integer")
    need(lambda: ens["threads"] is None or ens["threads"] >= 1, "ensemble.threads", "must be positive")
    fmts = v["output"]["formats"]
    need(lambda: fmts and all(f in FORMATS for f in fmts), "output.formats", f"must be a subset of {FORMATS}")
    need(lambda: bool(v["output"]["directory"]), "output.directory", "must not be empty")
    need(lambda: v["simulate"]["representation"] in REPRESENTATIONS, "simulate.representation",
         f"must be one of {REPRESENTATIONS}")
    need(lambda: v["ergodic"]["burn_in"] >= 0, "ergodic.burn_in", "must be nonnegative")
    if command == "ergodic":
        need(lambda: v["ergodic"]["burn_in"] < integ["horizon"], "ergodic.burn_in", "must be shorter than integrator.horizon")
    cp = v["coupling"]
    need(lambda: cp["mode"] in COUPLING_MODES, "coupling.mode", f"must be one of {COUPLING_MODES}")
    need(lambda: cp["t2"] > 0, "coupling.t2", "must be positive")
    need(lambda: cp["tdot2"] >= 1, "coupling.tdot2", "must be >= 1")
    need(lambda: any(cp["theta2"]), "coupling.theta2", "must be a nonzero vector")
    for key in ("a", "b"):
        val = v["measure"][key]
        need(lambda: val is None or val > 0, f"measure.{key}", "must be positive")
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems), problems)
    try:
        model = ExpansionModel.from_dict(v["model"])
        integrator = IntegratorConfig(step=integ["step"], sigma=integ["sigma"], horizon=integ["horizon"],
                                      pn_tolerance=integ["pn_tolerance"], stride=integ["stride"],
                                      max_dc=integ["max_dc"])
    except RWDiffError as exc:
        raise ConfigError(f"invalid config: {exc}", [str(exc)]) from None
    return RunConfig(command, model, integrator, values)
