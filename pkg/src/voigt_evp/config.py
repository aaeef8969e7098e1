"""Run configuration: a JSON document with fixed sections.

Every section and key is optional; missing entries take their defaults and
unknown ones are rejected.  Validation errors name the dotted key path.

Example::

    {"grid": {"N": 32, "pad_factor": 2},
     "params": {"preset": "nondimensional", "alpha": 0.1},
     "forcing": {"mode": "periodic", "T_period": 1.0},
     "strain": {"variant": "simplified", "eps": 0.1, "gamma": 0.0},
     "init": {"preset": "smooth", "amp": 0.1},
     "time": {"dt": "auto", "T_final": 1.0, "diag_cadence": 0.1},
     "output": {"directory": "out", "formats": ["csv", "snapshot"]}}
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional, Union

from .errors import ConfigError, InvalidArgument
from .model import (
    FORCING_MODES,
    STRAIN_VARIANTS,
    PhysicalParams,
    nondimensional_params,
    table_params,
)
from .spectral import make_grid

PARAM_PRESETS = ("table", "nondimensional")
INIT_PRESETS = ("rest", "smooth", "random", "snapshot")
OUTPUT_FORMATS = ("csv", "snapshot")


@dataclass(frozen=True)
class GridConfig:
    N: int = 32
    pad_factor: float = 2.0


@dataclass(frozen=True)
class ParamsConfig:
    """Physical constants.  ``preset`` supplies the base values; explicit
    keys override them.  ``eps`` and ``gamma`` live in the strain section."""

    preset: str = "table"
    E_mod: Optional[float] = None
    alpha: Optional[float] = None
    P: Optional[float] = None
    e_bar: Optional[float] = None
    Omega: Optional[float] = None
    g: Optional[float] = None
    theta: Optional[float] = None
    phi: Optional[float] = None
    c_a: Optional[float] = None
    c_w: Optional[float] = None
    rho_a: Optional[float] = None
    rho_w: Optional[float] = None
    m: Optional[float] = None


@dataclass(frozen=True)
class ForcingConfig:
    mode: str = "periodic"
    T_period: float = 1.0


@dataclass(frozen=True)
class StrainConfig:
    variant: str = "simplified"
    eps: Optional[float] = None
    gamma: float = 0.0


@dataclass(frozen=True)
class InitConfig:
    preset: str = "smooth"
    snapshot: Optional[str] = None
    amp: float = 0.1
    seed: int = 0
    perturbation_amp: float = 0.0


@dataclass(frozen=True)
class TimeConfig:
    dt: Union[str, float] = "auto"
    safety: float = 0.25
    T_final: float = 1.0
    diag_cadence: Optional[float] = None
    snapshot_cadence: Optional[float] = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv",)


@dataclass(frozen=True)
class SweepConfig:
    """Inputs of the experiment drivers."""

    eps_list: tuple = (0.1, 0.05, 0.025, 0.0125, 0.0)
    N_list: tuple = (16, 32, 64)
    delta: float = 1e-4
    gronwall_C: float = 1.0
    direction: str = "mode"
    record_cadence: Optional[float] = None


@dataclass(frozen=True)
class Lab1DConfig:
    """Background and run settings of the 1D instability experiment."""

    ubar_x: float = 1.0
    sigbar: float = 1.0
    P: float = 1.0
    eps: float = 1e-3
    alpha: float = 0.0
    k_list: tuple = (2, 4, 8, 16)
    T: float = 1.0
    dt: float = 1e-3
    seed_amp: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    params: ParamsConfig = field(default_factory=ParamsConfig)
    forcing: ForcingConfig = field(default_factory=ForcingConfig)
    strain: StrainConfig = field(default_factory=StrainConfig)
    init: InitConfig = field(default_factory=InitConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    lab1d: Lab1DConfig = field(default_factory=Lab1DConfig)

    def physical_params(self) -> PhysicalParams:
        """Validated constants with the preset, overrides and strain floor applied."""
        p = self.params
        overrides = {f.name: getattr(p, f.name) for f in fields(p)
                     if f.name != "preset" and getattr(p, f.name) is not None}
        if self.strain.eps is not None:
            overrides["eps"] = self.strain.eps
        overrides["gamma"] = self.strain.gamma
        base = nondimensional_params if p.preset == "nondimensional" else table_params
        return base(**overrides)

    def to_dict(self) -> dict:
        d = asdict(self)
        for section in d.values():
            for k, v in section.items():
                if isinstance(v, tuple):
                    section[k] = list(v)
        return d


_SECTIONS = {f.name: f.type for f in fields(RunConfig)}
_SECTION_TYPES = {
    "grid": GridConfig, "params": ParamsConfig, "forcing": ForcingConfig,
    "strain": StrainConfig, "init": InitConfig, "time": TimeConfig,
    "output": OutputConfig, "sweep": SweepConfig, "lab1d": Lab1DConfig,
}


def _fail(key: str, msg: str):
    raise ConfigError(f"{key}: {msg}")


def _number(key, v, *, integer=False, optional=False):
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            _fail(key, f"expected an integer, got {v!r}")
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        _fail(key, f"must be finite, got {v!r}")
    return v


def _string(key, v, choices=None, optional=False):
    if v is None and optional:
        return None
    if not isinstance(v, str):
        _fail(key, f"expected a string, got {v!r}")
    if choices is not None and v not in choices:
        _fail(key, f"must be one of {', '.join(choices)}; got {v!r}")
    return v


def _number_list(key, v, integer=False):
    if not isinstance(v, (list, tuple)) or not v:
        _fail(key, f"expected a non-empty list, got {v!r}")
    return tuple(_number(f"{key}[{i}]", x, integer=integer) for i, x in enumerate(v))


def _positive(key, v):
    if v is not None and not v > 0:
        _fail(key, f"must be > 0, got {v}")
    return v


def _coerce_section(name: str, raw) -> object:
    cls = _SECTION_TYPES[name]
    if not isinstance(raw, dict):
        _fail(name, f"expected an object, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    for k in raw:
        if k not in known:
            _fail(f"{name}.{k}", f"unknown key (allowed: {', '.join(sorted(known))})")
    defaults = cls()
    vals = {k: raw.get(k, getattr(defaults, k)) for k in known}
    key = lambda k: f"{name}.{k}"  # noqa: E731

    if name == "grid":
        vals["N"] = _number(key("N"), vals["N"], integer=True)
        vals["pad_factor"] = _number(key("pad_factor"), vals["pad_factor"])
    elif name == "params":
        vals["preset"] = _string(key("preset"), vals["preset"], PARAM_PRESETS)
        for k in known - {"preset"}:
            vals[k] = _number(key(k), vals[k], optional=True)
    elif name == "forcing":
        vals["mode"] = _string(key("mode"), vals["mode"], FORCING_MODES)
        vals["T_period"] = _positive(key("T_period"), _number(key("T_period"), vals["T_period"]))
    elif name == "strain":
        vals["variant"] = _string(key("variant"), vals["variant"], tuple(STRAIN_VARIANTS))
        vals["eps"] = _number(key("eps"), vals["eps"], optional=True)
        vals["gamma"] = _number(key("gamma"), vals["gamma"])
    elif name == "init":
        vals["preset"] = _string(key("preset"), vals["preset"], INIT_PRESETS)
        vals["snapshot"] = _string(key("snapshot"), vals["snapshot"], optional=True)
        vals["amp"] = _number(key("amp"), vals["amp"])
        vals["seed"] = _number(key("seed"), vals["seed"], integer=True)
        vals["perturbation_amp"] = _number(key("perturbation_amp"), vals["perturbation_amp"])
        if vals["seed"] < 0:
            _fail(key("seed"), "must be >= 0")
        if vals["preset"] == "snapshot" and not vals["snapshot"]:
            _fail(key("snapshot"), "required when init.preset is 'snapshot'")
    elif name == "time":
        dt = vals["dt"]
        vals["dt"] = "auto" if dt == "auto" else _positive(key("dt"), _number(key("dt"), dt))
        vals["safety"] = _number(key("safety"), vals["safety"])
        if not 0 < vals["safety"] <= 1:
            _fail(key("safety"), f"must lie in (0, 1], got {vals['safety']}")
        vals["T_final"] = _positive(key("T_final"), _number(key("T_final"), vals["T_final"]))
        for k in ("diag_cadence", "snapshot_cadence"):
            vals[k] = _positive(key(k), _number(key(k), vals[k], optional=True))
    elif name == "output":
        vals["directory"] = _string(key("directory"), vals["directory"])
        fm = vals["formats"]
        if not isinstance(fm, (list, tuple)):
            _fail(key("formats"), f"expected a list, got {fm!r}")
        vals["formats"] = tuple(_string(f"{key('formats')}[{i}]", f, OUTPUT_FORMATS)
                                for i, f in enumerate(fm))
    elif name == "sweep":
        vals["eps_list"] = _number_list(key("eps_list"), vals["eps_list"])
        if any(e < 0 for e in vals["eps_list"]):
            _fail(key("eps_list"), "entries must be >= 0")
        vals["N_list"] = _number_list(key("N_list"), vals["N_list"], integer=True)
        vals["delta"] = _number(key("delta"), vals["delta"])
        if vals["delta"] < 0:
            _fail(key("delta"), "must be >= 0")
        vals["gronwall_C"] = _positive(key("gronwall_C"), _number(key("gronwall_C"), vals["gronwall_C"]))
        vals["direction"] = _string(key("direction"), vals["direction"], ("mode", "random"))
        vals["record_cadence"] = _positive(
            key("record_cadence"), _number(key("record_cadence"), vals["record_cadence"], optional=True))
    elif name == "lab1d":
        for k in ("ubar_x", "sigbar", "P", "eps", "alpha", "T", "dt", "seed_amp"):
            vals[k] = _number(key(k), vals[k])
        vals["k_list"] = _number_list(key("k_list"), vals["k_list"], integer=True)
        for k in ("P", "T", "dt"):
            _positive(key(k), vals[k])
        for k in ("eps", "alpha", "seed_amp"):
            if vals[k] < 0:
                _fail(key(k), "must be >= 0")
    return cls(**vals)


def _validate(cfg: RunConfig) -> RunConfig:
    try:
        make_grid(cfg.grid.N, cfg.grid.pad_factor)
    except InvalidArgument as exc:
        _fail("grid", str(exc))
    try:
        params = cfg.physical_params()
    except InvalidArgument as exc:
        msg = str(exc)
        name = msg.split(" ", 1)[0]
        section = "strain" if name in ("eps", "gamma") else "params"
        _fail(f"{section}.{name}" if name.isidentifier() else section, msg)
    if not params.alpha > 0:
        _fail("params.alpha", "must be > 0 for the Voigt-EVP model")
    if params.e_bar <= 1:
        _fail("params.e_bar", "must be > 1")
    return cfg


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"top level: expected an object, got {type(data).__name__}")
    for k in data:
        if k not in _SECTIONS:
            _fail(k, f"unknown section (allowed: {', '.join(_SECTIONS)})")
    sections = {name: _coerce_section(name, data.get(name, {})) for name in _SECTIONS}
    return _validate(RunConfig(**sections))


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides: Iterable[str]) -> dict:
    """Apply ``KEY=VALUE`` assignments with dotted keys, e.g. ``grid.N=16``.

    Values are read as JSON when possible and as plain strings otherwise.
    """
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected KEY=VALUE")
        path, value = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"override {item!r}: key must look like section.key")
        section, key = parts
        if section not in _SECTIONS:
            _fail(section, "unknown section")
        sub = data.setdefault(section, {})
        if not isinstance(sub, dict):
            _fail(section, "expected an object")
        sub[key] = _parse_value(value.strip())
    return data


def parse_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Parse and validate a JSON config; an empty string means all defaults."""
    if text is None or not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_dict(apply_overrides(data, overrides))


def load_config(path: Optional[str], overrides: Iterable[str] = ()) -> RunConfig:
    if path is None:
        return parse_config("", overrides)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
