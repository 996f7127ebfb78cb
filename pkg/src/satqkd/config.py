"""YAML scenario configuration: loading, validation and the resolved-config echo.

Keys mirror the dataclass field names of each module and use SI units
(metres, seconds, radians).  Missing keys take the module defaults; unknown
keys are rejected.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .atmosphere import AtmosphereModel, BackgroundModel
from .bb84 import Bb84Config
from .beamoptics import ReceiverConfig, TransmitterConfig
from .channel import LinkModels
from .e91 import E91Config
from .errors import ConfigError, require
from .orbitpass import OrbitConfig
from .turbulence import TurbulenceProfile

SCENARIOS = ("budget", "bb84", "e91", "sweep")
MODEL_SECTIONS = {
    "orbit": OrbitConfig,
    "transmitter": TransmitterConfig,
    "receiver": ReceiverConfig,
    "atmosphere": AtmosphereModel,
    "background": BackgroundModel,
    "turbulence": TurbulenceProfile,
}


@dataclass(frozen=True)
class ProtocolConfig:
    bb84: Bb84Config = field(default_factory=Bb84Config)
    e91: E91Config = field(default_factory=E91Config)
    sweep_altitudes: tuple[float, ...] = (400e3, 500e3, 600e3, 750e3)

    def __post_init__(self):
        require(len(self.sweep_altitudes) > 0, "sweep_altitudes", "must not be empty")
        require(all(a > 0 for a in self.sweep_altitudes), "sweep_altitudes", "altitudes must be > 0")


@dataclass(frozen=True)
class ScenarioConfig:
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    transmitter: TransmitterConfig = field(default_factory=TransmitterConfig)
    receiver: ReceiverConfig = field(default_factory=ReceiverConfig)
    atmosphere: AtmosphereModel = field(default_factory=AtmosphereModel)
    background: BackgroundModel = field(default_factory=BackgroundModel)
    turbulence: TurbulenceProfile = field(default_factory=TurbulenceProfile)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    seed: int = 0
    output_dir: str = "out"
    scenario: str = "budget"

    def __post_init__(self):
        require(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed",
                "must be an unsigned 64-bit integer")
        require(self.scenario in SCENARIOS, "scenario", f"must be one of {SCENARIOS}")

    def models(self) -> LinkModels:
        return LinkModels(**{name: getattr(self, name) for name in MODEL_SECTIONS})


def _coerce(value: Any, default: Any, name: str) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, float) or (default is None and isinstance(value, (int, float))):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(name, f"expected a list, got {value!r}")
        return tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in value)
    return value


def _build(cls, data: Any, section: str):
    """Instantiate ``cls`` from a mapping; errors name the dotted field path."""
    def path(name: str) -> str:
        return f"{section}.{name}" if section else name

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(section or "<root>", f"expected a mapping, got {type(data).__name__}")
    fields = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(map(str, set(data) - fields))
    if unknown:
        raise ConfigError(section or "<root>", f"unknown key(s): {', '.join(unknown)}")
    defaults = cls()
    kwargs = {}
    for name, value in data.items():
        default = getattr(defaults, name)
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, path(name))
        else:
            kwargs[name] = _coerce(value, default, path(name))
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if not section:
            raise
        raise exc.prefixed(section) from None


def from_dict(data: dict | None) -> ScenarioConfig:
    return _build(ScenarioConfig, data, "")


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a YAML scenario file; an empty file gives all defaults."""
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(str(path), f"parse error at {where}: {problem}") from None
    return from_dict(data)


def to_dict(cfg: Any) -> Any:
    """Plain-data view of a config tree, suitable for YAML."""
    if dataclasses.is_dataclass(cfg):
        return {f.name: to_dict(getattr(cfg, f.name)) for f in dataclasses.fields(cfg) if f.init}
    if isinstance(cfg, tuple):
        return [to_dict(v) for v in cfg]
    return cfg


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=False)

