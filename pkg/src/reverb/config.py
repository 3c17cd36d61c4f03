"""Run configuration: one structured file drives every experiment.

The loader is strict: unknown keys are rejected so a typo cannot silently run
a different experiment than intended.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .channel import ChannelParams
from .control import ControlConfig
from .errors import ConfigError
from .sensing import FleetConfig

SCHEMES = ("AoL-REVERB", "Perfect", "CB-Greedy", "EB-Greedy", "Traditional")


@dataclass
class RunConfig:
    scheme: str = "AoL-REVERB"
    episodes: int = 200
    seed: int = 1
    cap: int = 10                                  # max simultaneous uplinks per interval
    qi_cap: int = 999
    aol_thresholds: tuple[int, int] = (5, 5)
    required_var: tuple[float, float] = (0.01, 0.002)
    traditional_sensors: int = 2                   # 1 or 2 fixed sensors for the baseline
    scripted_accuracy: tuple[float, float] = (4000.0, 10000.0)
    process_noise_var: tuple[float, float] = (1e-6, 1e-6)
    init_belief_var: float = 1e-4
    train_episodes: int = 500
    out_dir: str = "out"
    carrier_frequency_hz: float = 2.4e9            # recorded for provenance; not used numerically
    channel: ChannelParams = field(default_factory=ChannelParams)
    fleet: FleetConfig = field(default_factory=FleetConfig)
    control: ControlConfig = field(default_factory=ControlConfig)

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.episodes < 1 or self.train_episodes < 0 or self.qi_cap < 1:
            raise ConfigError("episode and interval counts must be positive")
        if self.cap < 1:
            raise ConfigError("connection cap must be at least 1")
        if self.traditional_sensors not in (1, 2):
            raise ConfigError("traditional_sensors must be 1 or 2")
        if any(t < 1 for t in self.aol_thresholds):
            raise ConfigError("age thresholds must be at least 1")
        if any(v <= 0 for v in self.required_var):
            raise ConfigError("required variances must be strictly positive")
        if any(a < 0 for a in self.scripted_accuracy):
            raise ConfigError("scripted accuracy requests must be nonnegative")


_TUPLE_FIELDS = {
    "aol_thresholds": int,
    "required_var": float,
    "scripted_accuracy": float,
    "process_noise_var": float,
    "hidden": int,
    "input_scale": float,
}


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or cls.__name__}: expected a mapping")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {path + key!r}")
        if dataclasses.is_dataclass(_DATACLASS_FIELDS.get(key, None)):
            kwargs[key] = _build(_DATACLASS_FIELDS[key], value, path + key + ".")
        elif key == "noise_var_ranges":
            kwargs[key] = tuple((float(lo), float(hi)) for lo, hi in value)
        elif key in _TUPLE_FIELDS:
            cast = _TUPLE_FIELDS[key]
            kwargs[key] = tuple(cast(v) for v in value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from exc


_DATACLASS_FIELDS = {
    "channel": ChannelParams,
    "fleet": FleetConfig,
    "control": ControlConfig,
}


def config_from_dict(data: dict) -> RunConfig:
    return _build(RunConfig, data or {}, "")


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    def unpack(obj):
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            out = {}
            for f in fields(obj):
                if not f.init:
                    continue
                out[f.name] = unpack(getattr(obj, f.name))
            return out
        if isinstance(obj, tuple):
            return [unpack(v) for v in obj]
        return obj

    return unpack(cfg)
