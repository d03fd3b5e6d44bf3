"""Scenario configuration: defaults, TOML files and dotted-name overrides."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .abc import AbcParams
from .energy import RadioParams, WorkloadParams
from .mobility import MobilityParams
from .protocol import WEIGHT_TOL, FitnessMode, FitnessWeights
from .world import RegionKind

PROTOCOLS = ("beecup", "leach", "sep")


class ConfigError(ValueError):
    """Any invalid configuration value."""


class WeightSumError(ConfigError):
    pass


class PeriodError(ConfigError):
    pass


class ProtocolError(ConfigError):
    pass


@dataclass(frozen=True)
class WeightConfig:
    ch_number: tuple[float, ...] = (0.5, 0.5)
    ch_select: tuple[float, ...] = (0.3, 0.3, 0.2, 0.2)


@dataclass(frozen=True)
class AbcConfig:
    sn: int = 30
    mcn: int = 1000  # head selection
    chnum_mcn: int = 5000  # head-count search; bit flips are rare so it needs more cycles
    limit: typing.Optional[int] = None


@dataclass(frozen=True)
class LeachConfig:
    p: float = 0.1


@dataclass(frozen=True)
class SepConfig:
    p: float = 0.1
    m: float = 0.2
    alpha: float = 2.0


@dataclass(frozen=True)
class ScenarioConfig:
    region: str = "rect80"
    node_count: int = 120
    protocol: str = "beecup"
    initial_energy: float = 10_000.0
    heterogeneous: bool = False  # advanced nodes per sep.m / sep.alpha; implied by protocol "sep"
    sim_duration: float = 7200.0
    recluster_interval: float = 600.0
    tiny_period: float = 60.0
    stop_at_first_death: bool = False
    replicates: int = 20
    seed: int = 0
    validate: bool = False

    fitness_mode: str = "corrected"
    ewma_alpha: float = 0.5
    r_n: float = 15.0
    s_max: int = 7
    r_b: float = 10.0

    mobile_fraction: float = 0.3
    chnum_mobile_fraction: float = 1.0
    speed_min: float = 0.5
    speed_max: float = 1.0
    pause_min: float = 30.0
    pause_max: float = 600.0

    p_wlan_active: float = 1.100
    p_wlan_idle: float = 0.880
    p_bt_active: float = 0.220
    p_bt_idle: float = 0.120
    rate_wlan: float = 54e6
    rate_bt: float = 2e6
    r_wlan: float = 100.0

    file_mb_min: float = 30.0
    file_mb_max: float = 60.0
    realtime_s_min: float = 50.0
    realtime_s_max: float = 100.0
    uplink_mirror: bool = False

    weights: WeightConfig = field(default_factory=WeightConfig)
    abc: AbcConfig = field(default_factory=AbcConfig)
    leach: LeachConfig = field(default_factory=LeachConfig)
    sep: SepConfig = field(default_factory=SepConfig)

    def __post_init__(self):
        validate(self)

    @property
    def rounds(self) -> int:
        return round(self.sim_duration / self.recluster_interval)

    @property
    def periods_per_round(self) -> int:
        return round(self.recluster_interval / self.tiny_period)

    @property
    def is_heterogeneous(self) -> bool:
        return self.heterogeneous or self.protocol == "sep"

    @property
    def fitness(self) -> FitnessWeights:
        return FitnessWeights(self.weights.ch_number, self.weights.ch_select, FitnessMode(self.fitness_mode))

    @property
    def radio(self) -> RadioParams:
        return RadioParams(self.p_wlan_active, self.p_wlan_idle, self.p_bt_active, self.p_bt_idle,
                           self.rate_wlan, self.rate_bt, self.r_wlan, self.r_b)

    @property
    def workload(self) -> WorkloadParams:
        return WorkloadParams(self.file_mb_min, self.file_mb_max, self.realtime_s_min,
                              self.realtime_s_max, self.uplink_mirror)

    @property
    def mobility(self) -> MobilityParams:
        return MobilityParams(self.speed_min, self.speed_max, self.pause_min, self.pause_max,
                              self.mobile_fraction)

    def abc_params(self, seed: int = 0, chnum: bool = False) -> AbcParams:
        mcn = self.abc.chnum_mcn if chnum else self.abc.mcn
        return AbcParams(self.abc.sn, mcn, self.abc.limit, seed)

    def with_(self, **flat) -> "ScenarioConfig":
        """Copy with dotted-name overrides, e.g. ``cfg.with_(**{"sep.alpha": 3})``."""
        return build(flat, base=self)


def _divides(small: float, big: float) -> bool:
    ratio = big / small
    return ratio >= 1 - 1e-9 and abs(ratio - round(ratio)) < 1e-9


def validate(cfg: ScenarioConfig) -> None:
    if cfg.protocol not in PROTOCOLS:
        raise ProtocolError(f"unknown protocol {cfg.protocol!r}; choose one of {', '.join(PROTOCOLS)}")
    for name, ws, size in (("weights.ch_number", cfg.weights.ch_number, 2),
                           ("weights.ch_select", cfg.weights.ch_select, 4)):
        if len(ws) != size:
            raise ConfigError(f"{name} needs {size} values, got {len(ws)}")
        if any(w < 0 for w in ws):
            raise ConfigError(f"{name} must be non-negative")
        if abs(sum(ws) - 1.0) > WEIGHT_TOL:
            raise WeightSumError(
                f"{name} must sum to 1 within {WEIGHT_TOL:g} (got {sum(ws):.12g})")
    if min(cfg.tiny_period, cfg.recluster_interval, cfg.sim_duration) <= 0:
        raise PeriodError("periods must be positive")
    if not _divides(cfg.tiny_period, cfg.recluster_interval):
        raise PeriodError(f"tiny_period {cfg.tiny_period:g} s does not divide "
                          f"recluster_interval {cfg.recluster_interval:g} s")
    if not _divides(cfg.recluster_interval, cfg.sim_duration):
        raise PeriodError(f"recluster_interval {cfg.recluster_interval:g} s does not divide "
                          f"sim_duration {cfg.sim_duration:g} s")
    try:
        RegionKind(cfg.region)
        FitnessMode(cfg.fitness_mode)
        cfg.radio, cfg.mobility, cfg.abc_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.node_count < 1:
        raise ConfigError("node_count must be positive")
    if cfg.replicates < 1:
        raise ConfigError("replicates must be positive")
    if not 0 <= cfg.ewma_alpha <= 1:
        raise ConfigError("ewma_alpha must lie in [0, 1]")
    if not 0 < cfg.leach.p < 1 or not 0 < cfg.sep.p < 1:
        raise ConfigError("election probability must lie in (0, 1)")
    if not 0 <= cfg.sep.m <= 1 or cfg.sep.alpha < 0:
        raise ConfigError("sep.m must lie in [0, 1] and sep.alpha be non-negative")


def _coerce(value: Any, tp, key: str):
    origin = typing.get_origin(tp)
    if origin is typing.Union:  # Optional[int]
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            return None
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
        origin = typing.get_origin(tp)
    try:
        if origin is tuple:
            if isinstance(value, str):
                value = [v for v in value.replace(" ", "").split(",") if v]
            return tuple(float(v) for v in value)
        if tp is bool:
            if isinstance(value, str):
                low = value.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(value)
                return low in ("true", "1", "yes")
            return bool(value)
        if tp is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if tp is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def _flatten(data: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def known_keys() -> dict[str, Any]:
    """Every dotted config key mapped to its type."""
    hints = typing.get_type_hints(ScenarioConfig)
    out = {}
    for f in fields(ScenarioConfig):
        tp = hints[f.name]
        if dataclasses.is_dataclass(tp):
            sub = typing.get_type_hints(tp)
            for g in fields(tp):
                out[f"{f.name}.{g.name}"] = sub[g.name]
        else:
            out[f.name] = tp
    return out


def build(flat: Mapping[str, Any], base: ScenarioConfig | None = None) -> ScenarioConfig:
    keys = known_keys()
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {}
    for key, raw in flat.items():
        key = key.replace("-", "_")
        if key not in keys:
            raise ConfigError(f"unknown config key {key!r}")
        value = _coerce(raw, keys[key], key)
        if "." in key:
            sect, name = key.split(".", 1)
            nested.setdefault(sect, {})[name] = value
        else:
            top[key] = value
    base = base or ScenarioConfig()
    defaults = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    for sect, vals in nested.items():
        top[sect] = replace(defaults[sect], **vals)
    try:
        return ScenarioConfig(**{**defaults, **top})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Defaults, then the TOML file at ``path``, then ``overrides`` (dotted keys)."""
    flat: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                flat.update(_flatten(tomllib.load(fh)))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    flat.update(overrides or {})
    return build(flat)
