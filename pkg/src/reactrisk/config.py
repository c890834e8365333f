"""Single-document JSON configuration: model, grid, normalization, thresholds, scenario, io."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .advisory import ThresholdConfig
from .core import LaneGeometry, ModelParams
from .errors import ConfigurationError, InputError
from .riskmap import GridConfig, NormalizationConfig, SectorConvention, calibrate_reference_energy
from .scenarios import DEFAULTS, COMMON_KEYS, DriverModelConfig, ScenarioKind
from .traceio import DEFAULT_MASSES

SECTIONS = ("model", "grid", "normalization", "thresholds", "scenario", "io")


@dataclass
class IOConfig:
    frame_rate: float = 25.0
    lane_tolerance: float = 1.75
    vehicle_length: float = 4.5
    mass_defaults: dict = field(default_factory=lambda: dict(DEFAULT_MASSES))
    lane: LaneGeometry = field(default_factory=LaneGeometry.disabled)


@dataclass
class EngineConfig:
    model: ModelParams = field(default_factory=ModelParams)
    grid: GridConfig = field(default_factory=GridConfig)
    sector_convention: SectorConvention = SectorConvention.EDGE
    reference_energy: float | None = None
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    scenario_overrides: dict = field(default_factory=dict)
    driver: DriverModelConfig = field(default_factory=DriverModelConfig)
    io: IOConfig = field(default_factory=IOConfig)

    def normalization(self) -> NormalizationConfig:
        """Configured reference energy, or one calibrated on the canonical scene."""
        if self.reference_energy is None:
            self.reference_energy = calibrate_reference_energy(self.model, self.grid)
        return NormalizationConfig(self.reference_energy)


def _build(cls, data: dict, section: str, extra: tuple = ()):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{section}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names - set(extra)
    if unknown:
        raise ConfigurationError(f"{section}: unknown keys {sorted(unknown)}")
    try:
        return cls(**{k: v for k, v in data.items() if k in names})
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{section}: {exc}") from None


def config_from_dict(doc: dict) -> EngineConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config: top level must be an object")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"config: unknown sections {sorted(unknown)}")
    cfg = EngineConfig()
    if "model" in doc:
        cfg.model = _build(ModelParams, doc["model"], "model")
    if "grid" in doc:
        g = dict(doc["grid"])
        conv = g.pop("sector_convention", SectorConvention.EDGE.value)
        cfg.grid = _build(GridConfig, g, "grid")
        try:
            cfg.sector_convention = SectorConvention(conv)
        except ValueError:
            raise ConfigurationError(f"grid: unknown sector_convention {conv!r}") from None
    if "normalization" in doc:
        n = doc["normalization"]
        unknown = set(n) - {"reference_energy", "mode"}
        if unknown:
            raise ConfigurationError(f"normalization: unknown keys {sorted(unknown)}")
        if n.get("mode", "MeanOverRoi") != "MeanOverRoi":
            raise ConfigurationError(f"normalization: unsupported mode {n['mode']!r}")
        ref = n.get("reference_energy")
        if ref is not None:
            cfg.reference_energy = NormalizationConfig(float(ref)).reference_energy
    if "thresholds" in doc:
        cfg.thresholds = _build(ThresholdConfig, doc["thresholds"], "thresholds")
    if "scenario" in doc:
        s = doc["scenario"]
        unknown = set(s) - {"overrides", "driver"}
        if unknown:
            raise ConfigurationError(f"scenario: unknown keys {sorted(unknown)}")
        overrides = {}
        for kind_name, values in s.get("overrides", {}).items():
            kind = ScenarioKind.parse(kind_name)
            bad = set(values) - set(DEFAULTS[kind]) - COMMON_KEYS
            if bad:
                raise ConfigurationError(f"scenario.overrides.{kind.name}: unknown keys {sorted(bad)}")
            overrides[kind] = dict(values)
        cfg.scenario_overrides = overrides
        if "driver" in s:
            cfg.driver = _build(DriverModelConfig, s["driver"], "scenario.driver")
    if "io" in doc:
        io = dict(doc["io"])
        lane = io.pop("lane", None)
        cfg.io = _build(IOConfig, io, "io")
        if lane is not None:
            cfg.io.lane = _build(LaneGeometry, lane, "io.lane")
    return cfg


def load_config(path) -> EngineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(doc)


def config_to_dict(cfg: EngineConfig) -> dict:
    grid = dataclasses.asdict(cfg.grid)
    grid["sector_convention"] = cfg.sector_convention.value
    lane = dataclasses.asdict(cfg.io.lane)
    lane["left_type"] = cfg.io.lane.left_type.value
    lane["right_type"] = cfg.io.lane.right_type.value
    io = dataclasses.asdict(cfg.io)
    io["lane"] = lane
    return {
        "model": dataclasses.asdict(cfg.model),
        "grid": grid,
        "normalization": {"reference_energy": cfg.reference_energy, "mode": "MeanOverRoi"},
        "thresholds": dataclasses.asdict(cfg.thresholds),
        "scenario": {"overrides": {k.name: v for k, v in cfg.scenario_overrides.items()},
                     "driver": dataclasses.asdict(cfg.driver)},
        "io": io,
    }
