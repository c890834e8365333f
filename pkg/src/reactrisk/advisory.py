"""Adaptive thresholds, three-level warning classification, and per-frame assessment."""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .core import NO_LANE, AgentClass, AgentState, LaneGeometry, ModelParams, DEFAULT_PARAMS
from .errors import ConfigurationError
from .riskmap import (DIRECTIONS, Direction, Grid, GridConfig, NormalizationConfig,
                      RiskMapResult, SectorConvention, evaluate_risk_map, sector_index)

MPS_TO_KMH = 3.6


class Level(IntEnum):
    SAFE = 0
    WARNING = 1
    EMERGENCY = 2


@dataclass(frozen=True)
class EgoControlState:
    brake_state: float = 0.0
    # km/h; None means "derive from the dominant threat" inside assess_frame
    threat_speed_delta: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.brake_state <= 1.0:
            raise ValueError(f"brake_state must lie in [0, 1], got {self.brake_state}")


@dataclass(frozen=True)
class ThresholdConfig:
    t1_base: float = 0.3
    t2_base: float = 0.7
    delta_v_scale: float = 30.0
    brake_full: float = 0.99

    def __post_init__(self):
        if not 0 < self.t1_base < self.t2_base <= 1:
            raise ConfigurationError("thresholds must satisfy 0 < t1_base < t2_base <= 1")
        if not self.delta_v_scale > 0:
            raise ConfigurationError("delta_v_scale must be > 0")
        if not 0 < self.brake_full <= 1:
            raise ConfigurationError("brake_full must lie in (0, 1]")


@dataclass(frozen=True)
class Advisory:
    level: Level
    t1_adj: float
    t2_adj: float
    dominant: Direction
    command: str
    threat_class: AgentClass | None = None
    threat_speed_delta: float = 0.0


@dataclass(eq=False)
class FrameAssessment:
    risk_map: RiskMapResult
    advisory: Advisory
    latency: float
    t: float = 0.0
    grid: Grid | None = None

    def to_record(self) -> dict:
        return {
            "t": self.t,
            "global_risk": self.risk_map.global_risk,
            "level": int(self.advisory.level),
            "dominant": self.advisory.dominant.value,
            "sector_risks": self.risk_map.sector_list(),
            "command": self.advisory.command,
            "latency_ms": self.latency * 1e3,
        }


def adjust_thresholds(cfg: ThresholdConfig, ctrl: EgoControlState) -> tuple[float, float]:
    dv = ctrl.threat_speed_delta or 0.0
    t1 = max(cfg.t1_base * (1 + dv / cfg.delta_v_scale), 0.0)
    t2 = cfg.t2_base * (1 - ctrl.brake_state)
    return t1, t2


def classify(global_risk: float, thresholds: tuple[float, float], ctrl: EgoControlState,
             cfg: ThresholdConfig = ThresholdConfig()) -> Level:
    t1, t2 = thresholds
    if global_risk < t1 or ctrl.brake_state >= cfg.brake_full:
        return Level.SAFE
    if global_risk < t2:
        return Level.WARNING
    return Level.EMERGENCY


def compose_command(level: Level, dominant: Direction, threat_class: AgentClass | None = None) -> str:
    level = Level(level)
    d = Direction(dominant)
    if level is Level.SAFE:
        return "Normal driving"
    if level is Level.WARNING:
        return f"Reduce speed to avoid risk in {d.value}"
    cmd = f"Emergency action toward opposite of {d.value}"
    if threat_class is not None:
        cmd += f": {threat_class.tag} approaching rapidly from {d.value}"
    return cmd


def dominant_threat(risk_map: RiskMapResult, grid: Grid, participants: Sequence[AgentState],
                    convention: SectorConvention = SectorConvention.EDGE) -> AgentState | None:
    """Participant with the largest mean raw contribution over the dominant sector."""
    contribs = risk_map.matrix.contributions
    if contribs is None or not len(participants):
        return None
    k = DIRECTIONS.index(risk_map.dominant)
    mask = sector_index(grid.local_x, grid.local_y, convention) == k
    if not mask.any():
        return None
    scores = [float(np.mean(c[mask])) for c in contribs]
    best = int(np.argmax(scores))
    return participants[best] if scores[best] > 0 else None


def threat_speed_delta(threat: AgentState | None, ego: AgentState) -> float:
    if threat is None:
        return 0.0
    return max((threat.speed - ego.speed) * MPS_TO_KMH, 0.0)


def assess_frame(ego: AgentState, participants: Sequence[AgentState],
                 lane: LaneGeometry = NO_LANE, ctrl: EgoControlState = EgoControlState(),
                 params: ModelParams = DEFAULT_PARAMS, grid_cfg: GridConfig = GridConfig(),
                 norm: NormalizationConfig | None = None, thresholds: ThresholdConfig = ThresholdConfig(),
                 convention: SectorConvention = SectorConvention.EDGE, t: float = 0.0) -> FrameAssessment:
    if norm is None:
        raise ConfigurationError("assess_frame needs a NormalizationConfig (see calibrate_reference_energy)")
    start = time.perf_counter()
    result, grid = evaluate_risk_map(ego, participants, lane, params, grid_cfg, norm, convention)
    threat = dominant_threat(result, grid, participants, convention)
    if ctrl.threat_speed_delta is None:
        ctrl = EgoControlState(ctrl.brake_state, threat_speed_delta(threat, ego))
    t1, t2 = adjust_thresholds(thresholds, ctrl)
    level = classify(result.global_risk, (t1, t2), ctrl, thresholds)
    threat_class = threat.agent_class if threat is not None else None
    command = compose_command(level, result.dominant, threat_class)
    advisory = Advisory(level, t1, t2, result.dominant, command, threat_class, ctrl.threat_speed_delta)
    latency = time.perf_counter() - start
    return FrameAssessment(result, advisory, latency, t, grid)
