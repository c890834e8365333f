"""Run scenarios and replays through the engine, score them, and time the engine."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .advisory import EgoControlState, FrameAssessment, assess_frame
from .config import EngineConfig
from .core import CAR, NO_LANE, AgentState, LaneGeometry
from .errors import InputError
from .riskmap import GridConfig, NormalizationConfig, calibrate_reference_energy
from .scenarios import (DriverMode, ScenarioKind, ScenarioScript, build_scenario, ego_driver_model,
                        run)
from .trace import Trace, TraceLabels


@dataclass
class RunMetrics:
    false_alarm_rate: float = 0.0
    miss_rate: float = 0.0
    warning_lead_time: dict = field(default_factory=dict)
    latency_ms: dict = field(default_factory=dict)
    per_frame_records: int = 0
    hazard_runs: int = 0
    misses: int = 0
    nominal_runs: int = 0
    false_alarms: int = 0

    def to_dict(self) -> dict:
        return {
            "false_alarm_rate": self.false_alarm_rate,
            "miss_rate": self.miss_rate,
            "warning_lead_time": dict(self.warning_lead_time),
            "latency_ms": dict(self.latency_ms),
            "per_frame_records": self.per_frame_records,
            "hazard_runs": self.hazard_runs,
            "misses": self.misses,
            "nominal_runs": self.nominal_runs,
            "false_alarms": self.false_alarms,
        }


def _record(a) -> dict:
    return a if isinstance(a, dict) else a.to_record()


def latency_summary(latencies_ms: Sequence[float]) -> dict:
    if not len(latencies_ms):
        return {}
    arr = np.asarray(latencies_ms, dtype=float)
    return {"mean": float(arr.mean()), "p95": float(np.percentile(arr, 95)), "max": float(arr.max())}


def evaluate_run(assessments: Sequence[FrameAssessment | dict], labels: TraceLabels | None,
                 name: str | None = None) -> RunMetrics:
    """Score one run.

    Hazard runs miss when no Level >= 1 advisory falls inside the hazard
    window; nominal runs raise a false alarm on any Level >= 1 advisory.  The
    lead time is ``t_w - t_f`` with ``t_w`` the first Level >= 1 advisory.
    """
    if labels is None:
        raise InputError("evaluate_run needs hazard labels (t_f, hazard_window)")
    records = [_record(a) for a in assessments]
    warned = [r["t"] for r in records if r["level"] >= 1]
    m = RunMetrics(per_frame_records=len(records),
                   latency_ms=latency_summary([r["latency_ms"] for r in records]))
    name = name or labels.scenario or "run"
    if labels.hazardous:
        m.hazard_runs = 1
        m.misses = int(not any(labels.in_window(t) for t in warned))
        if warned:
            m.warning_lead_time[name] = warned[0] - labels.t_f
    else:
        m.nominal_runs = 1
        m.false_alarms = int(bool(warned))
    m.miss_rate = m.misses / m.hazard_runs if m.hazard_runs else 0.0
    m.false_alarm_rate = m.false_alarms / m.nominal_runs if m.nominal_runs else 0.0
    return m


def combine_metrics(parts: Sequence[RunMetrics]) -> RunMetrics:
    out = RunMetrics()
    lat_means = []
    for p in parts:
        out.hazard_runs += p.hazard_runs
        out.misses += p.misses
        out.nominal_runs += p.nominal_runs
        out.false_alarms += p.false_alarms
        out.per_frame_records += p.per_frame_records
        out.warning_lead_time.update(p.warning_lead_time)
        if p.latency_ms:
            lat_means.append(p.latency_ms)
    out.miss_rate = out.misses / out.hazard_runs if out.hazard_runs else 0.0
    out.false_alarm_rate = out.false_alarms / out.nominal_runs if out.nominal_runs else 0.0
    if lat_means:
        out.latency_ms = {
            "mean": statistics.fmean(d["mean"] for d in lat_means),
            "p95": max(d["p95"] for d in lat_means),
            "max": max(d["max"] for d in lat_means),
        }
    return out


# --- trace assessment ---------------------------------------------------------------

def assess_trace(trace: Trace, cfg: EngineConfig, lane: LaneGeometry | None = None,
                 norm: NormalizationConfig | None = None) -> list[FrameAssessment]:
    if lane is None:
        lane = trace.meta.get("lane", cfg.io.lane)
    norm = norm or cfg.normalization()
    out = []
    for k, frame in enumerate(trace.frames):
        ctrl = EgoControlState(frame.brake_state)
        out.append(assess_frame(trace.ego(k), trace.others(k), lane, ctrl, cfg.model, cfg.grid, norm,
                                cfg.thresholds, cfg.sector_convention, t=frame.t))
    return out


def levels(assessments: Sequence[FrameAssessment]) -> list[int]:
    return [int(a.advisory.level) for a in assessments]


@dataclass
class ScenarioRun:
    script: ScenarioScript
    trace: Trace
    assessments: list[FrameAssessment]
    metrics: RunMetrics
    mode: DriverMode

    @property
    def warning_time(self) -> float | None:
        return next((a.t for a in self.assessments if a.advisory.level >= 1), None)


def run_scenario(kind, cfg: EngineConfig | None = None, mode: DriverMode = DriverMode.WITH_WARNING,
                 nominal: bool = False, norm: NormalizationConfig | None = None) -> ScenarioRun:
    """Simulate, assess, apply the ego response, and re-assess with the braking state."""
    cfg = cfg or EngineConfig()
    kind = ScenarioKind.parse(kind)
    mode = DriverMode(mode)
    norm = norm or cfg.normalization()
    script = build_scenario(kind, cfg.scenario_overrides.get(kind), nominal=nominal)
    open_loop = run(script)
    first = assess_trace(open_loop, cfg, script.lane, norm)
    trace = ego_driver_model(open_loop, levels(first), mode, cfg.driver, kind)
    if trace.meta.get("brake_onset") is None:
        assessments = first
    else:
        assessments = assess_trace(trace, cfg, script.lane, norm)
    metrics = evaluate_run(assessments, script.labels(), kind.name)
    return ScenarioRun(script, trace, assessments, metrics, mode)


# --- latency ------------------------------------------------------------------------

def random_scene(n_participants: int, seed: int = 0, grid: GridConfig = GridConfig()):
    """Ego at the origin at 10 m/s plus ``n`` cars scattered over the ROI."""
    rng = np.random.default_rng(seed)
    ego = AgentState("ego", (0.0, 0.0), (10.0, 0.0), 1500.0, CAR)
    others = []
    for i in range(n_participants):
        x = rng.uniform(-grid.half_length_back, grid.half_length_fwd)
        y = rng.uniform(-grid.half_width, grid.half_width)
        speed = rng.uniform(0.0, 20.0)
        ang = rng.uniform(-np.pi, np.pi)
        others.append(AgentState(i, (x, y), (speed * np.cos(ang), speed * np.sin(ang)), 1500.0, CAR))
    return ego, others


@dataclass
class LatencyRow:
    participants: int
    cells: int
    mean_ms: float
    p95_ms: float
    max_ms: float
    repetitions: int


def latency_bench(scene_generator: Callable = random_scene, sizes: Sequence[int] = (0, 1, 5, 10, 20),
                  repetitions: int = 1000, grid: GridConfig = GridConfig(), cfg: EngineConfig | None = None,
                  warmup: int = 10, seed: int = 0) -> list[LatencyRow]:
    """Wall-clock statistics of :func:`assess_frame` per participant count (warm-up excluded)."""
    cfg = cfg or EngineConfig()
    norm = NormalizationConfig(cfg.reference_energy or calibrate_reference_energy(cfg.model, grid))
    rows = []
    for n in sizes:
        ego, others = scene_generator(n, seed, grid)
        samples = []
        for i in range(warmup + repetitions):
            start = time.perf_counter()
            assess_frame(ego, others, NO_LANE, EgoControlState(), cfg.model, grid, norm, cfg.thresholds,
                         cfg.sector_convention)
            if i >= warmup:
                samples.append((time.perf_counter() - start) * 1e3)
        m, k = grid.shape
        s = latency_summary(samples)
        rows.append(LatencyRow(n, m * k, s["mean"], s["p95"], s["max"], repetitions))
    return rows
