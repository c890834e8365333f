"""Scripted kinematic scenarios: car-following braking, cut-in, rear-approach, intersection.

Agents follow piecewise-constant longitudinal accelerations along a fixed
heading, plus optional constant-rate lateral ramps.  Everything is driven by
integer step indices so event times land exactly on frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .core import NO_LANE, AgentClass, AgentState, LaneGeometry, CAR
from .errors import ConfigurationError
from .trace import Frame, Trace, TraceLabels

KMH = 1 / 3.6
VEHICLE_LENGTH = 4.5
EGO_ID = 1
CONFLICT_ID = 2


class ScenarioKind(str, Enum):
    CF = "CarFollowingBraking"
    CI = "CutIn"
    RV = "RearApproaching"
    IC = "IntersectionConflict"

    @classmethod
    def parse(cls, value: "str | ScenarioKind") -> "ScenarioKind":
        if isinstance(value, cls):
            return value
        for k in cls:
            if value in (k.name, k.value) or str(value).upper() == k.name:
                return k
        raise ConfigurationError(f"unknown scenario kind {value!r}; expected one of "
                                 + ", ".join(k.name for k in cls))


@dataclass(frozen=True)
class AccelSegment:
    t_start: float
    accel: float
    target_speed: float | None = None   # hold once reached; None = no cap (floor at 0 still applies)


@dataclass(frozen=True)
class LateralRamp:
    t_start: float
    duration: float
    offset: float        # metres, positive to the left of the heading


@dataclass(frozen=True)
class AgentProgram:
    id: int
    position: tuple[float, float]
    heading: tuple[float, float]
    speed: float
    mass: float = 1500.0
    agent_class: AgentClass = CAR
    segments: tuple[AccelSegment, ...] = ()
    ramps: tuple[LateralRamp, ...] = ()

    def holding(self) -> "AgentProgram":
        return replace(self, segments=(), ramps=())


@dataclass(frozen=True)
class ScenarioScript:
    kind: ScenarioKind
    agents: tuple[AgentProgram, ...]
    t_f: float
    hazard_window: tuple[float, float]
    lane: LaneGeometry = NO_LANE
    duration: float = 12.0
    dt: float = 0.05
    ego_id: int = EGO_ID
    conflict_id: int = CONFLICT_ID
    hazardous: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("scenario dt must be > 0")
        if not 0 <= self.t_f <= self.duration:
            raise ConfigurationError("t_f must lie within [0, duration]")
        lo, hi = self.hazard_window
        if not 0 <= lo <= hi <= self.duration:
            raise ConfigurationError("hazard window must lie within [0, duration]")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt)) + 1

    def labels(self) -> TraceLabels:
        return TraceLabels(self.t_f, self.hazard_window, self.hazardous, self.kind.name)

    def program(self, agent_id: int) -> AgentProgram:
        for p in self.agents:
            if p.id == agent_id:
                return p
        raise KeyError(agent_id)


# Defaults for the scripted maneuvers; Table-3 speeds, the rest are modelling choices.
DEFAULTS = {
    ScenarioKind.CF: dict(ego_speed_kmh=19.0, lead_speed_kmh=18.0, gap=15.0, t_f=5.0,
                          decel=3.0, duration=12.0, hazard_horizon=5.0),
    ScenarioKind.CI: dict(ego_speed_kmh=20.0, cutin_speed_kmh=20.0, cutin_target_kmh=25.0,
                          ahead=10.0, lane_offset=-3.5, t_f=4.0, accel=1.4,
                          merge_duration=3.0, duration=12.0, hazard_horizon=5.0),
    ScenarioKind.RV: dict(ego_speed_kmh=15.0, rear_speed_kmh=15.0, rear_target_kmh=20.0,
                          behind=20.0, t_f=5.0, accel=1.4, duration=14.0, hazard_horizon=6.0),
    ScenarioKind.IC: dict(ego_speed_kmh=20.0, cross_speed_kmh=20.0, approach=40.0, t_f=0.0,
                          duration=10.0, hazard_horizon=8.0),
}
COMMON_KEYS = {"dt", "mass", "lane_enabled"}


def build_scenario(kind, overrides: dict | None = None, nominal: bool = False) -> ScenarioScript:
    """Build the default script for ``kind``.

    ``nominal=True`` disables the conflict maneuver: the conflict agent holds
    its initial velocity (for the intersection it waits at its stop line).
    """
    kind = ScenarioKind.parse(kind)
    p = dict(DEFAULTS[kind], dt=0.05, mass=1500.0, lane_enabled=False)
    for key, value in (overrides or {}).items():
        if key not in p:
            raise ConfigurationError(f"unknown override {key!r} for scenario {kind.name}")
        p[key] = value
    if p["dt"] <= 0 or p["mass"] <= 0:
        raise ConfigurationError("dt and mass must be > 0")

    lane = LaneGeometry(enabled=bool(p["lane_enabled"]))
    m = float(p["mass"])
    east = (1.0, 0.0)

    if kind is ScenarioKind.CF:
        ego = AgentProgram(EGO_ID, (0.0, 0.0), east, p["ego_speed_kmh"] * KMH, m)
        other = AgentProgram(CONFLICT_ID, (p["gap"] + VEHICLE_LENGTH, 0.0), east,
                             p["lead_speed_kmh"] * KMH, m,
                             segments=(AccelSegment(p["t_f"], -abs(p["decel"]), 0.0),))
    elif kind is ScenarioKind.CI:
        ego = AgentProgram(EGO_ID, (0.0, 0.0), east, p["ego_speed_kmh"] * KMH, m)
        other = AgentProgram(CONFLICT_ID, (p["ahead"] + VEHICLE_LENGTH, p["lane_offset"]), east,
                             p["cutin_speed_kmh"] * KMH, m,
                             segments=(AccelSegment(p["t_f"], abs(p["accel"]), p["cutin_target_kmh"] * KMH),),
                             ramps=(LateralRamp(p["t_f"], p["merge_duration"], -p["lane_offset"]),))
    elif kind is ScenarioKind.RV:
        ego = AgentProgram(EGO_ID, (0.0, 0.0), east, p["ego_speed_kmh"] * KMH, m)
        other = AgentProgram(CONFLICT_ID, (-(p["behind"] + VEHICLE_LENGTH), 0.0), east,
                             p["rear_speed_kmh"] * KMH, m,
                             segments=(AccelSegment(p["t_f"], abs(p["accel"]), p["rear_target_kmh"] * KMH),))
    else:
        ego = AgentProgram(EGO_ID, (-p["approach"], 0.0), east, p["ego_speed_kmh"] * KMH, m)
        other = AgentProgram(CONFLICT_ID, (0.0, -p["approach"]), (0.0, 1.0), p["cross_speed_kmh"] * KMH, m)
        lane = NO_LANE

    if nominal:
        other = replace(other, speed=0.0) if kind is ScenarioKind.IC else other.holding()

    duration = float(p["duration"])
    t_f = float(p["t_f"])
    window = (t_f, min(duration, t_f + p["hazard_horizon"]))
    return ScenarioScript(kind, (ego, other), t_f, window, lane, duration, float(p["dt"]),
                          hazardous=not nominal, params=p)


# --- integration -----------------------------------------------------------------

def _step_index(t: float, dt: float) -> int:
    return int(round(t / dt))


def _active_segment(prog: AgentProgram, k: int, dt: float) -> AccelSegment | None:
    active = None
    for seg in prog.segments:
        if k >= _step_index(seg.t_start, dt):
            active = seg
    return active


def _lateral_rate(prog: AgentProgram, k: int, dt: float) -> float:
    rate = 0.0
    for r in prog.ramps:
        k0 = _step_index(r.t_start, dt)
        k1 = k0 + _step_index(r.duration, dt)
        if k0 <= k < k1 and r.duration > 0:
            rate += r.offset / r.duration
    return rate


def advance_speed(v: float, a: float, dt: float, target: float | None = None) -> tuple[float, float]:
    """Constant-acceleration step with clamping at ``target`` (and at 0).

    Returns (new_speed, distance_travelled).
    """
    limit = 0.0 if a < 0 else None
    if target is not None:
        limit = target if a > 0 else max(target, 0.0)
    v_new = v + a * dt
    if a == 0 or limit is None or (a > 0 and v_new <= limit) or (a < 0 and v_new >= limit):
        v_new = max(v_new, 0.0)
        return v_new, v * dt + 0.5 * a * dt * dt
    if (a > 0 and v >= limit) or (a < 0 and v <= limit):
        return v, v * dt
    tau = (limit - v) / a
    return limit, v * tau + 0.5 * a * tau * tau + limit * (dt - tau)


def _simulate_program(prog: AgentProgram, n_steps: int, dt: float) -> list[tuple[tuple, tuple]]:
    hx, hy = prog.heading
    norm = math.hypot(hx, hy)
    hx, hy = hx / norm, hy / norm
    nx, ny = -hy, hx
    x0, y0 = prog.position
    s_lon = 0.0
    s_lat = 0.0
    v = prog.speed
    out = []
    for k in range(n_steps):
        lat_rate = _lateral_rate(prog, k, dt)
        pos = (x0 + s_lon * hx + s_lat * nx, y0 + s_lon * hy + s_lat * ny)
        vel = (v * hx + lat_rate * nx, v * hy + lat_rate * ny)
        out.append((pos, vel))
        seg = _active_segment(prog, k, dt)
        if seg is None:
            s_lon += v * dt
        else:
            v, d = advance_speed(v, seg.accel, dt, seg.target_speed)
            s_lon += d
        s_lat += lat_rate * dt
    return out


def run(script: ScenarioScript) -> Trace:
    n = script.n_steps
    states = {p.id: _simulate_program(p, n, script.dt) for p in script.agents}
    frames = []
    for k in range(n):
        agents = [AgentState(p.id, *states[p.id][k], mass=p.mass, agent_class=p.agent_class)
                  for p in script.agents]
        frames.append(Frame(k * script.dt, agents))
    return Trace(frames, script.ego_id, script.labels(), 1.0 / script.dt,
                 meta={"scenario": script.kind.name, "lane": script.lane})


# --- ego response ------------------------------------------------------------------

class DriverMode(str, Enum):
    NO_WARNING = "nowarning"
    WITH_WARNING = "warning"


# Unassisted reaction offsets t_d - t_f (human-driver reference row), seconds.
HUMAN_REACTION = {ScenarioKind.CF: 2.7, ScenarioKind.CI: 0.6, ScenarioKind.RV: 0.8, ScenarioKind.IC: 4.8}


@dataclass(frozen=True)
class DriverModelConfig:
    decel: float = 2.5
    reaction_delay: float = 0.3
    brake_ramp: float = 0.2


def first_warning_time(trace: Trace, levels: Sequence[int]) -> float | None:
    for frame, level in zip(trace.frames, levels):
        if level >= 1:
            return frame.t
    return None


def brake_onset(trace: Trace, levels: Sequence[int] | None, mode: DriverMode,
                cfg: DriverModelConfig = DriverModelConfig(), kind: ScenarioKind | None = None) -> float | None:
    mode = DriverMode(mode)
    if mode is DriverMode.WITH_WARNING:
        t_w = first_warning_time(trace, levels or [])
        return None if t_w is None else t_w + cfg.reaction_delay
    if kind is None:
        kind = ScenarioKind.parse(trace.labels.scenario)
    return trace.labels.t_f + HUMAN_REACTION[kind]


def ego_driver_model(trace: Trace, levels: Sequence[int] | None, mode: DriverMode,
                     cfg: DriverModelConfig = DriverModelConfig(),
                     kind: ScenarioKind | None = None) -> Trace:
    """Return a copy of ``trace`` in which the ego brakes at the scripted onset.

    Other agents are replayed unchanged.  ``brake_state`` ramps linearly from
    0 to 1 over ``cfg.brake_ramp`` seconds after the onset.
    """
    t_b = brake_onset(trace, levels, mode, cfg, kind)
    frames = [Frame(f.t, list(f.agents), f.brake_state) for f in trace.frames]
    out = Trace(frames, trace.ego_id, trace.labels, trace.frame_rate, dict(trace.meta, brake_onset=t_b))
    if t_b is None:
        return out
    dt = 1.0 / trace.frame_rate if trace.frame_rate else trace.frames[1].t - trace.frames[0].t
    k_b = next((k for k, f in enumerate(frames) if f.t >= t_b - 1e-9), None)
    if k_b is None:
        return out
    ego0 = trace.ego(k_b)
    v = ego0.speed
    hx, hy = (ego0.velocity[0] / v, ego0.velocity[1] / v) if v > 0 else (1.0, 0.0)
    s = 0.0
    for k in range(k_b, len(frames)):
        pos = (ego0.position[0] + s * hx, ego0.position[1] + s * hy)
        ego = ego0.replace(position=pos, velocity=(v * hx, v * hy))
        frames[k].agents = [ego if a.id == trace.ego_id else a for a in frames[k].agents]
        frames[k].brake_state = min(max((frames[k].t - t_b) / cfg.brake_ramp, 0.0), 1.0) if cfg.brake_ramp > 0 else 1.0
        v, d = advance_speed(v, -abs(cfg.decel), dt, 0.0)
        s += d
    return out


def min_gap(trace: Trace, other_id: int, length: float = VEHICLE_LENGTH) -> float:
    """Smallest bumper gap between the ego and ``other_id`` over the trace."""
    best = math.inf
    for k, f in enumerate(trace.frames):
        e, o = trace.ego(k), f.get(other_id)
        if o is None:
            continue
        best = min(best, math.hypot(o.position[0] - e.position[0], o.position[1] - e.position[1]) - length)
    return best
