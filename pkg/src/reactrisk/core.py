"""Kinetic-energy risk field and its analytic gradient.

Every participant emits an anisotropic Gaussian field scaled by its kinetic
energy and modulated by how fast the query point and the source close on
each other.  Lane boundaries add a quadratic (spring) penalty on the lateral
coordinate.  All functions here are pure; the ``*_xy`` variants take arrays of
query coordinates and are what the risk map evaluates over a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Sequence

import numpy as np

from .errors import ConfigurationError

# Collision-severity coefficients per participant class.
DEFAULT_SEVERITY = {
    "Pedestrian": 0.8,
    "Cyclist": 0.9,
    "Car": 1.0,
    "Truck": 1.5,
}


@dataclass(frozen=True)
class AgentClass:
    tag: str
    severity: float

    def __post_init__(self):
        if self.tag not in DEFAULT_SEVERITY:
            raise ConfigurationError(f"unknown agent class {self.tag!r}")
        if not self.severity > 0:
            raise ConfigurationError(f"severity coefficient must be > 0, got {self.severity}")

    @classmethod
    def of(cls, tag: str, severity: float | None = None) -> "AgentClass":
        if tag not in DEFAULT_SEVERITY:
            raise ConfigurationError(f"unknown agent class {tag!r}")
        return cls(tag, DEFAULT_SEVERITY[tag] if severity is None else float(severity))

    def scaled(self, c: float) -> "AgentClass":
        return AgentClass(self.tag, self.severity * c)


CAR = AgentClass.of("Car")
TRUCK = AgentClass.of("Truck")
PEDESTRIAN = AgentClass.of("Pedestrian")
CYCLIST = AgentClass.of("Cyclist")


@dataclass(frozen=True)
class AgentState:
    """One traffic participant (or the ego) at one instant, world frame, SI units."""

    id: Hashable
    position: tuple[float, float]
    velocity: tuple[float, float]
    mass: float = 1500.0
    agent_class: AgentClass = CAR

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "velocity", (float(self.velocity[0]), float(self.velocity[1])))
        if not all(math.isfinite(c) for c in self.position + self.velocity):
            raise ValueError(f"agent {self.id!r}: non-finite position or velocity")
        if not self.mass > 0:
            raise ValueError(f"agent {self.id!r}: mass must be > 0, got {self.mass}")

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])

    def replace(self, **changes) -> "AgentState":
        kw = dict(id=self.id, position=self.position, velocity=self.velocity,
                  mass=self.mass, agent_class=self.agent_class)
        kw.update(changes)
        return AgentState(**kw)


@dataclass(frozen=True)
class ModelParams:
    beta: float = 0.5           # direction gain
    epsilon: float = 1e-6       # (m/s)^2, guards the speed-ratio denominator
    k_time: float = 0.2         # s, semi-major axis per unit source speed
    a_min: float = 1.0          # m, floor on the semi-major axis
    b_lat: float = 5.0          # m, lateral axis
    k_lane: float = 0.5
    lambda_dashed: float = 1.0
    lambda_solid: float = 1.5
    y_max: float = 1.75         # m, lane half-width used for normalization
    tol_dist: float = 1e-9
    tol_speed: float = 1e-9

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be > 0")
        if not self.a_min > 0:
            raise ConfigurationError("a_min must be > 0")
        if not self.b_lat > 0:
            raise ConfigurationError("b_lat must be > 0")
        if not self.k_time >= 0:
            raise ConfigurationError("k_time must be >= 0")
        if not 0.1 <= self.k_lane <= 1.0:
            raise ConfigurationError(f"k_lane must lie in [0.1, 1.0], got {self.k_lane}")
        if not self.y_max > 0:
            raise ConfigurationError("y_max must be > 0")


class LaneType(str, Enum):
    DASHED = "Dashed"
    SOLID = "Solid"


@dataclass(frozen=True)
class LaneGeometry:
    y_left: float = 1.75
    y_right: float = -1.75
    left_type: LaneType = LaneType.DASHED
    right_type: LaneType = LaneType.DASHED
    enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "left_type", LaneType(self.left_type))
        object.__setattr__(self, "right_type", LaneType(self.right_type))
        if self.enabled and not self.y_left > self.y_right:
            raise ConfigurationError("lane: y_left must exceed y_right")

    @classmethod
    def disabled(cls) -> "LaneGeometry":
        return cls(enabled=False)

    def mirrored(self) -> "LaneGeometry":
        return LaneGeometry(-self.y_right, -self.y_left, self.right_type, self.left_type, self.enabled)


NO_LANE = LaneGeometry.disabled()


@dataclass(frozen=True)
class InteractionGeometry:
    rel_pos: tuple[float, float]
    rel_vel: tuple[float, float]
    dist: float
    rel_speed: float
    cos_closing: float


@dataclass(frozen=True)
class ForceVector:
    fx: float
    fy: float

    def __add__(self, other: "ForceVector") -> "ForceVector":
        return ForceVector(self.fx + other.fx, self.fy + other.fy)


DEFAULT_PARAMS = ModelParams()


# --- array kernels -----------------------------------------------------------

def _cos_closing(rx, ry, dist, rvx, rvy, rel_speed, params):
    # +1 when the separation shrinks fastest, -1 when it grows fastest.
    if rel_speed < params.tol_speed:
        return np.zeros_like(dist)
    valid = dist >= params.tol_dist
    denom = np.where(valid, dist * rel_speed, 1.0)
    cos = np.where(valid, -(rx * rvx + ry * rvy) / denom, 0.0)
    return np.clip(cos, -1.0, 1.0)


def _source_axes(source: AgentState, params: ModelParams):
    speed = source.speed
    if speed >= params.tol_speed:
        ux, uy = source.velocity[0] / speed, source.velocity[1] / speed
    else:
        ux, uy = 1.0, 0.0
    a = max(params.k_time * speed, params.a_min)
    return ux, uy, a, params.b_lat


def _ellipse_terms(rx, ry, source, params):
    ux, uy, a, b = _source_axes(source, params)
    dl = rx * ux + ry * uy
    dt = ry * ux - rx * uy
    r2 = dl * dl / (a * a) + dt * dt / (b * b)
    return r2, dl, dt, ux, uy, a, b


def _interaction_terms(qx, qy, query_vel, source, params):
    """Return (amplitude, r2, dl, dt, axes) where field = amplitude * exp(-r2)."""
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    rx = qx - source.position[0]
    ry = qy - source.position[1]
    rvx = float(query_vel[0]) - source.velocity[0]
    rvy = float(query_vel[1]) - source.velocity[1]
    rel_speed = math.hypot(rvx, rvy)
    dist = np.hypot(rx, ry)
    cos = _cos_closing(rx, ry, dist, rvx, rvy, rel_speed, params)
    speed = source.speed
    energy = base_risk_energy(source)
    factor = 1.0 + params.beta * cos * (rel_speed * rel_speed) / (speed * speed + params.epsilon)
    r2, dl, dt, ux, uy, a, b = _ellipse_terms(rx, ry, source, params)
    return energy * factor, r2, dl, dt, (ux, uy, a, b)


def interaction_field_xy(qx, qy, query_vel, source: AgentState, params: ModelParams = DEFAULT_PARAMS):
    """Field of one source at arrays of query coordinates (raw, may be negative)."""
    amp, r2, *_ = _interaction_terms(qx, qy, query_vel, source, params)
    return amp * np.exp(-r2)


def interaction_force_xy(qx, qy, query_vel, source: AgentState, params: ModelParams = DEFAULT_PARAMS):
    """Negative gradient of one source's field with the directional factor held fixed."""
    amp, r2, dl, dt, (ux, uy, a, b) = _interaction_terms(qx, qy, query_vel, source, params)
    g = amp * np.exp(-r2)
    # d(r2)/dx and d(r2)/dy in world axes
    dr2x = 2.0 * dl * ux / (a * a) - 2.0 * dt * uy / (b * b)
    dr2y = 2.0 * dl * uy / (a * a) + 2.0 * dt * ux / (b * b)
    return g * dr2x, g * dr2y


def _road_prefactor(ego: AgentState, params: ModelParams) -> float:
    v = ego.speed
    return 0.5 * ego.mass * v * v * params.k_lane


def _lane_lambdas(lane: LaneGeometry, params: ModelParams):
    lam = {LaneType.DASHED: params.lambda_dashed, LaneType.SOLID: params.lambda_solid}
    return lam[lane.right_type], lam[lane.left_type]


def road_field_y(y, ego: AgentState, lane: LaneGeometry, params: ModelParams = DEFAULT_PARAMS):
    y = np.asarray(y, dtype=float)
    if not lane.enabled:
        return np.zeros_like(y)
    lam_r, lam_l = _lane_lambdas(lane, params)
    dr = (y - lane.y_right) / params.y_max
    dl = (y - lane.y_left) / params.y_max
    return _road_prefactor(ego, params) * (lam_r * dr * dr + lam_l * dl * dl)


def road_force_y(y, ego: AgentState, lane: LaneGeometry, params: ModelParams = DEFAULT_PARAMS):
    y = np.asarray(y, dtype=float)
    if not lane.enabled:
        return np.zeros_like(y)
    lam_r, lam_l = _lane_lambdas(lane, params)
    ym2 = params.y_max * params.y_max
    grad = _road_prefactor(ego, params) * (
        2.0 * lam_r * (y - lane.y_right) + 2.0 * lam_l * (y - lane.y_left)) / ym2
    return -grad


def total_field_xy(qx, qy, query_vel, participants: Sequence[AgentState], ego: AgentState,
                   lane: LaneGeometry, params: ModelParams = DEFAULT_PARAMS):
    qx = np.asarray(qx, dtype=float)
    total = np.zeros(np.broadcast(qx, np.asarray(qy)).shape)
    for source in participants:
        total = total + interaction_field_xy(qx, qy, query_vel, source, params)
    return total + road_field_y(qy, ego, lane, params)


# --- point operations ---------------------------------------------------------

def relative_kinematics(query_pos, query_vel, source: AgentState,
                        params: ModelParams = DEFAULT_PARAMS) -> InteractionGeometry:
    rx = float(query_pos[0]) - source.position[0]
    ry = float(query_pos[1]) - source.position[1]
    rvx = float(query_vel[0]) - source.velocity[0]
    rvy = float(query_vel[1]) - source.velocity[1]
    dist = float(np.hypot(rx, ry))
    rel_speed = math.hypot(rvx, rvy)
    cos = float(_cos_closing(np.float64(rx), np.float64(ry), np.float64(dist),
                             rvx, rvy, rel_speed, params))
    return InteractionGeometry((rx, ry), (rvx, rvy), dist, rel_speed, cos)


def elliptical_distance_sq(geom: InteractionGeometry, source_velocity,
                           params: ModelParams = DEFAULT_PARAMS) -> float:
    """Squared elliptical distance of ``geom.rel_pos`` in the source's velocity frame.

    The semi-axis along the velocity is ``max(k_time * speed, a_min)``; the
    lateral one is ``b_lat``.  Stationary sources use world axes.
    """
    probe = AgentState("_", (0.0, 0.0), source_velocity)
    r2, *_ = _ellipse_terms(np.float64(geom.rel_pos[0]), np.float64(geom.rel_pos[1]), probe, params)
    return float(r2)


def base_risk_energy(source: AgentState) -> float:
    v = source.speed
    return 0.5 * source.agent_class.severity * source.mass * v * v


def interaction_field_at(query_pos, query_vel, source: AgentState,
                         params: ModelParams = DEFAULT_PARAMS) -> float:
    return float(interaction_field_xy(query_pos[0], query_pos[1], query_vel, source, params))


def road_field_at(query_pos, ego: AgentState, lane: LaneGeometry,
                  params: ModelParams = DEFAULT_PARAMS) -> float:
    return float(road_field_y(query_pos[1], ego, lane, params))


def total_field_at(query_pos, query_vel, participants: Sequence[AgentState], ego: AgentState,
                   lane: LaneGeometry, params: ModelParams = DEFAULT_PARAMS) -> float:
    return float(total_field_xy(query_pos[0], query_pos[1], query_vel, participants, ego, lane, params))


def field_force_at(query_pos, query_vel, participants: Sequence[AgentState], ego: AgentState,
                   lane: LaneGeometry, params: ModelParams = DEFAULT_PARAMS) -> ForceVector:
    """Total field force: per-source forces summed in input order, plus the lane force."""
    fx = 0.0
    fy = 0.0
    for source in participants:
        sx, sy = interaction_force_xy(query_pos[0], query_pos[1], query_vel, source, params)
        fx += float(sx)
        fy += float(sy)
    fy += float(road_force_y(query_pos[1], ego, lane, params))
    return ForceVector(fx, fy)
