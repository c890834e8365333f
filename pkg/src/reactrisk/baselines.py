"""Longitudinal surrogate safety metrics (TTC, THW, RSS) against a selected lead."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .core import AgentState
from .errors import InputError
from .riskmap import ego_heading
from .trace import Trace

INF = math.inf


@dataclass(frozen=True)
class LongitudinalPair:
    gap: float
    ego_speed: float
    lead_speed: float

    def __post_init__(self):
        if self.gap < 0 or self.ego_speed < 0 or self.lead_speed < 0:
            raise ValueError(f"gap and speeds must be >= 0: {self}")


@dataclass(frozen=True)
class RssParams:
    reaction_time: float = 0.5
    max_brake: float = 5.0

    def __post_init__(self):
        if not (self.reaction_time > 0 and self.max_brake > 0):
            raise ValueError("RSS reaction_time and max_brake must be > 0")


@dataclass(frozen=True)
class AlertThresholds:
    # Conventions used to turn the baselines into binary alerts; not model values.
    ttc: float = 3.0
    thw: float = 1.0


def ttc(pair: LongitudinalPair) -> float:
    closing = pair.ego_speed - pair.lead_speed
    if closing <= 0:
        return INF
    return pair.gap / closing


def thw(pair: LongitudinalPair) -> float:
    if pair.ego_speed <= 0:
        return INF
    return pair.gap / pair.ego_speed


def rss_required_gap(ego_speed: float, params: RssParams = RssParams()) -> float:
    return ego_speed * params.reaction_time + ego_speed * ego_speed / (2.0 * params.max_brake)


def rss_violated(pair: LongitudinalPair, params: RssParams = RssParams()) -> bool:
    return pair.gap < rss_required_gap(pair.ego_speed, params)


@dataclass(frozen=True)
class BaselineRecord:
    frame: int
    t: float
    lead_id: object | None
    ttc: float
    thw: float
    rss_violated: bool | None


def nearest_lead(ego: AgentState, others: Sequence[AgentState], lane_tolerance: float = 1.75,
                 vehicle_length: float = 4.5) -> tuple[AgentState, LongitudinalPair] | None:
    """Closest agent ahead whose lateral offset (ego frame) is within ``lane_tolerance``."""
    hx, hy = ego_heading(ego)
    best = None
    for a in others:
        dx = a.position[0] - ego.position[0]
        dy = a.position[1] - ego.position[1]
        lon = dx * hx + dy * hy
        lat = -dx * hy + dy * hx
        if lon <= 0 or abs(lat) > lane_tolerance:
            continue
        if best is None or lon < best[0]:
            best = (lon, a)
    if best is None:
        return None
    lon, lead = best
    ego_v = max(ego.velocity[0] * hx + ego.velocity[1] * hy, 0.0)
    lead_v = max(lead.velocity[0] * hx + lead.velocity[1] * hy, 0.0)
    return lead, LongitudinalPair(max(lon - vehicle_length, 0.0), ego_v, lead_v)


LeadSelector = Callable[[AgentState, Sequence[AgentState]], "tuple[AgentState, LongitudinalPair] | None"]


def baseline_series(trace: Trace, lead_selector: LeadSelector = nearest_lead,
                    rss: RssParams = RssParams()) -> list[BaselineRecord]:
    out = []
    for k, frame in enumerate(trace.frames):
        ego = frame.get(trace.ego_id)
        if ego is None:
            raise InputError(f"ego id {trace.ego_id!r} missing at frame {k}")
        sel = lead_selector(ego, trace.others(k))
        if sel is None:
            out.append(BaselineRecord(k, frame.t, None, INF, INF, None))
            continue
        lead, pair = sel
        out.append(BaselineRecord(k, frame.t, lead.id, ttc(pair), thw(pair), rss_violated(pair, rss)))
    return out


def write_baselines_csv(path, records: Sequence[BaselineRecord], react_levels: Sequence[int] | None = None,
                        react_risk: Sequence[float] | None = None,
                        alerts: AlertThresholds = AlertThresholds()) -> None:
    """CSV with the raw metrics plus one ``level_<model>`` alert column per model."""
    header = ["frame", "t", "ttc", "thw", "rss_violated", "level_ttc", "level_thw", "level_rss"]
    if react_levels is not None:
        header += ["global_risk_react", "level_react"]
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, r in enumerate(records):
            row = [r.frame, repr(r.t), repr(r.ttc), repr(r.thw),
                   "" if r.rss_violated is None else int(r.rss_violated),
                   int(r.ttc < alerts.ttc), int(r.thw < alerts.thw), int(bool(r.rss_violated))]
            if react_levels is not None:
                row += [repr(react_risk[i]) if react_risk is not None else "", int(react_levels[i])]
            w.writerow(row)
