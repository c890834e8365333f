"""Trajectory CSV ingestion (frame-based columns) and assessment JSONL output."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .advisory import FrameAssessment
from .core import DEFAULT_SEVERITY, AgentClass, AgentState
from .errors import InputError
from .trace import Frame, Trace

DEFAULT_MASSES = {"Car": 1500.0, "Truck": 10_000.0, "Cyclist": 90.0, "Pedestrian": 70.0}
GAP_FILL_HORIZON = 0.5


@dataclass(frozen=True)
class TraceSchema:
    """Column names in the input CSV; width/height are optional."""

    frame: str = "frame"
    id: str = "id"
    x: str = "x"
    y: str = "y"
    x_velocity: str = "xVelocity"
    y_velocity: str = "yVelocity"
    width: str | None = "width"
    height: str | None = "height"
    agent_class: str = "class"
    frame_rate: float = 25.0

    def __post_init__(self):
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be > 0")

    @property
    def required(self) -> list[str]:
        return [self.frame, self.id, self.x, self.y, self.x_velocity, self.y_velocity, self.agent_class]


def _parse_class(raw: str, lineno: int, path) -> str:
    tag = raw.strip()
    for known in DEFAULT_SEVERITY:
        if tag.lower() == known.lower():
            return known
    raise InputError(f"{path}:{lineno}: unknown class {raw!r}")


def load_trace(path, schema: TraceSchema = TraceSchema(), ego_id=None,
               mass_defaults: dict | None = None, severity: dict | None = None) -> Trace:
    """Read a trajectory CSV into a :class:`Trace`.

    Rows are grouped by frame index and stamped ``frame / frame_rate``.  If
    the ego is missing from a frame it is dead-reckoned from its last
    observation for up to 0.5 s; longer gaps raise :class:`InputError`.
    """
    path = Path(path)
    masses = dict(DEFAULT_MASSES, **(mass_defaults or {}))
    classes = {tag: AgentClass.of(tag, (severity or {}).get(tag)) for tag in DEFAULT_SEVERITY}
    try:
        fh = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"trace file not found: {path}") from None
    except OSError as exc:
        raise InputError(f"cannot open trace file {path}: {exc}") from exc

    by_frame: dict[int, list[AgentState]] = defaultdict(list)
    seen = set()
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file")
        missing = [c for c in schema.required if c not in reader.fieldnames]
        if missing:
            raise InputError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                frame = int(row[schema.frame])
                aid = int(row[schema.id])
                pos = (float(row[schema.x]), float(row[schema.y]))
                vel = (float(row[schema.x_velocity]), float(row[schema.y_velocity]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: malformed row ({exc})") from None
            if not all(math.isfinite(v) for v in pos + vel):
                raise InputError(f"{path}:{lineno}: non-finite position or velocity")
            tag = _parse_class(row[schema.agent_class] or "", lineno, path)
            if (frame, aid) in seen:
                raise InputError(f"{path}:{lineno}: duplicate (frame, id) = ({frame}, {aid})")
            seen.add((frame, aid))
            by_frame[frame].append(AgentState(aid, pos, vel, masses[tag], classes[tag]))

    if not by_frame:
        raise InputError(f"{path}: no data rows")
    frames = [Frame(k / schema.frame_rate, by_frame[k]) for k in sorted(by_frame)]
    trace = Trace(frames, ego_id, None, schema.frame_rate, meta={"source": str(path)})
    if ego_id is not None:
        _gap_fill_ego(trace, path)
    return trace


def _gap_fill_ego(trace: Trace, path) -> None:
    last = None
    last_t = None
    for k, frame in enumerate(trace.frames):
        ego = frame.get(trace.ego_id)
        if ego is not None:
            last, last_t = ego, frame.t
            continue
        if last is None:
            raise InputError(f"{path}: ego id {trace.ego_id!r} absent at t={frame.t} (before first sighting)")
        gap = frame.t - last_t
        if gap > GAP_FILL_HORIZON + 1e-9:
            raise InputError(f"{path}: ego id {trace.ego_id!r} missing for {gap:.3f} s at t={frame.t}")
        pos = (last.position[0] + last.velocity[0] * gap, last.position[1] + last.velocity[1] * gap)
        frame.agents = frame.agents + [last.replace(position=pos)]


def write_trace_csv(path, trace: Trace) -> None:
    rate = trace.frame_rate or 1.0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "id", "x", "y", "xVelocity", "yVelocity", "class", "mass", "brake_state"])
        for frame in trace.frames:
            k = int(round(frame.t * rate))
            for a in frame.agents:
                brake = frame.brake_state if a.id == trace.ego_id else 0.0
                w.writerow([k, a.id, repr(a.position[0]), repr(a.position[1]), repr(a.velocity[0]),
                            repr(a.velocity[1]), a.agent_class.tag, repr(a.mass), repr(brake)])


# --- assessments ------------------------------------------------------------------

RECORD_FIELDS = ("t", "global_risk", "level", "dominant", "sector_risks", "command", "latency_ms")


def write_assessments(path, assessments: Iterable[FrameAssessment | dict]) -> None:
    """One JSON object per line, fields in a fixed order; floats round-trip exactly."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for a in assessments:
                rec = a if isinstance(a, dict) else a.to_record()
                fh.write(json.dumps({k: rec[k] for k in RECORD_FIELDS}) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write assessments to {path}: {exc}") from exc


def read_assessments(path) -> list[dict]:
    path = Path(path)
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return out
