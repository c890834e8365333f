"""Time-ordered multi-agent traces shared by the simulator, replay, and baselines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .core import AgentState
from .errors import InputError


@dataclass(frozen=True)
class TraceLabels:
    t_f: float
    hazard_window: tuple[float, float]
    hazardous: bool = True
    scenario: str = ""

    def in_window(self, t: float) -> bool:
        lo, hi = self.hazard_window
        return lo <= t <= hi


@dataclass
class Frame:
    t: float
    agents: list[AgentState]
    brake_state: float = 0.0     # ego braking state S_brake

    def get(self, agent_id: Hashable) -> AgentState | None:
        for a in self.agents:
            if a.id == agent_id:
                return a
        return None


@dataclass
class Trace:
    frames: list[Frame]
    ego_id: Hashable
    labels: TraceLabels | None = None
    frame_rate: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def times(self) -> list[float]:
        return [f.t for f in self.frames]

    def ego(self, k: int) -> AgentState:
        a = self.frames[k].get(self.ego_id)
        if a is None:
            raise InputError(f"ego {self.ego_id!r} missing at frame {k} (t={self.frames[k].t})")
        return a

    def others(self, k: int) -> list[AgentState]:
        return [a for a in self.frames[k].agents if a.id != self.ego_id]

    def agent_series(self, agent_id: Hashable) -> list[AgentState | None]:
        return [f.get(agent_id) for f in self.frames]
