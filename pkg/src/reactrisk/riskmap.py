"""Ego-centred risk grid, global risk, and eight-sector directional risk."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (DEFAULT_PARAMS, NO_LANE, AgentState, LaneGeometry, ModelParams,
                   interaction_field_xy, road_field_y)
from .errors import CalibrationError, ConfigurationError


class Direction(str, Enum):
    """Eight bearing sectors, listed counterclockwise starting at the heading."""

    F = "F"
    FL = "FL"
    L = "L"
    RL = "RL"
    B = "B"
    RR = "RR"
    R = "R"
    FR = "FR"

    @property
    def opposite(self) -> "Direction":
        order = list(Direction)
        return order[(order.index(self) + 4) % 8]


DIRECTIONS = tuple(Direction)
TIE_BREAK = (Direction.F, Direction.FL, Direction.FR, Direction.L,
             Direction.R, Direction.RL, Direction.RR, Direction.B)

DIRECTION_ALIASES = {
    Direction.F: "front",
    Direction.FL: "front-left",
    Direction.L: "left",
    Direction.RL: "rear-left",
    Direction.B: "rear",
    Direction.RR: "rear-right",
    Direction.R: "right",
    Direction.FR: "front-right",
}


class SectorConvention(str, Enum):
    # EDGE: sectors start at the heading, FL = [45, 90).
    # CENTERED: sectors centred on the eight compass directions, F = [-22.5, 22.5].
    EDGE = "edge"
    CENTERED = "centered"


@dataclass(frozen=True)
class GridConfig:
    half_length_fwd: float = 50.0
    half_length_back: float = 30.0
    half_width: float = 10.0
    cell_size: float = 1.0
    max_cells: int = 10_000

    def __post_init__(self):
        for name in ("half_length_fwd", "half_length_back", "half_width", "cell_size"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"grid.{name} must be > 0")

    @property
    def shape(self) -> tuple[int, int]:
        m = int(round((self.half_length_fwd + self.half_length_back) / self.cell_size))
        n = int(round(2.0 * self.half_width / self.cell_size))
        return max(m, 1), max(n, 1)


@dataclass(frozen=True)
class NormalizationConfig:
    reference_energy: float
    mode: str = "MeanOverRoi"

    def __post_init__(self):
        if not self.reference_energy > 0:
            raise ConfigurationError("normalization.reference_energy must be > 0")
        if self.mode != "MeanOverRoi":
            raise ConfigurationError(f"unsupported normalization mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class Grid:
    """Cell centres in the ego frame (``local_x`` forward, ``local_y`` left) and world frame."""

    config: GridConfig
    origin: tuple[float, float]
    heading: tuple[float, float]
    local_x: np.ndarray
    local_y: np.ndarray
    world_x: np.ndarray
    world_y: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.local_x.shape


@dataclass(eq=False)
class RiskMatrix:
    cells: np.ndarray
    centers: np.ndarray                 # (m, n, 2), ego frame
    contributions: np.ndarray | None = field(default=None, repr=False)   # (P, m, n), raw

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]


@dataclass(eq=False)
class RiskMapResult:
    matrix: RiskMatrix
    global_risk: float
    sector_risks: dict[Direction, float]
    dominant: Direction
    raw_global_risk: float = 0.0

    def sector_list(self) -> list[float]:
        return [self.sector_risks[d] for d in DIRECTIONS]


def ego_heading(ego: AgentState, tol_speed: float = 1e-9) -> tuple[float, float]:
    s = ego.speed
    if s < tol_speed:
        return 1.0, 0.0
    return ego.velocity[0] / s, ego.velocity[1] / s


def build_grid(ego: AgentState, cfg: GridConfig, tol_speed: float = 1e-9) -> Grid:
    m, n = cfg.shape
    if m * n > cfg.max_cells:
        raise ConfigurationError(f"grid has {m * n} cells, cap is {cfg.max_cells}")
    cs = cfg.cell_size
    xs = -cfg.half_length_back + (np.arange(m) + 0.5) * cs
    # symmetric construction keeps mirrored columns exact negatives of each other
    ys = (np.arange(n) + 0.5 - n / 2.0) * cs
    lx, ly = np.meshgrid(xs, ys, indexing="ij")
    hx, hy = ego_heading(ego, tol_speed)
    ox, oy = ego.position
    wx = ox + (lx * hx - ly * hy)
    wy = oy + (lx * hy + ly * hx)
    return Grid(cfg, (ox, oy), (hx, hy), lx, ly, wx, wy)


def compute_risk_matrix(grid: Grid, ego: AgentState, participants: Sequence[AgentState],
                        lane: LaneGeometry = NO_LANE, params: ModelParams = DEFAULT_PARAMS) -> RiskMatrix:
    """Evaluate the total field at every cell centre with the ego velocity as query velocity."""
    contribs = np.empty((len(participants),) + grid.shape)
    total = np.zeros(grid.shape)
    for k, source in enumerate(participants):
        contribs[k] = interaction_field_xy(grid.world_x, grid.world_y, ego.velocity, source, params)
        total = total + contribs[k]
    total = total + road_field_y(grid.world_y, ego, lane, params)
    cells = np.maximum(total, 0.0)
    centers = np.stack([grid.local_x, grid.local_y], axis=-1)
    return RiskMatrix(cells, centers, contribs)


def _exact_mean(values: np.ndarray) -> float:
    # correctly rounded sum, so permuted (e.g. mirrored) cell sets give identical means
    return math.fsum(values.ravel().tolist()) / values.size


def raw_global_risk(matrix: RiskMatrix, norm: NormalizationConfig) -> float:
    return _exact_mean(matrix.cells) / norm.reference_energy


def global_risk(matrix: RiskMatrix, norm: NormalizationConfig) -> float:
    return min(max(raw_global_risk(matrix, norm), 0.0), 1.0)


def sector_index(local_x: np.ndarray, local_y: np.ndarray,
                 convention: SectorConvention = SectorConvention.EDGE) -> np.ndarray:
    """Index into ``DIRECTIONS`` for each cell centre; the exact origin maps to F."""
    bearing = np.degrees(np.arctan2(local_y, local_x))
    if SectorConvention(convention) is SectorConvention.CENTERED:
        # round-half-even is odd-symmetric, so mirrored cells land in mirrored sectors
        return np.mod(np.round(bearing / 45.0), 8).astype(int)
    return np.mod(np.floor(np.mod(bearing, 360.0) / 45.0), 8).astype(int)


def sector_risks(matrix: RiskMatrix, grid: Grid,
                 convention: SectorConvention = SectorConvention.EDGE) -> tuple[dict[Direction, float], Direction]:
    idx = sector_index(grid.local_x, grid.local_y, convention)
    values = {}
    for k, d in enumerate(DIRECTIONS):
        members = matrix.cells[idx == k]
        values[d] = _exact_mean(members) if members.size else 0.0
    return values, dominant_direction(values)


def dominant_direction(values: dict[Direction, float]) -> Direction:
    best = TIE_BREAK[0]
    for d in TIE_BREAK[1:]:
        if values[d] > values[best]:
            best = d
    return best


def evaluate_risk_map(ego: AgentState, participants: Sequence[AgentState], lane: LaneGeometry,
                      params: ModelParams, grid_cfg: GridConfig, norm: NormalizationConfig,
                      convention: SectorConvention = SectorConvention.EDGE) -> tuple[RiskMapResult, Grid]:
    grid = build_grid(ego, grid_cfg, params.tol_speed)
    matrix = compute_risk_matrix(grid, ego, participants, lane, params)
    sectors, dom = sector_risks(matrix, grid, convention)
    raw = raw_global_risk(matrix, norm)
    return RiskMapResult(matrix, min(max(raw, 0.0), 1.0), sectors, dom, raw), grid


# --- calibration ---------------------------------------------------------------

CALIBRATION_TARGET = 0.7


def canonical_scene(gap: float = 10.0, speed: float = 10.0, mass: float = 1500.0):
    """Ego at ``speed`` with an oncoming car ``gap`` metres ahead, closing at ``speed``."""
    ego = AgentState("ego", (0.0, 0.0), (speed, 0.0), mass)
    threat = AgentState("threat", (gap, 0.0), (-speed, 0.0), mass)
    return ego, [threat]


def calibrate_reference_energy(params: ModelParams = DEFAULT_PARAMS,
                               grid_cfg: GridConfig = GridConfig()) -> float:
    ego, participants = canonical_scene()
    grid = build_grid(ego, grid_cfg, params.tol_speed)
    matrix = compute_risk_matrix(grid, ego, participants, NO_LANE, params)
    mean = _exact_mean(matrix.cells)
    if not mean > 0 or not math.isfinite(mean):
        raise CalibrationError(f"calibration scene mean energy is {mean}")
    return mean / CALIBRATION_TARGET


# --- export --------------------------------------------------------------------

def write_matrix_csv(path, matrix: RiskMatrix, grid: Grid, t: float | None = None) -> None:
    """Dense row-major CSV; the first line is a ``#`` comment carrying grid metadata."""
    path = Path(path)
    cfg = grid.config
    meta = {
        "rows": matrix.rows, "cols": matrix.cols, "cell_size": cfg.cell_size,
        "x_min": -cfg.half_length_back, "y_min": float(grid.local_y[0, 0] - cfg.cell_size / 2),
        "origin_x": grid.origin[0], "origin_y": grid.origin[1],
        "heading_x": grid.heading[0], "heading_y": grid.heading[1],
    }
    if t is not None:
        meta["t"] = t
    try:
        with path.open("w", newline="") as fh:
            fh.write("# " + ",".join(f"{k}={v!r}" for k, v in meta.items()) + "\n")
            writer = csv.writer(fh)
            for row in matrix.cells:
                writer.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write risk matrix to {path}: {exc}") from exc


def read_matrix_csv(path) -> tuple[dict, np.ndarray]:
    with Path(path).open() as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing metadata header")
        meta = {}
        for item in header[1:].strip().split(","):
            key, value = item.split("=", 1)
            meta[key] = float(value) if key not in ("rows", "cols") else int(value)
        cells = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    return meta, cells
