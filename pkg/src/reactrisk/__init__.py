"""Runtime risk assessment from energy-based interaction fields."""

from .advisory import (Advisory, EgoControlState, FrameAssessment, Level, ThresholdConfig, adjust_thresholds,
                       assess_frame, classify, compose_command)
from .config import EngineConfig, config_from_dict, load_config
from .core import (CAR, CYCLIST, NO_LANE, PEDESTRIAN, TRUCK, AgentClass, AgentState, ForceVector,
                   LaneGeometry, LaneType, ModelParams, base_risk_energy, elliptical_distance_sq,
                   field_force_at, interaction_field_at, relative_kinematics, road_field_at, total_field_at)
from .errors import CalibrationError, ConfigurationError, InputError, ReactError
from .riskmap import (Direction, GridConfig, NormalizationConfig, SectorConvention, build_grid,
                      calibrate_reference_energy, compute_risk_matrix, evaluate_risk_map, global_risk,
                      sector_risks)
from .trace import Frame, Trace, TraceLabels

__all__ = [name for name in dir() if not name.startswith("_")]
