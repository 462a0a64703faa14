"""Multi-object tracking by detection, evaluation and frame-rate experiments.

Kalman, particle and stationary predictors, IoU / linear / exponential
association through the Hungarian algorithm, CLEAR MOT evaluation and
frame-rate experiments.
"""
from .assoc import Assignment, CostConfig, SequenceInfo, build_cost_matrix, solve_assignment
from .core import BoundingBox, Detection, Observation, from_observation, iou, to_observation
from .errors import (ConfigError, DegenerateState, EmptyGroundTruth, OutOfOrderFrame, ParseError,
                     RtMotError)
from .metrics import GroundTruthTrack, MetricsReport, evaluate, match_frame
from .tracker import TrackedBox, Tracker, TrackerConfig

__version__ = "0.1.0"

__all__ = [
    "Assignment", "BoundingBox", "ConfigError", "CostConfig", "DegenerateState", "Detection",
    "EmptyGroundTruth", "GroundTruthTrack", "MetricsReport", "Observation", "OutOfOrderFrame",
    "ParseError", "RtMotError", "SequenceInfo", "TrackedBox", "Tracker", "TrackerConfig",
    "build_cost_matrix", "evaluate", "from_observation", "iou", "match_frame",
    "solve_assignment", "to_observation",
]
