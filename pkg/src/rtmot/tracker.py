"""The tracking-by-detection main loop."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .assoc import CostConfig, SequenceInfo, build_cost_matrix, solve_assignment
from .core import BoundingBox, Detection, to_observation
from .errors import ConfigError, OutOfOrderFrame
from .predict import (KalmanModel, KalmanPredictor, ParticleConfig, ParticlePredictor,
                      Predictor, StationaryPredictor)

PREDICTORS = ("kalman", "stationary", "particle")


@dataclass
class TrackerConfig:
    confidence_threshold: float = 0.4
    max_age: int = 1
    min_hit_streak: int = 3
    predictor_kind: str = "kalman"
    cost_config: CostConfig = field(default_factory=CostConfig)
    kalman_model: KalmanModel = field(default_factory=KalmanModel)
    particle_config: ParticleConfig = field(default_factory=ParticleConfig)
    seed: int = 0
    # scale the motion model's time step by the gap between processed frames
    dt_scales_with_interval: bool = False

    def validate(self) -> None:
        if self.max_age < 0:
            raise ConfigError("max_age must be >= 0")
        if self.min_hit_streak < 1:
            raise ConfigError("min_hit_streak must be >= 1")
        if self.predictor_kind not in PREDICTORS:
            raise ConfigError(f"unknown predictor {self.predictor_kind!r}; expected one of {PREDICTORS}")


class TrackedBox(NamedTuple):
    frame: int
    id: int
    box: BoundingBox


@dataclass
class Track:
    id: int
    predictor: Predictor
    hit_streak: int = 1
    time_since_update: int = 0
    age: int = 1


class Tracker:
    def __init__(self, cfg: TrackerConfig | None = None, info: SequenceInfo | None = None):
        self.cfg = cfg if cfg is not None else TrackerConfig()
        self.cfg.validate()
        self.info = info
        self.tracks: list[Track] = []
        self._ids = itertools.count(1)
        self._last_frame = None
        self._seeds = np.random.SeedSequence(self.cfg.seed)

    def _new_predictor(self, box: BoundingBox) -> Predictor:
        kind = self.cfg.predictor_kind
        if kind == "kalman":
            return KalmanPredictor(box, self.cfg.kalman_model)
        if kind == "stationary":
            return StationaryPredictor(box)
        rng = np.random.default_rng(self._seeds.spawn(1)[0])
        return ParticlePredictor(box, self.cfg.particle_config, rng)

    def step(self, frame_index: int, detections: Iterable[Detection]) -> list[TrackedBox]:
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise OutOfOrderFrame(f"frame {frame_index} after frame {self._last_frame}")
        dt = 1.0
        if self.cfg.dt_scales_with_interval and self._last_frame is not None:
            dt = float(frame_index - self._last_frame)
        self._last_frame = frame_index

        threshold = self.cfg.confidence_threshold
        dets = [d.box for d in detections if not d.confidence < threshold]

        predicted = [t.predictor.predict(dt) for t in self.tracks]
        sim = build_cost_matrix(predicted, dets, self.info, self.cfg.cost_config)
        assignment = solve_assignment(sim, self.cfg.cost_config)

        for ti, di in assignment.matches:
            track = self.tracks[ti]
            track.predictor.update(to_observation(dets[di]))
            track.time_since_update = 0
            track.hit_streak += 1
            track.age += 1
        for ti in assignment.unmatched_predictions:
            track = self.tracks[ti]
            track.predictor.propagate()
            track.time_since_update += 1
            track.hit_streak = 0
            track.age += 1

        for di in assignment.unmatched_detections:
            self.tracks.append(Track(next(self._ids), self._new_predictor(dets[di])))

        max_age = self.cfg.max_age
        self.tracks = [t for t in self.tracks if t.time_since_update <= max_age]

        min_hits = self.cfg.min_hit_streak
        return [TrackedBox(frame_index, t.id, t.predictor.box())
                for t in self.tracks
                if t.time_since_update == 0 and t.hit_streak >= min_hits]


def tracker_new(cfg: TrackerConfig | None = None, info: SequenceInfo | None = None) -> Tracker:
    return Tracker(cfg, info)


def run_tracker(tracker: Tracker, frames: Iterable[int], detections_by_frame) -> list[TrackedBox]:
    out: list[TrackedBox] = []
    for f in frames:
        out.extend(tracker.step(f, detections_by_frame.get(f, ())))
    return out
