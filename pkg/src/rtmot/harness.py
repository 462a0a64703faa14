"""Frame-rate experiments: subsampling sweeps, real-time skipping and throughput."""
from __future__ import annotations

import csv
import io as _io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

from .assoc import CostConfig
from .errors import ConfigError
from .io import SequenceConfig, load_sequence_config
from .metrics import REPORT_COLUMNS, MetricsReport, evaluate
from .tracker import Tracker, TrackerConfig, TrackedBox

log = logging.getLogger(__name__)

DEFAULT_INTERVALS = (1, 2, 3, 5, 10, 15, 30)

Clock = Callable[[], float]


def subsample(n_frames: int, interval: int) -> list[int]:
    if interval < 1:
        raise ConfigError("sampling interval must be >= 1")
    return list(range(1, n_frames + 1, interval))


@dataclass
class RunRecord:
    labels: dict
    interval: float
    report: Optional[MetricsReport]
    seconds: float = 0.0
    frames_processed: int = 0
    seed: int = 0
    schedule: list = field(default_factory=list)
    durations: list = field(default_factory=list, repr=False)
    error: Optional[str] = None
    results: list = field(default_factory=list, repr=False)

    @property
    def Hz(self) -> float:
        if self.seconds <= 0:
            return math.inf if self.frames_processed else 0.0
        return self.frames_processed / self.seconds

    @property
    def ok(self) -> bool:
        return self.error is None


def _restrict(gt, frames):
    from .metrics import GroundTruthTrack

    keep = set(frames)
    out = []
    for t in gt:
        boxes = {f: b for f, b in t.boxes.items() if f in keep}
        if boxes:
            out.append(GroundTruthTrack(t.gt_id, boxes))
    return out


def track_frames(tracker: Tracker, frames: Sequence[int], detections, clock: Clock = time.perf_counter):
    """Step ``tracker`` over ``frames``; only the ``step`` calls are timed."""
    results: list[TrackedBox] = []
    elapsed = 0.0
    for f in frames:
        dets = detections.get(f, ())
        t0 = clock()
        out = tracker.step(f, dets)
        elapsed += clock() - t0
        results.extend(out)
    return results, elapsed


def _labels(seq_name, source, cfg: TrackerConfig):
    return {"sequence": seq_name, "detections": source, "predictor": cfg.predictor_kind,
            "cost": cfg.cost_config.measure}


def run_once(seq: SequenceConfig, cfg: TrackerConfig, interval: int = 1, source: str = "det",
             clock: Clock = time.perf_counter) -> RunRecord:
    detections = seq.load_detections(source)
    gt = seq.load_ground_truth() if seq.gt_path else None
    frames = subsample(seq.info.frame_count, interval)
    tracker = Tracker(cfg, seq.info)
    results, seconds = track_frames(tracker, frames, detections, clock)
    report = None
    if gt is not None:
        report = evaluate(_restrict(gt, frames), results, frames=frames)
    rec = RunRecord(_labels(seq.info.name, source, cfg), interval, report, seconds,
                    len(frames), cfg.seed, schedule=frames, results=results)
    if report is not None:
        report.Hz = rec.Hz
    return rec


def realtime_schedule(n_frames: int, capture_fps: float, cost: Callable[[int], float]) -> list[int]:
    """Frames picked when each frame's processing must finish before the next is taken.

    ``cost(frame)`` returns the seconds spent on that frame; the next processed
    frame is ``ceil(cost * capture_fps)`` frames later (at least one).
    """
    if capture_fps <= 0:
        raise ConfigError("capture_fps must be positive")
    frames = []
    f = 1
    while f <= n_frames:
        frames.append(f)
        d = cost(f)
        # tolerance keeps exactly-representable products (1/30 s at 30 FPS) from rounding up
        f += max(1, math.ceil(d * capture_fps - 1e-9))
    return frames


def simulate_realtime(seq: SequenceConfig, cfg: TrackerConfig, capture_fps: float | None = None,
                      cost_model: Union[str, float] = "measured", source: str = "det",
                      detector_cost: float = 0.0, clock: Clock = time.perf_counter) -> RunRecord:
    """Track as if frames kept arriving while the previous one was processed.

    ``cost_model`` is ``"measured"`` (tracker wall time plus ``detector_cost``)
    or a fixed number of seconds per frame.
    """
    fps = capture_fps if capture_fps is not None else seq.info.frame_rate
    if fps <= 0:
        raise ConfigError("capture_fps must be positive")
    detections = seq.load_detections(source)
    gt = seq.load_ground_truth() if seq.gt_path else None
    tracker = Tracker(cfg, seq.info)
    results: list[TrackedBox] = []
    durations: list[float] = []
    elapsed = 0.0

    def cost(frame):
        nonlocal elapsed
        t0 = clock()
        results.extend(tracker.step(frame, detections.get(frame, ())))
        d = clock() - t0
        elapsed += d
        d = d + detector_cost if cost_model == "measured" else float(cost_model)
        durations.append(d)
        return d

    if cost_model != "measured":
        try:
            if float(cost_model) < 0:
                raise ValueError
        except (TypeError, ValueError):
            raise ConfigError(f"cost model must be 'measured' or a non-negative number, got {cost_model!r}")
    frames = realtime_schedule(seq.info.frame_count, fps, cost)
    report = evaluate(_restrict(gt, frames), results, frames=frames) if gt is not None else None
    gaps = [b - a for a, b in zip(frames, frames[1:])]
    mean_interval = sum(gaps) / len(gaps) if gaps else float(max(1, math.ceil(durations[0] * fps - 1e-9)))
    rec = RunRecord(_labels(seq.info.name, source, cfg), mean_interval, report, elapsed, len(frames),
                    cfg.seed, schedule=frames, durations=durations, results=results)
    if report is not None:
        report.Hz = rec.Hz
    return rec


@dataclass
class RunSpec:
    detections: str = "det"
    predictor: str = "kalman"
    cost: str = "iou"

    @property
    def label(self) -> str:
        return f"{self.detections}_{self.predictor}_{self.cost}"


@dataclass
class SweepConfig:
    intervals: list = field(default_factory=lambda: list(DEFAULT_INTERVALS))
    configurations: list = field(default_factory=lambda: [RunSpec()])
    sequences: list = field(default_factory=list)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)

    def validate(self) -> None:
        if not self.intervals or not self.configurations or not self.sequences:
            raise ConfigError("sweep needs at least one interval, configuration and sequence")
        if any(int(i) != i or i < 1 for i in self.intervals):
            raise ConfigError("every sampling interval must be an integer >= 1")


def load_sweep_config(path: str) -> SweepConfig:
    """Read a JSON sweep description.

    ``{"intervals": [...], "sequences": ["seq.ini", ...],
    "configurations": [{"detections": "det", "predictor": "kalman", "cost": "iou"}],
    "tracker": {"conf": 0.4, "max_age": 1, "min_hits": 3, "seed": 0}}``
    """
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))
    seqs = []
    for p in raw.get("sequences", []):
        seqs.append(load_sequence_config(p if os.path.isabs(p) else os.path.join(base, p)))
    confs = [RunSpec(**c) for c in raw.get("configurations", [{}])]
    t = raw.get("tracker", {})
    tracker = TrackerConfig(confidence_threshold=float(t.get("conf", 0.4)),
                            max_age=int(t.get("max_age", 1)),
                            min_hit_streak=int(t.get("min_hits", 3)),
                            seed=int(t.get("seed", 0)))
    cfg = SweepConfig(list(raw.get("intervals", DEFAULT_INTERVALS)), confs, seqs, tracker)
    cfg.validate()
    return cfg


def _run_cell(args) -> RunRecord:
    run_spec, interval, sequences, base_cfg = args
    cfg = replace(base_cfg, predictor_kind=run_spec.predictor, cost_config=CostConfig(run_spec.cost))
    labels = {"detections": run_spec.detections, "predictor": run_spec.predictor, "cost": cfg.cost_config.measure}
    try:
        cfg.validate()
        records = [run_once(seq, cfg, interval, run_spec.detections) for seq in sequences]
        if any(r.report is None for r in records):
            raise ConfigError("every sweep sequence needs ground truth")
        report = MetricsReport.combine(r.report for r in records)
        return RunRecord(labels, interval, report, sum(r.seconds for r in records),
                         sum(r.frames_processed for r in records), cfg.seed)
    except Exception as exc:  # recorded, the sweep carries on
        log.error("run %s interval %s failed: %s", labels, interval, exc)
        return RunRecord(labels, interval, None, seed=cfg.seed, error=f"{type(exc).__name__}: {exc}")


def sweep(cfg: SweepConfig, jobs: int = 1) -> list[RunRecord]:
    """Every configuration at every interval, pooled over the configured sequences."""
    cfg.validate()
    cells = [(run_spec, int(i), cfg.sequences, cfg.tracker) for run_spec in cfg.configurations for i in cfg.intervals]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(c) for c in cells]


def report_csv(records: Sequence[RunRecord]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in records:
        if r.ok and r.report is not None:
            writer.writerow(r.report.row(_format_interval(r.interval)))
    return buf.getvalue()


def _format_interval(i) -> str:
    return str(int(i)) if float(i).is_integer() else f"{i:g}"


def write_sweep(records: Sequence[RunRecord], outdir: str, cfg: SweepConfig | None = None,
                flags: dict | None = None) -> list[str]:
    """One CSV per (detections, predictor, cost) plus ``manifest.jsonl``."""
    os.makedirs(outdir, exist_ok=True)
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        key = f"{r.labels['detections']}_{r.labels['predictor']}_{r.labels['cost']}"
        groups.setdefault(key, []).append(r)
    written = []
    for key, recs in groups.items():
        path = os.path.join(outdir, f"{key}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(report_csv(recs))
        written.append(path)
    manifest = os.path.join(outdir, "manifest.jsonl")
    with open(manifest, "w", encoding="utf-8") as fh:
        for r in records:
            line = dict(r.labels, interval=r.interval, seed=r.seed,
                        outcome="ok" if r.ok else f"error: {r.error}")
            if flags:
                line["flags"] = flags
            fh.write(json.dumps(line, sort_keys=True) + "\n")
    written.append(manifest)
    return written
