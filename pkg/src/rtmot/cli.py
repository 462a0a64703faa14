"""Command line entry point: ``rtmot {track,eval,sweep,simulate}``.

Exit codes: 0 success, 1 usage error, 2 data error. Set ``RT_MOT_LOG`` to a
logging level name (DEBUG, INFO, ...) for more diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from .assoc import CostConfig, SequenceInfo
from .errors import ConfigError, RtMotError
from .harness import load_sweep_config, simulate_realtime, subsample, sweep, track_frames, write_sweep
from .io import SequenceConfig, load_sequence_config, parse_ground_truth, parse_results, write_results
from .metrics import REPORT_COLUMNS, evaluate
from .tracker import PREDICTORS, Tracker, TrackerConfig

log = logging.getLogger("rtmot")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _tracker_flags(p):
    p.add_argument("--predictor", choices=PREDICTORS, default="kalman")
    p.add_argument("--cost", choices=("iou", "linear", "exp"), default="iou")
    p.add_argument("--conf", type=float, default=0.4, help="detection confidence threshold")
    p.add_argument("--max-age", type=int, default=1)
    p.add_argument("--min-hits", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)


def _seq_flags(p, need_gt=False):
    p.add_argument("--seq", help="sequence config (key=value: name, imWidth, imHeight, frameRate, "
                                 "seqLength, detFile, gtFile)")
    p.add_argument("--det", help="detection file (overrides the sequence's detFile)")
    p.add_argument("--gt", help="ground-truth file (overrides the sequence's gtFile)")
    p.add_argument("--use-gt", action="store_true", help="feed ground-truth boxes as detections")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtmot", description="Real-time tracking-by-detection experiments.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("track", help="track one sequence and write MOT results")
    _seq_flags(p)
    _tracker_flags(p)
    p.add_argument("--interval", type=int, default=1)
    p.add_argument("--out", required=True, help="result file")

    p = sub.add_parser("eval", help="score a result file against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--res", required=True)
    p.add_argument("--seq", help="sequence config; its seqLength fixes the scored frame range")
    p.add_argument("--interval", type=int, default=1)
    p.add_argument("--iou", type=float, default=0.5, help="overlap threshold for a match")

    p = sub.add_parser("sweep", help="run a sweep described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory for CSV tables and the manifest")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("simulate", help="real-time frame-skipping simulation")
    _seq_flags(p)
    _tracker_flags(p)
    p.add_argument("--capture-fps", type=float, help="capture rate (default: the sequence frameRate)")
    p.add_argument("--fixed-cost", type=float,
                   help="seconds per processed frame; measured tracker time when omitted")
    p.add_argument("--detector-cost", type=float, default=0.0,
                   help="seconds added to each measured frame")
    p.add_argument("--out", help="optional result file")
    return parser


def _tracker_config(args) -> TrackerConfig:
    try:
        cfg = TrackerConfig(confidence_threshold=args.conf, max_age=args.max_age,
                            min_hit_streak=args.min_hits, predictor_kind=args.predictor,
                            cost_config=CostConfig(args.cost), seed=args.seed)
        cfg.validate()
    except ConfigError as exc:
        raise UsageError(f"rtmot: {exc}") from None
    return cfg


def _sequence(args) -> SequenceConfig:
    if args.seq:
        seq = load_sequence_config(args.seq)
    elif args.det or args.gt:
        seq = SequenceConfig(None, None, SequenceInfo(1, 1))
    else:
        raise UsageError("one of --seq or --det is required")
    if args.det:
        seq.det_path = args.det
    if args.gt:
        seq.gt_path = args.gt
    if args.use_gt:
        seq.use_gt_as_detections = True
    if not args.seq:
        # no sequence file: take image extent and length from the boxes themselves
        dets = seq.load_detections()
        boxes = [d.box for frame in dets.by_frame.values() for d in frame]
        width = max([b.x + b.w for b in boxes], default=1.0)
        height = max([b.y + b.h for b in boxes], default=1.0)
        seq.info = SequenceInfo(max(width, 1.0), max(height, 1.0), 30.0, max(dets.last_frame, 1), "sequence")
    return seq


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _print_report(rows, out=None):
    writer = csv.writer(out or sys.stdout, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow(row)


def cmd_track(args) -> int:
    cfg = _tracker_config(args)
    seq = _sequence(args)
    detections = seq.load_detections()
    frames = subsample(seq.info.frame_count, args.interval)
    results, seconds = track_frames(Tracker(cfg, seq.info), frames, detections)
    _write_text(args.out, write_results(results))
    hz = len(frames) / seconds if seconds > 0 else float("inf")
    log.info("tracked %d frames of %s at %.1f Hz", len(frames), seq.info.name, hz)
    print(f"{seq.info.name}: {len(frames)} frames, {len(results)} boxes, {hz:.1f} Hz", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    with open(args.gt, "rb") as fh:
        gt = parse_ground_truth(fh, args.gt)
    with open(args.res, "rb") as fh:
        res = parse_results(fh, args.res)
    frames = None
    if args.seq:
        frames = subsample(load_sequence_config(args.seq).info.frame_count, args.interval)
    elif args.interval != 1:
        last = max([f for t in gt for f in t.boxes] + [r[0] for r in res])
        frames = subsample(last, args.interval)
    if frames is not None:
        keep = set(frames)
        for t in gt:
            t.boxes = {f: b for f, b in t.boxes.items() if f in keep}
        res = [r for r in res if r[0] in keep]
    report = evaluate(gt, res, overlap_threshold=args.iou, frames=frames)
    _print_report([report.row(args.interval)])
    return 0


def cmd_sweep(args) -> int:
    cfg = load_sweep_config(args.config)
    records = sweep(cfg, jobs=max(1, args.jobs))
    flags = {"conf": cfg.tracker.confidence_threshold, "max_age": cfg.tracker.max_age,
             "min_hits": cfg.tracker.min_hit_streak, "seed": cfg.tracker.seed,
             "intervals": list(cfg.intervals), "jobs": args.jobs}
    for path in write_sweep(records, args.out, cfg, flags):
        log.info("wrote %s", path)
    for r in records:
        status = f"{r.Hz:.1f} Hz" if r.ok else r.error
        print(f"{r.labels['detections']}\t{r.labels['predictor']}\t{r.labels['cost']}\t"
              f"interval={r.interval}\t{status}")
    return 0 if all(r.ok for r in records) else 2


def cmd_simulate(args) -> int:
    cfg = _tracker_config(args)
    seq = _sequence(args)
    cost = "measured" if args.fixed_cost is None else args.fixed_cost
    rec = simulate_realtime(seq, cfg, args.capture_fps, cost, detector_cost=args.detector_cost)
    if args.out:
        _write_text(args.out, write_results(rec.results))
    print(f"mean_interval={rec.interval:g} frames_processed={rec.frames_processed}", file=sys.stderr)
    if rec.report is not None:
        _print_report([rec.report.row(f"{rec.interval:g}")])
    else:
        print(f"mean_interval,{rec.interval:g}")
    return 0


COMMANDS = {"track": cmd_track, "eval": cmd_eval, "sweep": cmd_sweep, "simulate": cmd_simulate}


def _setup_logging():
    level = os.environ.get("RT_MOT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (RtMotError, OSError) as exc:
        print(f"rtmot: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
