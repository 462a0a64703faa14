"""Synthetic ground-truth sequences for tests, benchmarks and demos.

Run ``python -m rtmot.synthetic OUTDIR`` to write a small sequence
(``seq.ini``, ``det.txt``, ``gt.txt``) usable with the command line tool.
"""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass

import numpy as np

from .assoc import SequenceInfo
from .core import BoundingBox
from .metrics import GroundTruthTrack


@dataclass
class SyntheticSequence:
    info: SequenceInfo
    gt: list

    def detections_text(self, confidence: float = 1.0) -> str:
        rows = []
        for frame, gid, box in sorted(self.rows()):
            rows.append(f"{frame},-1,{box.x:.6f},{box.y:.6f},{box.w:.6f},{box.h:.6f},{confidence:g}\n")
        return "".join(rows)

    def gt_text(self) -> str:
        return "".join(f"{frame},{gid},{box.x:.6f},{box.y:.6f},{box.w:.6f},{box.h:.6f},1,-1,-1,-1\n"
                       for frame, gid, box in sorted(self.rows(), key=lambda r: (r[0], r[1])))

    def rows(self):
        for track in self.gt:
            for frame, box in track.boxes.items():
                yield frame, track.gt_id, box

    def write(self, outdir: str) -> str:
        """Write det.txt, gt.txt and seq.ini into ``outdir``; returns the seq.ini path."""
        from .io import write_sequence_config

        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "det.txt"), "w") as fh:
            fh.write(self.detections_text())
        with open(os.path.join(outdir, "gt.txt"), "w") as fh:
            fh.write(self.gt_text())
        path = os.path.join(outdir, "seq.ini")
        write_sequence_config(path, self.info, det_file="det.txt", gt_file="gt.txt")
        return path


def _tracks_from_paths(starts, velocities, sizes, n_frames, rng, jitter):
    gt = []
    t = np.arange(n_frames, dtype=float)[:, None]
    for k, (p0, v, (w, h)) in enumerate(zip(starts, velocities, sizes), 1):
        centres = p0 + t * v + rng.normal(0.0, jitter, (n_frames, 2))
        track = GroundTruthTrack(k)
        for f in range(n_frames):
            cx, cy = centres[f]
            track.boxes[f + 1] = BoundingBox(float(cx - w / 2), float(cy - h / 2), float(w), float(h))
        gt.append(track)
    return gt


def linear_motion(n_objects: int = 10, n_frames: int = 300, seed: int = 0,
                  jitter: float = 0.5, width: int = 1920, height: int = 1080) -> SyntheticSequence:
    """Objects in separate horizontal lanes moving at constant velocity plus jitter."""
    rng = np.random.default_rng(seed)
    lane = height / n_objects
    sizes = [(rng.uniform(30, 50), min(rng.uniform(60, 90), 0.8 * lane)) for _ in range(n_objects)]
    speeds = rng.uniform(0.5, 2.5, n_objects) * rng.choice([-1, 1], n_objects)
    starts, velocities = [], []
    for k in range(n_objects):
        vx = speeds[k]
        vy = rng.uniform(-0.05, 0.05)
        travel = abs(vx) * n_frames
        x0 = rng.uniform(60, width - 60 - travel)
        if vx < 0:
            x0 += travel
        starts.append(np.array([x0, lane * (k + 0.5)]))
        velocities.append(np.array([vx, vy]))
    gt = _tracks_from_paths(starts, velocities, sizes, n_frames, rng, jitter)
    info = SequenceInfo(width, height, 30.0, n_frames, f"linear-{seed}")
    return SyntheticSequence(info, gt)


def crossing_paths(n_pairs: int = 5, n_frames: int = 300, seed: int = 0, jitter: float = 0.5,
                   width: int = 1920, height: int = 1080) -> SyntheticSequence:
    """Pairs of objects walking towards each other whose paths cross mid-sequence."""
    rng = np.random.default_rng(seed)
    starts, velocities, sizes = [], [], []
    lane = height / n_pairs
    for k in range(n_pairs):
        speed = rng.uniform(1.5, 3.0)
        meet_x = width / 2 + rng.uniform(-200, 200)
        meet_t = n_frames / 2 + rng.uniform(-40, 40)
        y = lane * (k + 0.5)
        # slight vertical drift in opposite senses so the boxes sweep across each other
        dy = rng.uniform(0.05, 0.15)
        for sign in (1, -1):
            v = np.array([sign * speed, -sign * dy])
            starts.append(np.array([meet_x, y]) - meet_t * v)
            velocities.append(v)
            sizes.append((rng.uniform(30, 45), rng.uniform(70, 90)))
    gt = _tracks_from_paths(starts, velocities, sizes, n_frames, rng, jitter)
    info = SequenceInfo(width, height, 30.0, n_frames, f"crossing-{seed}")
    return SyntheticSequence(info, gt)


def bouncing_load(n_objects: int = 10, n_frames: int = 5000, seed: int = 0,
                  width: int = 1920, height: int = 1080) -> SyntheticSequence:
    """Long sequence of objects bouncing inside the image; a throughput workload."""
    rng = np.random.default_rng(seed)
    gt = []
    for k in range(1, n_objects + 1):
        w, h = rng.uniform(30, 60), rng.uniform(60, 120)
        pos = np.array([rng.uniform(w, width - w), rng.uniform(h, height - h)])
        vel = rng.uniform(-3, 3, 2)
        track = GroundTruthTrack(k)
        for f in range(1, n_frames + 1):
            pos = pos + vel
            for axis, extent, half in ((0, width, w / 2), (1, height, h / 2)):
                if pos[axis] < half or pos[axis] > extent - half:
                    vel[axis] = -vel[axis]
                    pos[axis] = min(max(pos[axis], half), extent - half)
            track.boxes[f] = BoundingBox(float(pos[0] - w / 2), float(pos[1] - h / 2), float(w), float(h))
        gt.append(track)
    return SyntheticSequence(SequenceInfo(width, height, 30.0, n_frames, f"load-{seed}"), gt)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m rtmot.synthetic OUTDIR", file=sys.stderr)
        return 1
    path = crossing_paths().write(argv[0])
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
