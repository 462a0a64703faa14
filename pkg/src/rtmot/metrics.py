"""CLEAR MOT evaluation with MOTChallenge-style reporting."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

import numpy as np

from .assoc import optimal_matching
from .core import BoundingBox, iou_matrix
from .errors import EmptyGroundTruth

REPORT_COLUMNS = ("Intv", "Rcll", "Prcn", "FAR", "GT", "MT", "PT", "ML",
                  "FP", "FN", "IDs", "FM", "MOTA", "MOTP")


@dataclass
class GroundTruthTrack:
    gt_id: int
    boxes: dict = field(default_factory=dict)  # frame -> BoundingBox

    def add(self, frame: int, box: BoundingBox) -> None:
        if frame in self.boxes:
            raise ValueError(f"duplicate box for gt {self.gt_id} in frame {frame}")
        self.boxes[frame] = box


@dataclass
class FrameAccumulator:
    g_t: int = 0
    n_hyp: int = 0
    fp_t: int = 0
    fn_t: int = 0
    id_sw_t: int = 0
    matches: list = field(default_factory=list)      # (gt_id, hyp_id, overlap)
    correspondence: dict = field(default_factory=dict)  # gt_id -> hyp_id, this frame


def match_frame(prev_correspondence: dict, gt_boxes: Sequence, hyp_boxes: Sequence,
                overlap_threshold: float = 0.5, last_match: dict | None = None) -> FrameAccumulator:
    """One frame of the CLEAR MOT correspondence protocol.

    ``gt_boxes`` and ``hyp_boxes`` are ``(id, BoundingBox)`` pairs.
    ``prev_correspondence`` is the gt->hyp map of the previous evaluated frame;
    ``last_match`` (gt->hyp of each gt's most recent matched frame, defaults to
    ``prev_correspondence``) decides identity switches and is updated in place.
    """
    if last_match is None:
        last_match = dict(prev_correspondence)
    acc = FrameAccumulator(g_t=len(gt_boxes), n_hyp=len(hyp_boxes))
    gt_index = {g: k for k, (g, _) in enumerate(gt_boxes)}
    hyp_index = {h: k for k, (h, _) in enumerate(hyp_boxes)}
    if gt_boxes and hyp_boxes:
        ov = iou_matrix(np.array([b for _, b in gt_boxes], dtype=float),
                        np.array([b for _, b in hyp_boxes], dtype=float))
    else:
        ov = np.zeros((len(gt_boxes), len(hyp_boxes)))

    used_gt, used_hyp = set(), set()
    pairs = []
    for g, h in prev_correspondence.items():
        gi, hi = gt_index.get(g), hyp_index.get(h)
        if gi is None or hi is None:
            continue
        if ov[gi, hi] >= overlap_threshold:
            pairs.append((gi, hi))
            used_gt.add(gi)
            used_hyp.add(hi)

    free_gt = [k for k in range(len(gt_boxes)) if k not in used_gt]
    free_hyp = [k for k in range(len(hyp_boxes)) if k not in used_hyp]
    if free_gt and free_hyp:
        sub = ov[np.ix_(free_gt, free_hyp)]
        # sub-threshold overlaps are not admissible pairs at all
        sub = np.where(sub >= overlap_threshold, sub, 0.0)
        for a, b in optimal_matching(sub):
            if sub[a, b] >= overlap_threshold:
                pairs.append((free_gt[a], free_hyp[b]))

    for gi, hi in sorted(pairs):
        g, h = gt_boxes[gi][0], hyp_boxes[hi][0]
        prev = last_match.get(g)
        if prev is not None and prev != h:
            acc.id_sw_t += 1
        last_match[g] = h
        acc.correspondence[g] = h
        acc.matches.append((g, h, float(ov[gi, hi])))

    acc.fp_t = acc.n_hyp - len(acc.matches)
    acc.fn_t = acc.g_t - len(acc.matches)
    return acc


def _round1(x: float) -> Decimal:
    return Decimal(repr(float(x))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def _round2(x: float) -> Decimal:
    return Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


@dataclass
class MetricsReport:
    n_frames: int = 0
    n_gt_boxes: int = 0
    n_hyp_boxes: int = 0
    n_matches: int = 0
    overlap_sum: float = 0.0
    FP: int = 0
    FN: int = 0
    IDs: int = 0
    FM: int = 0
    GT: int = 0
    MT: int = 0
    PT: int = 0
    ML: int = 0
    Hz: float = float("nan")

    @property
    def MOTA(self) -> float:
        if self.n_gt_boxes == 0:
            raise EmptyGroundTruth("MOTA is undefined with no ground-truth boxes")
        return (1.0 - (self.FN + self.FP + self.IDs) / self.n_gt_boxes) * 100.0

    @property
    def MOTP(self) -> float:
        return 100.0 * self.overlap_sum / self.n_matches if self.n_matches else 0.0

    @property
    def Rcll(self) -> float:
        return 100.0 * self.n_matches / self.n_gt_boxes if self.n_gt_boxes else 0.0

    @property
    def Prcn(self) -> float:
        denom = self.n_matches + self.FP
        return 100.0 * self.n_matches / denom if denom else 0.0

    @property
    def FAF(self) -> float:
        return self.FP / self.n_frames if self.n_frames else 0.0

    FAR = FAF

    def row(self, interval=1) -> list[str]:
        """Report values formatted in table order (see ``REPORT_COLUMNS``)."""
        return [str(interval), str(_round1(self.Rcll)), str(_round1(self.Prcn)),
                str(_round2(self.FAF)), str(self.GT), str(self.MT), str(self.PT), str(self.ML),
                str(self.FP), str(self.FN), str(self.IDs), str(self.FM),
                str(_round1(self.MOTA)), str(_round1(self.MOTP))]

    @classmethod
    def combine(cls, reports: Iterable["MetricsReport"]) -> "MetricsReport":
        """Pool the raw counts of several sequences (percentages are recomputed)."""
        out = cls()
        frames = 0
        seconds = 0.0
        for r in reports:
            for name in ("n_frames", "n_gt_boxes", "n_hyp_boxes", "n_matches", "overlap_sum",
                         "FP", "FN", "IDs", "FM", "GT", "MT", "PT", "ML"):
                setattr(out, name, getattr(out, name) + getattr(r, name))
            if r.Hz == r.Hz and r.Hz > 0:
                frames += r.n_frames
                seconds += r.n_frames / r.Hz
        out.Hz = frames / seconds if seconds > 0 else float("nan")
        return out


def evaluate(gt: Sequence[GroundTruthTrack], hypotheses: Iterable, overlap_threshold: float = 0.5,
             frames: Iterable[int] | None = None) -> MetricsReport:
    """Score a hypothesis stream against ground truth.

    ``hypotheses`` holds ``(frame, id, box)`` records (e.g. ``TrackedBox``).
    ``frames`` restricts scoring to the given frame indices; by default every
    frame from 1 to the largest frame seen in either input is scored.
    """
    hyp_by_frame = defaultdict(list)
    for frame, hid, box in hypotheses:
        hyp_by_frame[int(frame)].append((hid, box))
    gt_by_frame = defaultdict(list)
    for track in gt:
        for frame, box in track.boxes.items():
            gt_by_frame[frame].append((track.gt_id, box))

    if frames is None:
        last = max([0, *gt_by_frame.keys(), *hyp_by_frame.keys()])
        frames = range(1, last + 1)
    frames = sorted(set(frames))

    report = MetricsReport(n_frames=len(frames))
    prev: dict = {}
    last_match: dict = {}
    present = defaultdict(list)  # gt_id -> [matched?] over the frames it exists in
    for f in frames:
        g = sorted(gt_by_frame.get(f, ()), key=lambda p: p[0])
        h = hyp_by_frame.get(f, [])
        acc = match_frame(prev, g, h, overlap_threshold, last_match)
        prev = acc.correspondence
        report.n_gt_boxes += acc.g_t
        report.n_hyp_boxes += acc.n_hyp
        report.n_matches += len(acc.matches)
        report.overlap_sum += sum(m[2] for m in acc.matches)
        report.FP += acc.fp_t
        report.FN += acc.fn_t
        report.IDs += acc.id_sw_t
        for gid, _ in g:
            present[gid].append(gid in acc.correspondence)

    if report.n_gt_boxes == 0:
        raise EmptyGroundTruth("no ground-truth boxes in the evaluated frames")

    for gid, tracked in present.items():
        report.GT += 1
        coverage = sum(tracked) / len(tracked)
        if coverage >= 0.8:
            report.MT += 1
        elif coverage <= 0.2:
            report.ML += 1
        else:
            report.PT += 1
        report.FM += fragmentations(tracked)
    return report


def fragmentations(tracked: Sequence[bool]) -> int:
    """Number of matched -> unmatched -> matched transitions."""
    count = 0
    seen_match = False
    in_gap = False
    for t in tracked:
        if t:
            if in_gap:
                count += 1
            seen_match = True
            in_gap = False
        elif seen_match:
            in_gap = True
    return count
