"""Geometric primitives: boxes, the (cx, cy, s, r) observation and IoU."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateState


class BoundingBox(NamedTuple):
    """Axis-aligned box, top-left origin, y pointing down."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def centre(self) -> tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    def is_valid(self) -> bool:
        return self.w > 0 and self.h > 0


class Observation(NamedTuple):
    cx: float
    cy: float
    s: float
    r: float


class Detection(NamedTuple):
    frame: int
    box: BoundingBox
    confidence: float


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    if iw <= 0:
        return 0.0
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ih <= 0:
        return 0.0
    inter = iw * ih
    # clamp guards rounding when one box contains the other
    return min(1.0, inter / (a.w * a.h + b.w * b.h - inter))


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of two (n, 4) and (m, 4) arrays of (x, y, w, h) rows."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[:, 0], b[:, 1]
    bx2, by2 = bx1 + b[:, 2], by1 + b[:, 3]
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    union = (a[:, 2:3] * a[:, 3:4]) + (b[:, 2] * b[:, 3]) - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    return np.minimum(out, 1.0)


def to_observation(b: BoundingBox) -> Observation:
    return Observation(b.x + b.w / 2.0, b.y + b.h / 2.0, b.w * b.h, b.w / b.h)


def from_observation(o) -> BoundingBox:
    """Inverse of :func:`to_observation`; accepts any 4+ sequence (cx, cy, s, r, ...)."""
    cx, cy, s, r = float(o[0]), float(o[1]), float(o[2]), float(o[3])
    if not (s > 0 and r > 0) or not (math.isfinite(s) and math.isfinite(r)):
        raise DegenerateState(f"cannot build a box from s={s}, r={r}")
    w = math.sqrt(s * r)
    h = math.sqrt(s / r)
    return BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)
