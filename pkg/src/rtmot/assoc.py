"""Cost matrices, the Hungarian solver and threshold gating.

Every measure is a *similarity*: higher means a better match, so one
maximising solver serves all three.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import BoundingBox, iou_matrix
from .errors import ConfigError

MEASURES = ("iou", "linear", "exp")
DEFAULT_THRESHOLDS = {"iou": 0.3, "linear": 10000.0, "exp": 0.5}
_ALIASES = {"exponential": "exp", "lin": "linear"}


@dataclass(frozen=True)
class CostConfig:
    measure: str = "iou"
    threshold: float = None  # type: ignore[assignment]
    w1: float = 0.5
    w2: float = 1.5
    linear_cap: float = 1e12

    def __post_init__(self):
        measure = _ALIASES.get(self.measure.lower(), self.measure.lower())
        if measure not in MEASURES:
            raise ConfigError(f"unknown cost measure {self.measure!r}; expected one of {MEASURES}")
        object.__setattr__(self, "measure", measure)
        if self.threshold is None:
            object.__setattr__(self, "threshold", DEFAULT_THRESHOLDS[measure])
        if not math.isfinite(self.threshold):
            raise ConfigError("threshold must be finite")
        if self.w1 <= 0 or self.w2 <= 0:
            raise ConfigError("w1 and w2 must be positive")
        if not self.linear_cap > self.threshold:
            raise ConfigError("linear_cap must exceed the threshold")


@dataclass(frozen=True)
class SequenceInfo:
    image_width: float
    image_height: float
    frame_rate: float = 30.0
    frame_count: int = 1
    name: str = ""

    def __post_init__(self):
        if min(self.image_width, self.image_height, self.frame_rate) <= 0 or self.frame_count <= 0:
            raise ConfigError("sequence width, height, frame rate and frame count must be positive")

    @property
    def q_dist(self) -> float:
        return math.hypot(self.image_width, self.image_height)

    @property
    def q_shp(self) -> float:
        return self.image_width * self.image_height


@dataclass
class Assignment:
    matches: list = field(default_factory=list)
    unmatched_predictions: list = field(default_factory=list)
    unmatched_detections: list = field(default_factory=list)


def cost_iou(a: BoundingBox, b: BoundingBox) -> float:
    from .core import iou
    return iou(a, b)


def cost_linear(a: BoundingBox, b: BoundingBox, info: SequenceInfo, cfg: CostConfig) -> float:
    ax, ay = a.x + a.w / 2.0, a.y + a.h / 2.0
    bx, by = b.x + b.w / 2.0, b.y + b.h / 2.0
    d_centre = math.hypot(ax - bx, ay - by)
    d_shape = math.hypot(a.h - b.h, a.w - b.w)
    if d_centre == 0 or d_shape == 0:
        return cfg.linear_cap
    return min(cfg.linear_cap, (info.q_dist / d_centre) * (info.q_shp / d_shape))


def cost_exponential(a: BoundingBox, b: BoundingBox, cfg: CostConfig) -> float:
    """``a`` is the detection: offsets are normalised by its width and height."""
    ax, ay = a.x + a.w / 2.0, a.y + a.h / 2.0
    bx, by = b.x + b.w / 2.0, b.y + b.h / 2.0
    dist = ((ax - bx) / a.w) ** 2 + ((ay - by) / a.h) ** 2
    shp = abs(a.h - b.h) / (a.h + b.h) + abs(a.w - b.w) / (a.w + b.w)
    return math.exp(-cfg.w1 * dist) * math.exp(-cfg.w2 * shp)


def _as_array(boxes) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        return boxes.reshape(-1, 4).astype(float, copy=False)
    return np.array([tuple(b) for b in boxes], dtype=float).reshape(-1, 4)


def build_cost_matrix(predictions: Sequence[BoundingBox], detections: Sequence[BoundingBox],
                      info: SequenceInfo | None, cfg: CostConfig) -> np.ndarray:
    """Similarity grid, rows are predictions and columns detections."""
    P = _as_array(predictions)
    D = _as_array(detections)
    if len(P) == 0 or len(D) == 0:
        return np.zeros((len(P), len(D)))
    if cfg.measure == "iou":
        return iou_matrix(P, D)

    pc = P[:, :2] + P[:, 2:] / 2.0
    dc = D[:, :2] + D[:, 2:] / 2.0
    dx = pc[:, None, 0] - dc[None, :, 0]
    dy = pc[:, None, 1] - dc[None, :, 1]
    if cfg.measure == "linear":
        if info is None:
            raise ConfigError("the linear measure needs sequence image dimensions")
        d_centre = np.hypot(dx, dy)
        d_shape = np.hypot(P[:, None, 3] - D[None, :, 3], P[:, None, 2] - D[None, :, 2])
        zero = (d_centre == 0) | (d_shape == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (info.q_dist / d_centre) * (info.q_shp / d_shape)
        out = np.where(zero, cfg.linear_cap, np.minimum(out, cfg.linear_cap))
        return out

    # exponential: the detection (column) supplies the normalising width and height
    dw = D[None, :, 2]
    dh = D[None, :, 3]
    dist = (dx / dw) ** 2 + (dy / dh) ** 2
    pw = P[:, None, 2]
    ph = P[:, None, 3]
    shp = np.abs(dh - ph) / (dh + ph) + np.abs(dw - pw) / (dw + pw)
    return np.exp(-cfg.w1 * dist) * np.exp(-cfg.w2 * shp)


def hungarian(cost: list[list[float]]):
    """Minimum-cost perfect matching of a square matrix.

    Shortest-augmenting-path Kuhn-Munkres with row/column potentials, O(n^3).
    Returns ``(row_to_col, u, v)`` where ``cost[i][j] - u[i] - v[j] >= 0``
    everywhere and is zero on the matching.
    """
    n = len(cost)
    INF = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = [0] * n
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:], v[1:]


def _lex_smallest(cost, row_to_col, u, v, tol):
    """Lexicographically smallest perfect matching among the optimal ones.

    Every optimal matching lives on the tight edges of the dual solution, so
    rows are fixed in order to their smallest tight column that still admits a
    perfect matching of the remaining rows (checked by one alternating path).
    """
    n = len(cost)
    tight = [[j for j in range(n) if cost[i][j] - u[i] - v[j] <= tol] for i in range(n)]
    r2c = list(row_to_col)
    c2r = [0] * n
    for i, j in enumerate(r2c):
        c2r[j] = i
    fixed_col = [False] * n

    for i in range(n):
        for j in tight[i]:
            if j >= r2c[i]:
                break
            if fixed_col[j]:
                continue
            k = c2r[j]
            free_col = r2c[i]
            seen = [False] * n
            seen[j] = True
            path = []

            def dfs(r):
                for c in tight[r]:
                    if seen[c] or fixed_col[c]:
                        continue
                    seen[c] = True
                    if c == free_col or dfs(c2r[c]):
                        path.append((r, c))
                        return True
                return False

            if dfs(k):
                for r, c in path:
                    r2c[r] = c
                    c2r[c] = r
                r2c[i] = j
                c2r[j] = i
                break
        fixed_col[r2c[i]] = True
    return r2c


def optimal_matching(values) -> list[tuple[int, int]]:
    """Maximum-total one-to-one matching of a rectangular similarity matrix.

    The matrix is padded square with zero similarity; padded pairs are dropped.
    Ties go to the lexicographically smallest row-to-column sequence.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("similarity matrix must be two-dimensional")
    n_rows, n_cols = values.shape
    if n_rows == 0 or n_cols == 0:
        return []
    n = max(n_rows, n_cols)
    padded = np.zeros((n, n))
    padded[:n_rows, :n_cols] = -values
    cost = padded.tolist()
    row_to_col, u, v = hungarian(cost)
    scale = max(1.0, float(np.abs(values).max()))
    lex = _lex_smallest(cost, row_to_col, u, v, 1e-12 * scale)
    # fall back if rounding in the tight set ever admitted a worse matching
    if sum(cost[i][lex[i]] for i in range(n)) > sum(cost[i][row_to_col[i]] for i in range(n)) + 1e-13 * scale:
        lex = row_to_col
    return [(i, j) for i, j in enumerate(lex) if i < n_rows and j < n_cols]


def gate(values, pairs, threshold: float) -> Assignment:
    """Reject matched pairs whose similarity is below ``threshold``."""
    values = np.asarray(values, dtype=float)
    n_rows, n_cols = values.shape if values.ndim == 2 else (0, 0)
    matches = [(i, j) for i, j in pairs if values[i, j] >= threshold]
    rows = {i for i, _ in matches}
    cols = {j for _, j in matches}
    return Assignment(
        matches=matches,
        unmatched_predictions=[i for i in range(n_rows) if i not in rows],
        unmatched_detections=[j for j in range(n_cols) if j not in cols],
    )


def solve_assignment(values, cfg_or_threshold) -> Assignment:
    """Optimal matching followed by threshold gating."""
    threshold = getattr(cfg_or_threshold, "threshold", cfg_or_threshold)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        values = values.reshape(0, 0)
    return gate(values, optimal_matching(values), threshold)
