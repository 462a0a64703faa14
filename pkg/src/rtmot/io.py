"""MOTChallenge text formats: detections, ground truth, results and sequence configs."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

from .assoc import SequenceInfo
from .core import BoundingBox, Detection
from .errors import ConfigError, ParseError
from .metrics import GroundTruthTrack

log = logging.getLogger(__name__)

TextSource = Union[str, Iterable[str], IO[str], IO[bytes]]


@dataclass
class DetectionFile:
    """Detections grouped by frame; missing frames read as empty lists."""

    by_frame: dict = field(default_factory=dict)
    dropped: int = 0

    def get(self, frame: int, default=None) -> list:
        found = self.by_frame.get(frame)
        if found is None:
            return [] if default is None else default
        return found

    def __getitem__(self, frame: int) -> list:
        return self.by_frame.get(frame, [])

    @property
    def frames(self) -> list[int]:
        return sorted(self.by_frame)

    @property
    def last_frame(self) -> int:
        return max(self.by_frame, default=0)

    def total(self) -> int:
        return sum(len(v) for v in self.by_frame.values())


def _lines(source: TextSource, path=None):
    if isinstance(source, str):
        source = source.splitlines()
    for lineno, line in enumerate(source, 1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8: {exc.reason}", lineno, path) from None
        yield lineno, line


def _fields(line: str, lineno: int, path, minimum: int = 7):
    parts = [p.strip() for p in line.replace("\t", ",").split(",")]
    if len(parts) < minimum:
        raise ParseError(f"expected at least {minimum} comma-separated fields, got {len(parts)}", lineno, path)
    values = []
    for k, p in enumerate(parts[:minimum]):
        try:
            v = float(p)
        except ValueError:
            raise ParseError(f"field {k + 1} is not numeric: {p[:40]!r}", lineno, path) from None
        if not math.isfinite(v):
            raise ParseError(f"field {k + 1} is not finite: {p[:40]!r}", lineno, path)
        values.append(v)
    frame = values[0]
    if frame != int(frame) or frame < 1:
        raise ParseError(f"frame must be a positive integer, got {parts[0][:40]!r}", lineno, path)
    values[0] = int(frame)
    return values


def parse_detections(source: TextSource, path=None) -> DetectionFile:
    """Rows ``frame,id,x,y,w,h,conf[,...]``; the id and trailing fields are ignored."""
    out = DetectionFile()
    for lineno, line in _lines(source, path):
        if not line.strip():
            continue
        frame, _, x, y, w, h, conf = _fields(line, lineno, path)
        if w <= 0 or h <= 0:
            out.dropped += 1
            continue
        out.by_frame.setdefault(frame, []).append(Detection(frame, BoundingBox(x, y, w, h), conf))
    if out.dropped:
        log.warning("dropped %d detection rows with non-positive width or height", out.dropped)
    out.by_frame = dict(sorted(out.by_frame.items()))
    return out


def parse_ground_truth(source: TextSource, path=None) -> list[GroundTruthTrack]:
    tracks: dict[int, GroundTruthTrack] = {}
    dropped = 0
    for lineno, line in _lines(source, path):
        if not line.strip():
            continue
        frame, gid, x, y, w, h, _ = _fields(line, lineno, path)
        if gid != int(gid) or gid <= 0:
            raise ParseError(f"ground-truth id must be a positive integer, got {gid:g}", lineno, path)
        gid = int(gid)
        if w <= 0 or h <= 0:
            dropped += 1
            continue
        track = tracks.setdefault(gid, GroundTruthTrack(gid))
        if frame in track.boxes:
            raise ParseError(f"duplicate row for id {gid} in frame {frame}", lineno, path)
        track.boxes[frame] = BoundingBox(x, y, w, h)
    if dropped:
        log.warning("dropped %d ground-truth rows with non-positive width or height", dropped)
    return [tracks[k] for k in sorted(tracks)]


def gt_as_detections(gt: Iterable[GroundTruthTrack]) -> DetectionFile:
    out = DetectionFile()
    for track in gt:
        for frame, box in track.boxes.items():
            out.by_frame.setdefault(frame, []).append(Detection(frame, box, 1.0))
    out.by_frame = dict(sorted(out.by_frame.items()))
    return out


def format_number(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def format_results(boxes: Iterable) -> str:
    rows = sorted(boxes, key=lambda t: (t[0], t[1]))
    lines = []
    for frame, tid, box in rows:
        coords = ",".join(format_number(v) for v in box)
        lines.append(f"{frame},{tid},{coords},1,-1,-1,-1\n")
    return "".join(lines)


def write_results(boxes: Iterable, stream: Optional[IO[str]] = None) -> str:
    """Serialise tracked boxes as ``frame,id,x,y,w,h,1,-1,-1,-1`` rows."""
    text = format_results(boxes)
    if stream is not None:
        stream.write(text)
    return text


def parse_results(source: TextSource, path=None) -> list[tuple]:
    """Tracker output rows as ``(frame, id, box)``; ids may be any integer."""
    out = []
    for lineno, line in _lines(source, path):
        if not line.strip():
            continue
        frame, tid, x, y, w, h, _ = _fields(line, lineno, path)
        if w <= 0 or h <= 0:
            continue
        out.append((frame, int(tid), BoundingBox(x, y, w, h)))
    return out


@dataclass
class SequenceConfig:
    det_path: Optional[str]
    gt_path: Optional[str]
    info: SequenceInfo
    use_gt_as_detections: bool = False
    extra: dict = field(default_factory=dict)

    def load_detections(self, source: str = "det") -> DetectionFile:
        if source == "gt" or (source == "det" and self.use_gt_as_detections):
            return gt_as_detections(self.load_ground_truth())
        path = self.det_path if source == "det" else self.extra.get(source)
        if path is None:
            raise ConfigError(f"sequence {self.info.name!r} has no detection source {source!r}")
        with open(path, "rb") as fh:
            return parse_detections(fh, path)

    def load_ground_truth(self) -> list[GroundTruthTrack]:
        if self.gt_path is None:
            raise ConfigError(f"sequence {self.info.name!r} has no ground truth")
        with open(self.gt_path, "rb") as fh:
            return parse_ground_truth(fh, self.gt_path)


_TRUE = {"1", "true", "yes", "on"}


def load_sequence_config(path: str) -> SequenceConfig:
    """Read a ``key=value`` sequence file (``seqinfo.ini`` layout accepted).

    Keys: name, imWidth, imHeight, frameRate, seqLength, detFile, gtFile and
    optionally useGtAsDetections. Relative paths resolve against the file's
    directory; missing detFile/gtFile default to ``det/det.txt`` and
    ``gt/gt.txt`` when those exist.
    """
    base = os.path.dirname(os.path.abspath(path))
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line[0] in "#;[":
                continue
            if "=" not in line:
                raise ParseError("expected key=value", lineno, path)
            key, value = (p.strip() for p in line.split("=", 1))
            values[key] = value

    def num(key, cast, default=None):
        if key not in values:
            if default is None:
                raise ConfigError(f"{path}: missing key {key!r}")
            return default
        try:
            return cast(values[key])
        except ValueError:
            raise ConfigError(f"{path}: {key}={values[key]!r} is not a number") from None

    def resolve(key, fallback):
        rel = values.get(key)
        if rel is None:
            candidate = os.path.join(base, fallback)
            return candidate if os.path.exists(candidate) else None
        p = rel if os.path.isabs(rel) else os.path.join(base, rel)
        if not os.path.exists(p):
            raise ConfigError(f"{path}: {key} {p} does not exist")
        return p

    info = SequenceInfo(
        image_width=num("imWidth", float),
        image_height=num("imHeight", float),
        frame_rate=num("frameRate", float, 30.0),
        frame_count=num("seqLength", int),
        name=values.get("name", os.path.basename(base)),
    )
    known = {"name", "imWidth", "imHeight", "frameRate", "seqLength", "detFile", "gtFile",
             "useGtAsDetections", "imDir", "imExt"}
    extra = {}
    for key in values:
        if key not in known:
            p = values[key]
            extra[key] = p if os.path.isabs(p) else os.path.join(base, p)
    return SequenceConfig(
        det_path=resolve("detFile", os.path.join("det", "det.txt")),
        gt_path=resolve("gtFile", os.path.join("gt", "gt.txt")),
        info=info,
        use_gt_as_detections=values.get("useGtAsDetections", "0").lower() in _TRUE,
        extra=extra,
    )


def write_sequence_config(path: str, info: SequenceInfo, det_file: str | None = None,
                          gt_file: str | None = None, **extra) -> None:
    lines = [f"name={info.name}", f"imWidth={format_number(info.image_width)}",
             f"imHeight={format_number(info.image_height)}",
             f"frameRate={format_number(info.frame_rate)}", f"seqLength={info.frame_count}"]
    if det_file:
        lines.append(f"detFile={det_file}")
    if gt_file:
        lines.append(f"gtFile={gt_file}")
    lines.extend(f"{k}={v}" for k, v in extra.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
