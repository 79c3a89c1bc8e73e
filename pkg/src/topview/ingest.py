"""Detection-stream ingestion and temporal localisation.

Parses newline-delimited detection records, assembles them into tracks
(pass-through when upstream ids exist, greedy IoU matching otherwise), repairs
id switches across short occlusions, smooths trajectories, and flags
stationary samples.

The anchor point of every sample is the bottom-center of its box: the ground
contact point, the only image point a planar homography can place correctly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyInput, SchemaError
from .geometry import ImagePoint

CLASSES = ("person", "car", "bus", "truck", "bicycle", "motorbike")

Bbox = tuple[float, float, float, float]


@dataclass(frozen=True)
class Detection:
    frame: int
    cls: str
    bbox: Bbox
    confidence: float
    track_id: int | None = None
    t: float | None = None

    def __post_init__(self):
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            raise ValueError(f"bbox must satisfy x1 < x2 and y1 < y2, got {self.bbox}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")

    @property
    def anchor(self) -> ImagePoint:
        x1, _, x2, y2 = self.bbox
        return ImagePoint(x=(x1 + x2) / 2.0, y=y2)


@dataclass(frozen=True)
class TrackSample:
    frame: int
    bbox: Bbox
    t: float | None = None

    @property
    def anchor(self) -> ImagePoint:
        x1, _, x2, y2 = self.bbox
        return ImagePoint(x=(x1 + x2) / 2.0, y=y2)

    @property
    def diagonal(self) -> float:
        x1, y1, x2, y2 = self.bbox
        return math.hypot(x2 - x1, y2 - y1)


@dataclass
class Track:
    id: int
    cls: str
    samples: list[TrackSample]
    stationary: list[bool] | None = None

    @property
    def anchors(self) -> list[ImagePoint]:
        return [s.anchor for s in self.samples]

    @property
    def start_frame(self) -> int:
        return self.samples[0].frame

    @property
    def end_frame(self) -> int:
        return self.samples[-1].frame


@dataclass(frozen=True)
class TrajectoryLine:
    """Smoothed anchor polyline with consecutive duplicates collapsed."""

    points: tuple[ImagePoint, ...]
    source_track: int


@dataclass(frozen=True)
class TrackerConfig:
    iou_min: float = 0.3
    max_age: int = 10


@dataclass(frozen=True)
class RepairConfig:
    gap_max: int = 15
    slack: float = 0.5
    heading_max_deg: float = 45.0
    min_len: int = 3


@dataclass(frozen=True)
class StationaryConfig:
    window: int = 25
    eps_ratio: float = 0.05


# --- parsing -------------------------------------------------------------------


def parse_detections(stream) -> list[Detection]:
    """Parse newline-delimited JSON records into frame-sorted detections.

    `stream` is any iterable of lines (an open file works). Blank lines are
    skipped. Raises SchemaError naming the line and field of the first bad
    record, EmptyInput when no records exist.
    """
    detections = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(line_no, "-", f"invalid JSON: {exc}") from exc
        detections.append(_detection_from_record(rec, line_no))
    if not detections:
        raise EmptyInput("detection stream contains no records")
    detections.sort(key=lambda d: d.frame)  # stable: preserves intra-frame order
    return detections


def _detection_from_record(rec, line_no: int) -> Detection:
    if not isinstance(rec, dict):
        raise SchemaError(line_no, "-", "record is not an object")

    def num(field_name, value):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(line_no, field_name, f"expected a number, got {value!r}")
        return float(value)

    for field_name in ("frame", "class", "bbox", "confidence"):
        if field_name not in rec:
            raise SchemaError(line_no, field_name, "missing")
    if not isinstance(rec["frame"], int) or isinstance(rec["frame"], bool):
        raise SchemaError(line_no, "frame", f"expected an integer, got {rec['frame']!r}")
    if rec["class"] not in CLASSES:
        raise SchemaError(line_no, "class", f"unknown class {rec['class']!r}")
    bbox = rec["bbox"]
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise SchemaError(line_no, "bbox", "expected [x1, y1, x2, y2]")
    x1, y1, x2, y2 = (num("bbox", v) for v in bbox)
    if not (x1 < x2 and y1 < y2):
        raise SchemaError(line_no, "bbox", f"requires x1 < x2 and y1 < y2, got {bbox}")
    confidence = num("confidence", rec["confidence"])
    if not 0.0 <= confidence <= 1.0:
        raise SchemaError(line_no, "confidence", f"outside [0, 1]: {confidence}")
    track_id = rec.get("track_id")
    if track_id is not None and (not isinstance(track_id, int) or isinstance(track_id, bool)):
        raise SchemaError(line_no, "track_id", f"expected an integer, got {track_id!r}")
    t = rec.get("t")
    if t is not None:
        t = num("t", t)
    return Detection(
        frame=rec["frame"], cls=rec["class"], bbox=(x1, y1, x2, y2),
        confidence=confidence, track_id=track_id, t=t,
    )


def load_detections(path: str | Path) -> list[Detection]:
    with Path(path).open() as f:
        return parse_detections(f)


# --- track assembly ---------------------------------------------------------------


def iou(a: Bbox, b: Bbox) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix2 - ix1), max(0.0, iy2 - iy1)
    inter = iw * ih
    if inter == 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def assemble_tracks(detections: list[Detection], cfg: TrackerConfig = TrackerConfig()) -> list[Track]:
    """Group frame-sorted detections into tracks.

    When every detection carries a track_id the grouping is a pass-through;
    otherwise greedy per-frame IoU matching against each live track's last box,
    same class only, with tracks expiring after ``max_age`` unmatched frames.
    """
    if not detections:
        return []
    if all(d.track_id is not None for d in detections):
        return _group_by_given_ids(detections)

    tracks: list[Track] = []
    live: list[Track] = []
    next_id = 1
    frames = sorted({d.frame for d in detections})
    by_frame: dict[int, list[Detection]] = {}
    for d in detections:
        by_frame.setdefault(d.frame, []).append(d)

    for frame in frames:
        live = [t for t in live if frame - t.end_frame <= cfg.max_age]
        dets = by_frame[frame]
        candidates = []
        for ti, track in enumerate(live):
            for di, det in enumerate(dets):
                if det.cls != track.cls:
                    continue
                score = iou(track.samples[-1].bbox, det.bbox)
                if score >= cfg.iou_min:
                    candidates.append((score, ti, di))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        used_tracks: set[int] = set()
        used_dets: set[int] = set()
        for score, ti, di in candidates:
            if ti in used_tracks or di in used_dets:
                continue
            used_tracks.add(ti)
            used_dets.add(di)
            det = dets[di]
            live[ti].samples.append(TrackSample(frame=det.frame, bbox=det.bbox, t=det.t))
        for di, det in enumerate(dets):
            if di in used_dets:
                continue
            track = Track(
                id=next_id, cls=det.cls,
                samples=[TrackSample(frame=det.frame, bbox=det.bbox, t=det.t)],
            )
            next_id += 1
            tracks.append(track)
            live.append(track)
    return sorted(tracks, key=lambda t: t.id)


def _group_by_given_ids(detections: list[Detection]) -> list[Track]:
    grouped: dict[int, Track] = {}
    for d in detections:
        track = grouped.get(d.track_id)
        if track is None:
            grouped[d.track_id] = Track(
                id=d.track_id, cls=d.cls,
                samples=[TrackSample(frame=d.frame, bbox=d.bbox, t=d.t)],
            )
            continue
        if d.frame <= track.end_frame:
            raise ValueError(
                f"track {d.track_id} has non-increasing frame {d.frame}"
            )
        track.samples.append(TrackSample(frame=d.frame, bbox=d.bbox, t=d.t))
    return sorted(grouped.values(), key=lambda t: t.id)


# --- id repair ----------------------------------------------------------------------


def _terminal_velocity(track: Track) -> tuple[float, float]:
    """Mean per-frame displacement over the last few samples (px/frame)."""
    samples = track.samples[-5:]
    if len(samples) < 2:
        return (0.0, 0.0)
    a, b = samples[0].anchor, samples[-1].anchor
    df = samples[-1].frame - samples[0].frame
    return ((b.x - a.x) / df, (b.y - a.y) / df)


def _merge_candidate(a: Track, b: Track, cfg: RepairConfig) -> tuple[float, float] | None:
    """Returns (gap, spatial distance) when b plausibly continues a."""
    if a.cls != b.cls:
        return None
    gap = b.start_frame - a.end_frame
    if gap <= 0 or gap > cfg.gap_max:
        return None
    vx, vy = _terminal_velocity(a)
    speed = math.hypot(vx, vy)
    pa, pb = a.samples[-1].anchor, b.samples[0].anchor
    dx, dy = pb.x - pa.x, pb.y - pa.y
    dist = math.hypot(dx, dy)
    if dist > speed * gap * (1.0 + cfg.slack):
        return None
    if speed > 1e-9 and dist > 1e-9:
        cos_angle = (vx * dx + vy * dy) / (speed * dist)
        if math.degrees(math.acos(max(-1.0, min(1.0, cos_angle)))) > cfg.heading_max_deg:
            return None
    return gap, dist


def repair_ids(tracks: list[Track], cfg: RepairConfig = RepairConfig()) -> list[Track]:
    """Merge track fragments split by short occlusions, drop jitter tracks.

    A fragment pair (A ends, B starts) merges when the gap, the spatial jump
    relative to A's terminal speed, and the heading of the jump against A's
    terminal direction all stay within the configured bounds. The merged track
    keeps A's id. Tracks shorter than ``min_len`` samples are removed last.
    """
    pool = [Track(id=t.id, cls=t.cls, samples=list(t.samples), stationary=None) for t in tracks]
    merged = True
    while merged:
        merged = False
        pool.sort(key=lambda t: (t.end_frame, t.id))
        for a in pool:
            best = None
            for b in pool:
                if b is a:
                    continue
                cand = _merge_candidate(a, b, cfg)
                if cand is not None and (best is None or (cand, b.id) < (best[0], best[1].id)):
                    best = (cand, b)
            if best is not None:
                b = best[1]
                a.samples.extend(b.samples)
                pool.remove(b)
                merged = True
                break
    return [t for t in pool if len(t.samples) >= cfg.min_len]


# --- smoothing and stationary detection ------------------------------------------------


def smoothed_anchors(track: Track, window: int = 5) -> list[ImagePoint]:
    """Centered moving average of the anchor points; length equals input length.

    Edges average over whatever part of the window exists.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    anchors = track.anchors
    half = window // 2
    out = []
    n = len(anchors)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        xs = sum(p.x for p in anchors[lo:hi]) / (hi - lo)
        ys = sum(p.y for p in anchors[lo:hi]) / (hi - lo)
        out.append(ImagePoint(x=xs, y=ys))
    return out


def smooth_trajectory(track: Track, window: int = 5) -> TrajectoryLine:
    """Smoothed anchor polyline with consecutive duplicate points collapsed."""
    points: list[ImagePoint] = []
    for p in smoothed_anchors(track, window):
        if points and p.x == points[-1].x and p.y == points[-1].y:
            continue
        points.append(p)
    return TrajectoryLine(points=tuple(points), source_track=track.id)


def stationary_flags(track: Track, cfg: StationaryConfig = StationaryConfig()) -> list[bool]:
    """Per-sample stationary booleans.

    A sample is stationary when its anchor moved less than
    ``eps_ratio * bbox diagonal`` relative to every anchor in its trailing
    window of ``window`` frames. Samples too early to own a full trailing
    window are judged against the track's first ``window`` frames instead, so
    a mover is never misflagged merely for having no history yet.
    """
    samples = track.samples
    anchors = track.anchors
    first_frame = samples[0].frame
    flags = []
    for i, sample in enumerate(samples):
        eps = cfg.eps_ratio * sample.diagonal
        if sample.frame - first_frame >= cfg.window - 1:
            window = [
                j for j in range(i, -1, -1)
                if sample.frame - samples[j].frame < cfg.window
            ]
        else:
            window = [
                j for j in range(len(samples))
                if samples[j].frame - first_frame < cfg.window
            ]
        moved = max(
            math.hypot(anchors[i].x - anchors[j].x, anchors[i].y - anchors[j].y)
            for j in window
        )
        flags.append(moved < eps)
    return flags
