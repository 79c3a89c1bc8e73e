"""Vanishing points: classical RANSAC estimation from line segments, sidecar
loading, and the logcosh evaluation metric.

The estimator intersects pairs of segment supporting lines, scores candidates
by how many segments pass within a pixel threshold, and refines the winner by
weighted least squares over the inlier lines. Segments are canonically sorted
before sampling so the result does not depend on input order for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientSegments, MissingFile, NoConsensus, ParseError
from .geometry import ImagePoint

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LineSegment:
    p1: ImagePoint
    p2: ImagePoint
    weight: float = 1.0

    def __post_init__(self):
        if math.hypot(self.p2.x - self.p1.x, self.p2.y - self.p1.y) <= 1e-6:
            raise ValueError("segment endpoints coincide")
        if self.weight < 0:
            raise ValueError("segment weight must be nonnegative")


@dataclass(frozen=True)
class VanishingPoint:
    x: float
    y: float
    confidence: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("vanishing point must be finite")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class VpEstimate:
    vp: VanishingPoint
    inlier_count: int
    residual: float


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 500
    threshold: float = 2.0
    min_inlier_ratio: float = 0.3
    seed: int = 0


def _supporting_lines(segments: list[LineSegment]) -> np.ndarray:
    """Unit-normal line coefficients (a, b, c) with a*x + b*y + c = 0 per segment."""
    coeffs = np.empty((len(segments), 3))
    for i, s in enumerate(segments):
        a = s.p1.y - s.p2.y
        b = s.p2.x - s.p1.x
        c = s.p1.x * s.p2.y - s.p2.x * s.p1.y
        norm = math.hypot(a, b)
        coeffs[i] = (a / norm, b / norm, c / norm)
    return coeffs


def _has_nonparallel_pair(segments: list[LineSegment], min_angle: float = 1e-4) -> bool:
    angles = sorted(
        math.atan2(s.p2.y - s.p1.y, s.p2.x - s.p1.x) % math.pi for s in segments
    )
    # Segments span an angular arc (mod pi); they are all mutually parallel
    # within min_angle iff that arc is shorter than min_angle.
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(angles[0] + math.pi - angles[-1])
    return math.pi - max(gaps) > min_angle


def _canonical_order(segments) -> list[LineSegment]:
    def key(s: LineSegment):
        e1 = (s.p1.x, s.p1.y)
        e2 = (s.p2.x, s.p2.y)
        lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
        return (*lo, *hi, s.weight)

    return sorted(segments, key=key)


def estimate_vp_ransac(segments, config: RansacConfig = RansacConfig()) -> VpEstimate:
    """RANSAC over pairwise line intersections, refined by weighted least squares.

    Raises InsufficientSegments when fewer than two non-parallel segments exist
    and NoConsensus when the best candidate's inlier ratio falls below
    ``config.min_inlier_ratio``.
    """
    segs = _canonical_order(segments)
    n = len(segs)
    if n < 2 or not _has_nonparallel_pair(segs):
        raise InsufficientSegments(
            f"need at least 2 non-parallel segments, got {n}"
        )

    lines = _supporting_lines(segs)
    weights = np.array([s.weight for s in segs])
    rng = np.random.default_rng(config.seed)

    best_count = 0
    best_residual = math.inf
    best_point: tuple[float, float] | None = None
    best_mask: np.ndarray | None = None
    for _ in range(config.iterations):
        i, j = rng.choice(n, size=2, replace=False)
        a1, b1, c1 = lines[i]
        a2, b2, c2 = lines[j]
        w = a1 * b2 - b1 * a2
        if abs(w) < 1e-12:
            continue
        x = (b1 * c2 - c1 * b2) / w
        y = (c1 * a2 - a1 * c2) / w
        dist = np.abs(lines[:, 0] * x + lines[:, 1] * y + lines[:, 2])
        mask = dist < config.threshold
        count = int(mask.sum())
        residual = float(dist[mask].mean()) if count else math.inf
        if count > best_count or (count == best_count and residual < best_residual):
            best_count, best_residual = count, residual
            best_point, best_mask = (x, y), mask

    if best_point is None or best_count / n < config.min_inlier_ratio:
        raise NoConsensus(
            f"best inlier ratio {best_count / n:.2f} below {config.min_inlier_ratio}"
        )

    x, y = _refine(lines[best_mask], weights[best_mask], best_point)
    dist = np.abs(lines[best_mask, 0] * x + lines[best_mask, 1] * y + lines[best_mask, 2])
    return VpEstimate(
        vp=VanishingPoint(x=x, y=y, confidence=best_count / n),
        inlier_count=best_count,
        residual=float(dist.mean()),
    )


def _refine(lines: np.ndarray, weights: np.ndarray, fallback: tuple[float, float]):
    """Minimize the weighted sum of squared perpendicular distances to the lines."""
    sw = np.sqrt(np.maximum(weights, 0.0))
    a = lines[:, :2] * sw[:, None]
    b = -lines[:, 2] * sw
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 2 or not np.all(np.isfinite(sol)):
        return fallback
    return float(sol[0]), float(sol[1])


@dataclass(frozen=True)
class LogCoshLoss:
    x: float
    y: float

    @property
    def total(self) -> float:
        return self.x + self.y


def _logcosh(d: float) -> float:
    # Stable for large |d|: log(cosh(d)) = |d| + log1p(exp(-2|d|)) - log 2.
    a = abs(d)
    return a + math.log1p(math.exp(-2.0 * a)) - _LOG2


def logcosh_error(pred: VanishingPoint, truth: VanishingPoint) -> LogCoshLoss:
    """Per-coordinate log(cosh(pred - truth)); callers normalize coordinates to
    [0, 1] by the image dimensions when comparing against training-scale values."""
    return LogCoshLoss(x=_logcosh(pred.x - truth.x), y=_logcosh(pred.y - truth.y))


def normalized_vp(vp: VanishingPoint, image_w: float, image_h: float) -> VanishingPoint:
    """Coordinates divided by image dimensions, for metric evaluation."""
    return VanishingPoint(x=vp.x / image_w, y=vp.y / image_h, confidence=vp.confidence)


# --- sidecar files ----------------------------------------------------------------


def load_vp_sidecar(path: str | Path) -> VanishingPoint:
    """Read a {"x", "y", "confidence"?} JSON sidecar."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    for field in ("x", "y"):
        if field not in doc:
            raise ParseError(f"{path}: missing field {field}")
        if not isinstance(doc[field], (int, float)) or isinstance(doc[field], bool):
            raise ParseError(f"{path}: field {field} must be a number")
    confidence = doc.get("confidence", 1.0)
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
        raise ParseError(f"{path}: field confidence must be a number")
    try:
        return VanishingPoint(x=float(doc["x"]), y=float(doc["y"]), confidence=float(confidence))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_segments(path: str | Path) -> list[LineSegment]:
    """Read a JSON array of {"x1","y1","x2","y2","weight"?} segments."""
    doc = _read_json(path)
    if not isinstance(doc, list):
        raise ParseError(f"{path}: expected a JSON array")
    segments = []
    for i, rec in enumerate(doc):
        if not isinstance(rec, dict):
            raise ParseError(f"{path}: entry {i} is not an object")
        for field in ("x1", "y1", "x2", "y2"):
            if field not in rec:
                raise ParseError(f"{path}: entry {i} missing field {field}")
        try:
            segments.append(
                LineSegment(
                    p1=ImagePoint(float(rec["x1"]), float(rec["y1"])),
                    p2=ImagePoint(float(rec["x2"]), float(rec["y2"])),
                    weight=float(rec.get("weight", 1.0)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: entry {i}: {exc}") from exc
    return segments


def _read_json(path: str | Path):
    p = Path(path)
    if not p.exists():
        raise MissingFile(str(p))
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON: {exc}") from exc
