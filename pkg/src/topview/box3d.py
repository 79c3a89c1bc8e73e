"""Road-user orientation from trajectory lines and the confined 3D box.

Orientation comes from where the (smoothed) trajectory crosses the top edge of
the 2D box, compared against the edge midpoint shifted by the vanishing
point's horizontal offset from the image centerline. The comparison uses the
offset subtractively for both turn directions; a per-side sign split might
look more natural but is not what the rule states, so mirror symmetry only
holds when the vanishing point is horizontally centered.

The 3D box construction is a deterministic heuristic bounded by one hard
contract: all eight corners stay inside the closed 2D box.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .geometry import ImagePoint
from .ingest import Bbox, Track, TrajectoryLine
from .vp import VanishingPoint

CENTER_TOLERANCE_PX = 1.0


class Orientation(enum.Enum):
    TURNING_LEFT = "turning_left"
    TURNING_RIGHT = "turning_right"
    MOVING_STRAIGHT = "moving_straight"
    SIDE_VIEW = "side_view"


@dataclass(frozen=True)
class Box3dConfig:
    depth_ratio: float = 0.4        # receding depth as a fraction of box height
    foreshortening: float = 0.3     # vertical compression of the receding face
    turn_skew_deg: float = 15.0     # receding-direction tilt for turning objects


@dataclass(frozen=True)
class Box3D:
    """Eight image points: bottom face then top face, each counterclockwise
    (shoelace-positive in image axes) from the rear-left corner."""

    corners: tuple[ImagePoint, ...]
    orientation: Orientation
    source_bbox: Bbox

    def __post_init__(self):
        if len(self.corners) != 8:
            raise ValueError(f"a 3D box needs 8 corners, got {len(self.corners)}")


def _top_edge_intersection(traj: TrajectoryLine, bbox: Bbox) -> float | None:
    """x of the latest trajectory-segment crossing of the box's top edge."""
    x1, y1, x2, _ = bbox
    hit = None
    pts = traj.points
    for a, b in zip(pts[:-1], pts[1:]):
        dy = b.y - a.y
        if dy == 0.0:
            continue
        t = (y1 - a.y) / dy
        if 0.0 <= t <= 1.0:
            qx = a.x + t * (b.x - a.x)
            if x1 <= qx <= x2:
                hit = qx  # latest crossing in trajectory order wins
    return hit


def classify_orientation(
    traj: TrajectoryLine,
    vp: VanishingPoint,
    image_w: float,
    bbox: Bbox,
) -> Orientation:
    """Orientation label for one box given the track's trajectory line.

    No crossing of the top edge means the object presents side-on.
    """
    qx = _top_edge_intersection(traj, bbox)
    if qx is None:
        return Orientation.SIDE_VIEW
    x1, _, x2, _ = bbox
    m = (x1 + x2) / 2.0
    offset = abs(vp.x - image_w / 2.0)
    if offset <= CENTER_TOLERANCE_PX:
        reference = m
    else:
        reference = m - offset
    if abs(qx - reference) <= CENTER_TOLERANCE_PX:
        return Orientation.MOVING_STRAIGHT
    if qx < reference:
        return Orientation.TURNING_LEFT
    return Orientation.TURNING_RIGHT


def orientation_sequence(
    track: Track,
    traj: TrajectoryLine,
    vp: VanishingPoint,
    image_w: float,
) -> list[Orientation]:
    """Per-sample labels; stationary samples reuse the last moving label.

    A track that was never seen moving falls back to side view.
    """
    flags = track.stationary or [False] * len(track.samples)
    labels = []
    last_moving: Orientation | None = None
    for sample, still in zip(track.samples, flags):
        if still:
            labels.append(last_moving if last_moving is not None else Orientation.SIDE_VIEW)
            continue
        label = classify_orientation(traj, vp, image_w, sample.bbox)
        last_moving = label
        labels.append(label)
    return labels


def _clamp(p: tuple[float, float], bbox: Bbox) -> ImagePoint:
    x1, y1, x2, y2 = bbox
    return ImagePoint(x=min(max(p[0], x1), x2), y=min(max(p[1], y1), y2))


def build_box3d(
    bbox: Bbox,
    orientation: Orientation,
    vp: VanishingPoint,
    cfg: Box3dConfig = Box3dConfig(),
) -> Box3D:
    """Deterministic 3D box confined to the closed 2D box.

    Side view: the rear bottom edge sits on the box's bottom edge and the
    front bottom edge is lifted and laterally shrunk. Straight or turning: the
    front bottom edge sits on the box's bottom edge and the rear recedes along
    the unit direction toward the vanishing point (skewed for turns). Top faces
    are the bottom faces raised by the foreshortened height. Every corner is
    clamped into the closed box as the final step.
    """
    x1, y1, x2, y2 = bbox
    w_b, h_b = x2 - x1, y2 - y1
    rho, sigma = cfg.depth_ratio, cfg.foreshortening
    rise = (1.0 - sigma * rho) * h_b

    if orientation is Orientation.SIDE_VIEW:
        lift = sigma * rho * h_b
        shrink = rho * w_b * sigma / 2.0
        rear_l, rear_r = (x1, y2), (x2, y2)
        front_l = (x1 + shrink, y2 - lift)
        front_r = (x2 - shrink, y2 - lift)
    else:
        bottom_center = ((x1 + x2) / 2.0, y2)
        dx, dy = vp.x - bottom_center[0], vp.y - bottom_center[1]
        norm = math.hypot(dx, dy)
        if norm < 1e-12:
            dx, dy = 0.0, -1.0
        else:
            dx, dy = dx / norm, dy / norm
        if orientation is not Orientation.MOVING_STRAIGHT:
            skew = math.radians(cfg.turn_skew_deg)
            if orientation is Orientation.TURNING_LEFT:
                skew = -skew
            c, s = math.cos(skew), math.sin(skew)
            dx, dy = c * dx - s * dy, s * dx + c * dy
        front_l, front_r = (x1, y2), (x2, y2)
        step = rho * h_b
        rear_l = (x1 + step * dx, y2 + step * dy)
        rear_r = (x2 + step * dx, y2 + step * dy)

    bottom = [rear_l, rear_r, front_r, front_l]
    top = [(px, py - rise) for px, py in bottom]
    corners = tuple(_clamp(p, bbox) for p in bottom + top)
    return Box3D(corners=corners, orientation=orientation, source_bbox=bbox)
