"""Calibrated BEV projection, georeferencing, and anonymised exports.

Calibration applies the two manual controls: a multiplicative depth scale
(z_value, on v only) and an additive lateral offset (x_value, on u only).
Georeferencing uses a local tangent-plane approximation around the camera,
valid for the few hundred metres a street camera covers.

Exports are the privacy boundary: token records and GeoJSON features carry
exactly the declared fields and nothing else, never imagery or appearance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .box3d import Box3D, Orientation
from .errors import AboveHorizon, MissingGeoAnchor, ParseError
from .geometry import (
    BevPoint,
    ImagePoint,
    PerspectiveGrid,
    grid_homography,
    project,
)

HORIZON_MARGIN_PX = 1.0
METERS_PER_DEG_LAT = 111_320.0


@dataclass(frozen=True)
class CalibrationParams:
    z_value: float = 1.0
    x_value: float = 0.0
    meters_per_unit: float = 1.0
    camera_lat: float | None = None
    camera_lon: float | None = None
    heading: float = 0.0

    def __post_init__(self):
        if self.z_value <= 0:
            raise ValueError(f"z_value must be positive, got {self.z_value}")
        if self.meters_per_unit <= 0:
            raise ValueError(f"meters_per_unit must be positive, got {self.meters_per_unit}")
        if (self.camera_lat is None) != (self.camera_lon is None):
            raise ValueError("camera_lat and camera_lon must be given together")
        if self.camera_lat is not None and not -90.0 <= self.camera_lat <= 90.0:
            raise ValueError(f"camera_lat outside [-90, 90]: {self.camera_lat}")
        if self.camera_lon is not None and not -180.0 <= self.camera_lon <= 180.0:
            raise ValueError(f"camera_lon outside [-180, 180]: {self.camera_lon}")
        if not 0.0 <= self.heading < 360.0:
            raise ValueError(f"heading outside [0, 360): {self.heading}")

    @property
    def has_geo_anchor(self) -> bool:
        return self.camera_lat is not None

    def to_json(self) -> dict:
        return {
            "z_value": self.z_value,
            "x_value": self.x_value,
            "meters_per_unit": self.meters_per_unit,
            "camera_lat": self.camera_lat,
            "camera_lon": self.camera_lon,
            "heading": self.heading,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CalibrationParams":
        try:
            return cls(
                z_value=float(doc.get("z_value", 1.0)),
                x_value=float(doc.get("x_value", 0.0)),
                meters_per_unit=float(doc.get("meters_per_unit", 1.0)),
                camera_lat=None if doc.get("camera_lat") is None else float(doc["camera_lat"]),
                camera_lon=None if doc.get("camera_lon") is None else float(doc["camera_lon"]),
                heading=float(doc.get("heading", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"calibration: {exc}") from exc


def load_calibration(path: str | Path) -> CalibrationParams:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"calibration file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"calibration: invalid JSON: {exc}") from exc
    return CalibrationParams.from_json(doc)


@dataclass(frozen=True)
class BevObject:
    """One road-user state in the calibrated BEV frame."""

    track_id: int
    cls: str
    position: BevPoint
    frame: int
    t: float | None
    stationary: bool
    orientation: Orientation
    geo: tuple[float, float] | None = None
    box3d: Box3D | None = None
    calibration: CalibrationParams | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TokenStream:
    """Ordered per-track sequence of BEV states over the video interval."""

    token_id: int
    states: tuple[BevObject, ...]

    def __post_init__(self):
        frames = [s.frame for s in self.states]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError(f"token {self.token_id} frames must strictly increase")


def to_bev(anchor: ImagePoint, grid: PerspectiveGrid, cal: CalibrationParams) -> BevPoint:
    """Project one ground-contact anchor into the calibrated BEV frame.

    Raises AboveHorizon for anchors at or above the horizon line (no finite
    ground position exists there).
    """
    if anchor.y <= grid.vp.y + HORIZON_MARGIN_PX:
        raise AboveHorizon(
            f"anchor y={anchor.y} is not below the horizon y={grid.vp.y}"
        )
    p = project(grid_homography(grid), anchor)
    return BevPoint(u=p.u + cal.x_value, v=p.v * cal.z_value)


def georeference(
    p: BevPoint, cal: CalibrationParams, bev_width: float = 20.0
) -> tuple[float, float]:
    """(lat, lon) of a calibrated BEV point via the local tangent plane.

    The camera sits at (u = bev_width / 2, v = 0); heading is the compass
    bearing of the BEV depth axis.
    """
    if not cal.has_geo_anchor:
        raise MissingGeoAnchor("calibration has no camera_lat/camera_lon")
    theta = math.radians(cal.heading)
    m = cal.meters_per_unit
    lateral = p.u - bev_width / 2.0
    north = m * p.v * math.cos(theta) - m * lateral * math.sin(theta)
    east = m * p.v * math.sin(theta) + m * lateral * math.cos(theta)
    lat = cal.camera_lat + north / METERS_PER_DEG_LAT
    lon = cal.camera_lon + east / (METERS_PER_DEG_LAT * math.cos(math.radians(cal.camera_lat)))
    return lat, lon


def fit_meters_per_unit(a: BevPoint, b: BevPoint, ground_distance_m: float) -> float:
    """Metre scale from two BEV points whose true ground separation is known."""
    d = math.hypot(a.u - b.u, a.v - b.v)
    if d < 1e-12:
        raise ValueError("calibration points coincide in BEV space")
    if ground_distance_m <= 0:
        raise ValueError("ground distance must be positive")
    return ground_distance_m / d


def georeference_inverse(
    lat: float, lon: float, cal: CalibrationParams, bev_width: float = 20.0
) -> BevPoint:
    """Inverse tangent-plane map; exact inverse of ``georeference`` nearby."""
    if not cal.has_geo_anchor:
        raise MissingGeoAnchor("calibration has no camera_lat/camera_lon")
    north = (lat - cal.camera_lat) * METERS_PER_DEG_LAT
    east = (lon - cal.camera_lon) * METERS_PER_DEG_LAT * math.cos(math.radians(cal.camera_lat))
    theta = math.radians(cal.heading)
    m = cal.meters_per_unit
    v = (north * math.cos(theta) + east * math.sin(theta)) / m
    lateral = (-north * math.sin(theta) + east * math.cos(theta)) / m
    return BevPoint(u=lateral + bev_width / 2.0, v=v)


# --- exports -------------------------------------------------------------------


def _token_record(obj: BevObject) -> dict:
    rec = {
        "track_id": obj.track_id,
        "frame": obj.frame,
        "t": obj.t,
        "class": obj.cls,
        "u": obj.position.u,
        "v": obj.position.v,
    }
    if obj.geo is not None:
        rec["lat"] = obj.geo[0]
        rec["lon"] = obj.geo[1]
    rec["stationary"] = obj.stationary
    rec["orientation"] = obj.orientation.value
    rec["box3d"] = (
        [[c.x, c.y] for c in obj.box3d.corners] if obj.box3d is not None else None
    )
    return rec


def export_tokens(streams: list[TokenStream]) -> str:
    """Newline-delimited token records ordered by (track_id, frame)."""
    objects = sorted(
        (s for stream in streams for s in stream.states),
        key=lambda s: (s.track_id, s.frame),
    )
    return "".join(json.dumps(_token_record(o)) + "\n" for o in objects)


def load_tokens(text: str) -> list[TokenStream]:
    """Parse a token export back into streams (inverse of export_tokens)."""
    by_id: dict[int, list[BevObject]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            box = rec.get("box3d")
            obj = BevObject(
                track_id=int(rec["track_id"]),
                cls=rec["class"],
                position=BevPoint(u=float(rec["u"]), v=float(rec["v"])),
                frame=int(rec["frame"]),
                t=None if rec.get("t") is None else float(rec["t"]),
                stationary=bool(rec["stationary"]),
                orientation=Orientation(rec["orientation"]),
                geo=(
                    (float(rec["lat"]), float(rec["lon"]))
                    if "lat" in rec and "lon" in rec
                    else None
                ),
                box3d=(
                    Box3D(
                        corners=tuple(ImagePoint(x=c[0], y=c[1]) for c in box),
                        orientation=Orientation(rec["orientation"]),
                        source_bbox=_hull(box),
                    )
                    if box is not None
                    else None
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"token line {line_no}: {exc}") from exc
        by_id.setdefault(obj.track_id, []).append(obj)
    return [
        TokenStream(token_id=tid, states=tuple(sorted(objs, key=lambda o: o.frame)))
        for tid, objs in sorted(by_id.items())
    ]


def _hull(points: list[list[float]]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), min(ys), max(xs), max(ys)


def _feature_properties(obj: BevObject) -> dict:
    return {
        "track_id": obj.track_id,
        "class": obj.cls,
        "stationary": obj.stationary,
        "orientation": obj.orientation.value,
    }


def export_geojson(scene, mode: str = "points") -> dict:
    """GeoJSON FeatureCollection of georeferenced states.

    ``scene`` is a list of BevObject (points mode) or of TokenStream
    (either mode). points: one Feature per object state. linestrings: one
    Feature per token carrying per-vertex timestamps. Coordinates follow
    RFC 7946 order (lon, lat). Raises MissingGeoAnchor when any state lacks
    a geo position.
    """
    if mode not in ("points", "linestrings"):
        raise ValueError(f"mode must be 'points' or 'linestrings', got {mode!r}")

    features = []
    if mode == "points":
        if all(isinstance(s, TokenStream) for s in scene):
            objects = [o for stream in scene for o in stream.states]
        else:
            objects = list(scene)
        for o in sorted(objects, key=lambda s: (s.track_id, s.frame)):
            if o.geo is None:
                raise MissingGeoAnchor(f"track {o.track_id} frame {o.frame} has no geo position")
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [o.geo[1], o.geo[0]]},
                    "properties": {**_feature_properties(o), "frame": o.frame, "t": o.t},
                }
            )
    else:
        for stream in sorted(scene, key=lambda s: s.token_id):
            coords = []
            for o in stream.states:
                if o.geo is None:
                    raise MissingGeoAnchor(
                        f"track {o.track_id} frame {o.frame} has no geo position"
                    )
                coords.append([o.geo[1], o.geo[0]])
            head = stream.states[0]
            # RFC 7946 forbids single-position LineStrings.
            geometry = (
                {"type": "LineString", "coordinates": coords}
                if len(coords) > 1
                else {"type": "Point", "coordinates": coords[0]}
            )
            features.append(
                {
                    "type": "Feature",
                    "geometry": geometry,
                    "properties": {
                        **_feature_properties(head),
                        "frames": [o.frame for o in stream.states],
                        "timestamps": [o.t for o in stream.states],
                    },
                }
            )
    return {"type": "FeatureCollection", "features": features}
