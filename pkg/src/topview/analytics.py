"""Distance analytics over BEV scenes: proximity, social-distancing violations,
occupancy grids, and city-scale aggregation across cameras.

Distances are measured between calibrated BEV anchor points (ground contact),
scaled to metres by the calibration. Violations are pedestrian-to-pedestrian
only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bev import BevObject, CalibrationParams, TokenStream
from .errors import MixedCalibration, UnknownCamera


@dataclass(frozen=True)
class ViolationEvent:
    """One contiguous run of frames in which a pedestrian pair stayed closer
    than the threshold; distance is the run minimum."""

    frame: int
    frame_end: int
    t: float | None
    pair: tuple[int, int]
    distance: float

    def __post_init__(self):
        if self.pair[0] >= self.pair[1]:
            raise ValueError(f"pair must be ordered, got {self.pair}")


@dataclass(frozen=True)
class OccupancyGrid:
    cell_size: float
    origin_u: float
    origin_v: float
    counts: dict[str, np.ndarray]

    def total(self) -> int:
        return int(sum(int(layer.sum()) for layer in self.counts.values()))

    def cell_of(self, u: float, v: float) -> tuple[int, int]:
        return (
            int(math.floor((v - self.origin_v) / self.cell_size)),
            int(math.floor((u - self.origin_u) / self.cell_size)),
        )


def pairwise_distances(frame_objects: list[BevObject], cal: CalibrationParams) -> np.ndarray:
    """Symmetric metre-distance matrix between the objects of one frame.

    Raises MixedCalibration when an object records a different calibration
    from the one given.
    """
    for o in frame_objects:
        if o.calibration is not None and o.calibration != cal:
            raise MixedCalibration(
                f"track {o.track_id} was projected under a different calibration"
            )
    n = len(frame_objects)
    out = np.zeros((n, n))
    if n == 0:
        return out
    pts = np.array([[o.position.u, o.position.v] for o in frame_objects])
    diff = pts[:, None, :] - pts[None, :, :]
    out = cal.meters_per_unit * np.sqrt((diff ** 2).sum(axis=2))
    return out


def detect_violations(
    streams: list[TokenStream],
    cal: CalibrationParams,
    threshold: float = 2.0,
    min_duration: int = 1,
) -> tuple[list[ViolationEvent], int]:
    """Social-distancing events: person pairs closer than ``threshold`` metres
    for at least ``min_duration`` consecutive frames.

    Contiguous runs collapse into one event spanning the run. Returns the
    events plus their count over the analyzed interval.
    """
    by_frame: dict[int, list[BevObject]] = {}
    for stream in streams:
        for state in stream.states:
            if state.cls == "person":
                by_frame.setdefault(state.frame, []).append(state)

    # Per-pair map of violating frames and the distance at each.
    pair_hits: dict[tuple[int, int], dict[int, float]] = {}
    for frame, objects in by_frame.items():
        objects = sorted(objects, key=lambda o: o.track_id)
        dists = pairwise_distances(objects, cal)
        for i in range(len(objects)):
            for j in range(i + 1, len(objects)):
                if objects[i].track_id == objects[j].track_id:
                    continue
                if dists[i, j] < threshold:
                    pair = (objects[i].track_id, objects[j].track_id)
                    pair_hits.setdefault(pair, {})[frame] = float(dists[i, j])

    t_lookup = {
        (s.track_id, s.frame): s.t for stream in streams for s in stream.states
    }
    events = []
    for pair in sorted(pair_hits):
        frames = sorted(pair_hits[pair])
        run_start = frames[0]
        prev = frames[0]
        for f in frames[1:] + [None]:
            if f is not None and f == prev + 1:
                prev = f
                continue
            if prev - run_start + 1 >= min_duration:
                run_frames = range(run_start, prev + 1)
                events.append(
                    ViolationEvent(
                        frame=run_start,
                        frame_end=prev,
                        t=t_lookup.get((pair[0], run_start)),
                        pair=pair,
                        distance=min(pair_hits[pair][rf] for rf in run_frames),
                    )
                )
            if f is not None:
                run_start = prev = f
    events.sort(key=lambda e: (e.frame, e.pair))
    return events, len(events)


def occupancy(streams: list[TokenStream], cell_size: float) -> OccupancyGrid:
    """Per-class visit counts over a uniform grid covering the data bounds
    padded by one cell."""
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    states = [s for stream in streams for s in stream.states]
    if not states:
        return OccupancyGrid(cell_size=cell_size, origin_u=0.0, origin_v=0.0, counts={})
    us = [s.position.u for s in states]
    vs = [s.position.v for s in states]
    origin_u = min(us) - cell_size
    origin_v = min(vs) - cell_size
    n_cols = int(math.floor((max(us) - origin_u) / cell_size)) + 2
    n_rows = int(math.floor((max(vs) - origin_v) / cell_size)) + 2
    counts: dict[str, np.ndarray] = {}
    for s in states:
        layer = counts.get(s.cls)
        if layer is None:
            layer = counts.setdefault(s.cls, np.zeros((n_rows, n_cols), dtype=int))
        row = int(math.floor((s.position.v - origin_v) / cell_size))
        col = int(math.floor((s.position.u - origin_u) / cell_size))
        layer[row, col] += 1
    return OccupancyGrid(
        cell_size=cell_size, origin_u=origin_u, origin_v=origin_v, counts=counts
    )


def downsample_streams(streams: list[TokenStream], sample_fps: float) -> list[TokenStream]:
    """Thin each stream to at most ``sample_fps`` states per second.

    Keeps the first state of every time bucket (bucketing on t, or on the
    frame index when no timebase exists), so batch jobs over many cameras can
    bound their work per hour of footage.
    """
    if sample_fps <= 0:
        raise ValueError(f"sample_fps must be positive, got {sample_fps}")
    out = []
    for stream in streams:
        kept = []
        last_bucket: int | None = None
        for state in stream.states:
            clock = state.t if state.t is not None else float(state.frame)
            bucket = math.floor(clock * sample_fps)
            if bucket != last_bucket:
                kept.append(state)
                last_bucket = bucket
        if kept:
            out.append(TokenStream(token_id=stream.token_id, states=tuple(kept)))
    return out


# --- city-scale aggregation -----------------------------------------------------


@dataclass(frozen=True)
class CameraSite:
    camera_id: str
    lat: float
    lon: float
    heading: float


def load_camera_registry(path: str | Path) -> dict[str, CameraSite]:
    """CSV registry: camera_id,lat,lon,heading (header optional)."""
    registry = {}
    with Path(path).open(newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].strip().lower() == "camera_id":
                continue
            cam_id = row[0].strip()
            registry[cam_id] = CameraSite(
                camera_id=cam_id,
                lat=float(row[1]),
                lon=float(row[2]),
                heading=float(row[3]) if len(row) > 3 else 0.0,
            )
    return registry


def aggregate_scenes(
    per_camera_counts: dict[str, int],
    registry: dict[str, CameraSite],
) -> dict:
    """Join per-camera violation counts onto registry coordinates.

    Returns a GeoJSON point layer with one feature per camera; raises
    UnknownCamera for ids missing from the registry.
    """
    features = []
    for cam_id in sorted(per_camera_counts):
        site = registry.get(cam_id)
        if site is None:
            raise UnknownCamera(cam_id)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [site.lon, site.lat]},
                "properties": {
                    "camera_id": cam_id,
                    "violation_count": per_camera_counts[cam_id],
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}
