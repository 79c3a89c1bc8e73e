"""End-to-end composition: detections + vanishing point -> token streams.

One function owns the stage order (track assembly, id repair, smoothing,
stationary flagging, orientation, 3D boxes, BEV projection, georeferencing)
so the CLI and the calibration service cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bev import BevObject, CalibrationParams, TokenStream, georeference, to_bev
from .box3d import Box3dConfig, build_box3d, orientation_sequence
from .errors import AboveHorizon
from .geometry import GridParams, PerspectiveGrid, build_perspective_grid
from .ingest import (
    Detection,
    RepairConfig,
    StationaryConfig,
    Track,
    TrackerConfig,
    assemble_tracks,
    repair_ids,
    smooth_trajectory,
    smoothed_anchors,
    stationary_flags,
)
from .vp import VanishingPoint


@dataclass(frozen=True)
class PipelineConfig:
    tracker: TrackerConfig = TrackerConfig()
    repair: RepairConfig = RepairConfig()
    stationary: StationaryConfig = StationaryConfig()
    grid: GridParams = GridParams()
    box3d: Box3dConfig = Box3dConfig()
    calibration: CalibrationParams = CalibrationParams()
    smoothing_window: int = 5
    fps: float | None = None


@dataclass
class PipelineResult:
    grid: PerspectiveGrid
    tracks: list[Track]
    streams: list[TokenStream]
    dropped_above_horizon: int = 0

    @property
    def frame_range(self) -> tuple[int, int] | None:
        frames = [s.frame for stream in self.streams for s in stream.states]
        if not frames:
            return None
        return min(frames), max(frames)


def run_pipeline(
    detections: list[Detection],
    vp: VanishingPoint,
    image_w: float,
    image_h: float,
    config: PipelineConfig = PipelineConfig(),
) -> PipelineResult:
    """Run the whole chain on one camera's detection stream.

    Samples whose smoothed anchor sits at or above the horizon have no ground
    position; they are dropped and counted in ``dropped_above_horizon``.
    """
    grid = build_perspective_grid(vp, image_w, image_h, config.grid)
    tracks = repair_ids(
        assemble_tracks(detections, config.tracker), config.repair
    )
    cal = config.calibration
    streams: list[TokenStream] = []
    dropped = 0
    for track in tracks:
        track.stationary = stationary_flags(track, config.stationary)
        anchors = smoothed_anchors(track, config.smoothing_window)
        traj = smooth_trajectory(track, config.smoothing_window)
        orientations = orientation_sequence(track, traj, vp, image_w)
        states = []
        for sample, anchor, still, orientation in zip(
            track.samples, anchors, track.stationary, orientations
        ):
            try:
                position = to_bev(anchor, grid, cal)
            except AboveHorizon:
                dropped += 1
                continue
            t = sample.t
            if t is None and config.fps:
                t = sample.frame / config.fps
            states.append(
                BevObject(
                    track_id=track.id,
                    cls=track.cls,
                    position=position,
                    frame=sample.frame,
                    t=t,
                    stationary=still,
                    orientation=orientation,
                    geo=(
                        georeference(position, cal, grid.bev_width)
                        if cal.has_geo_anchor
                        else None
                    ),
                    box3d=build_box3d(sample.bbox, orientation, vp, config.box3d),
                    calibration=cal,
                )
            )
        if states:
            streams.append(TokenStream(token_id=track.id, states=tuple(states)))
    return PipelineResult(
        grid=grid, tracks=tracks, streams=streams, dropped_above_horizon=dropped
    )
