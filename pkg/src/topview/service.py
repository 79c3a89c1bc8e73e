"""HTTP/JSON calibration service.

Serves loaded scenes to the calibration UI: BEV objects per frame, live
z/x recalibration, vanishing-point overrides, and the same token/GeoJSON
exports the CLI writes. Scene data is loaded once and never mutated;
calibration state is swapped atomically as one immutable record, so reads
always observe a full parameter set.

Scene directory layout: one subdirectory per scene containing
``detections.ndjson``, ``vp.json``, ``scene.json`` and optionally
``calibration.json`` (exactly the files the synth command emits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .bev import CalibrationParams, export_geojson, export_tokens, load_calibration
from .errors import TopviewError
from .ingest import Detection, load_detections
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .vp import VanishingPoint, load_vp_sidecar


class CalibrationBody(BaseModel):
    z_value: float = 1.0
    x_value: float = 0.0
    meters_per_unit: float = 1.0
    camera_lat: float | None = None
    camera_lon: float | None = None
    heading: float = 0.0


class VpBody(BaseModel):
    x: float
    y: float


@dataclass(frozen=True)
class SceneData:
    scene_id: str
    directory: Path
    detections: tuple[Detection, ...]
    image_width: float
    image_height: float
    fps: float | None


class SceneSession:
    """Immutable scene plus the current (calibration, vp) record.

    ``_state`` is replaced wholesale on every update; readers grab the tuple
    once, so concurrent updates can never expose a half-applied parameter set.
    """

    def __init__(self, scene: SceneData, vp: VanishingPoint, cal: CalibrationParams):
        self.scene = scene
        self._state = (cal, vp)
        self._cache: tuple[tuple[CalibrationParams, VanishingPoint], PipelineResult] | None = None

    @property
    def state(self) -> tuple[CalibrationParams, VanishingPoint]:
        return self._state

    def set_calibration(self, cal: CalibrationParams) -> None:
        _, vp = self._state
        self._state = (cal, vp)

    def set_vp(self, vp: VanishingPoint) -> PipelineResult:
        cal, _ = self._state
        result = self._compute(cal, vp)  # validates the grid before committing
        self._state = (cal, vp)
        return result

    def result(self) -> PipelineResult:
        cal, vp = self._state
        return self._compute(cal, vp)

    def _compute(self, cal: CalibrationParams, vp: VanishingPoint) -> PipelineResult:
        cached = self._cache
        if cached is not None and cached[0] == (cal, vp):
            return cached[1]
        config = PipelineConfig(calibration=cal, fps=self.scene.fps)
        result = run_pipeline(
            list(self.scene.detections), vp,
            self.scene.image_width, self.scene.image_height, config,
        )
        self._cache = ((cal, vp), result)
        return result

    def frame_bounds(self) -> tuple[int, int]:
        frames = [d.frame for d in self.scene.detections]
        return min(frames), max(frames)


def load_scene_dir(scene_dir: Path) -> dict[str, SceneSession]:
    sessions: dict[str, SceneSession] = {}
    if not scene_dir.exists():
        return sessions
    for sub in sorted(scene_dir.iterdir()):
        if not sub.is_dir() or not (sub / "detections.ndjson").exists():
            continue
        meta = json.loads((sub / "scene.json").read_text())
        scene = SceneData(
            scene_id=sub.name,
            directory=sub,
            detections=tuple(load_detections(sub / "detections.ndjson")),
            image_width=float(meta["image_width"]),
            image_height=float(meta["image_height"]),
            fps=float(meta["fps"]) if meta.get("fps") else None,
        )
        vp = load_vp_sidecar(sub / "vp.json")
        cal_path = sub / "calibration.json"
        cal = load_calibration(cal_path) if cal_path.exists() else CalibrationParams()
        sessions[sub.name] = SceneSession(scene, vp, cal)
    return sessions


def _object_record(obj) -> dict:
    rec = {
        "track_id": obj.track_id,
        "frame": obj.frame,
        "t": obj.t,
        "class": obj.cls,
        "u": obj.position.u,
        "v": obj.position.v,
    }
    if obj.geo is not None:
        rec["lat"], rec["lon"] = obj.geo
    rec["stationary"] = obj.stationary
    rec["orientation"] = obj.orientation.value
    rec["box3d"] = [[c.x, c.y] for c in obj.box3d.corners] if obj.box3d else None
    return rec


def _grid_summary(result: PipelineResult, vp: VanishingPoint) -> dict:
    grid = result.grid
    return {
        "vp": {"x": vp.x, "y": vp.y},
        "src": [[c.x, c.y] for c in grid.src.corners],
        "bev_width": grid.bev_width,
        "bev_depth": grid.bev_depth,
        "subdivisions": grid.subdivisions,
    }


def create_app(scene_dir: Path, ui_origin: str = "*") -> FastAPI:
    app = FastAPI(title="topview calibration service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[ui_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = load_scene_dir(Path(scene_dir))

    def session_or_404(scene_id: str) -> SceneSession:
        session = sessions.get(scene_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown scene {scene_id!r}")
        return session

    @app.get("/scenes")
    def list_scenes():
        out = []
        for scene_id in sorted(sessions):
            session = sessions[scene_id]
            _, vp = session.state
            lo, hi = session.frame_bounds()
            out.append(
                {
                    "id": scene_id,
                    "frame_count": len({d.frame for d in session.scene.detections}),
                    "frame_min": lo,
                    "frame_max": hi,
                    "classes": sorted({d.cls for d in session.scene.detections}),
                    "vp": {"x": vp.x, "y": vp.y},
                    "image_width": session.scene.image_width,
                    "image_height": session.scene.image_height,
                    "fps": session.scene.fps,
                    "bev_width": session.result().grid.bev_width,
                    "bev_depth": session.result().grid.bev_depth,
                }
            )
        return out

    @app.get("/scenes/{scene_id}/bev")
    def get_bev(scene_id: str, frame: int = Query(...)):
        session = session_or_404(scene_id)
        lo, hi = session.frame_bounds()
        if frame < lo or frame > hi:
            raise HTTPException(
                status_code=416,
                detail=f"frame {frame} outside [{lo}, {hi}]",
            )
        cal, _ = session.state
        result = session.result()
        objects = [
            _object_record(s)
            for stream in result.streams
            for s in stream.states
            if s.frame == frame
        ]
        objects.sort(key=lambda r: r["track_id"])
        return {
            "scene": scene_id,
            "frame": frame,
            "calibration": cal.to_json(),
            "objects": objects,
        }

    @app.put("/scenes/{scene_id}/calibration")
    def put_calibration(scene_id: str, body: CalibrationBody):
        session = session_or_404(scene_id)
        try:
            cal = CalibrationParams(**body.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session.set_calibration(cal)
        return cal.to_json()

    @app.post("/scenes/{scene_id}/calibration/save")
    def save_calibration(scene_id: str):
        session = session_or_404(scene_id)
        cal, _ = session.state
        path = session.scene.directory / "calibration.json"
        path.write_text(json.dumps(cal.to_json()) + "\n")
        return {"path": str(path)}

    @app.put("/scenes/{scene_id}/vp")
    def put_vp(scene_id: str, body: VpBody):
        session = session_or_404(scene_id)
        try:
            vp = VanishingPoint(x=body.x, y=body.y)
            result = session.set_vp(vp)
        except (TopviewError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return _grid_summary(result, vp)

    @app.get("/scenes/{scene_id}/tokens")
    def get_tokens(scene_id: str):
        session = session_or_404(scene_id)
        return PlainTextResponse(
            export_tokens(session.result().streams),
            media_type="application/x-ndjson",
        )

    @app.get("/scenes/{scene_id}/geojson")
    def get_geojson(scene_id: str, mode: str = "points"):
        session = session_or_404(scene_id)
        if mode not in ("points", "linestrings"):
            raise HTTPException(status_code=422, detail=f"invalid mode {mode!r}")
        try:
            return export_geojson(session.result().streams, mode=mode)
        except TopviewError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    return app
