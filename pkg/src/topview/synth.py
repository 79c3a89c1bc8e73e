"""Synthetic pinhole-camera oracle: ground-truth scenes for validating the pipeline.

Generates world-plane agent trajectories, projects them through an explicit
camera matrix, and emits the exact file formats the pipeline ingests
(detections, VP sidecar, line segments) together with ground-truth BEV paths.

Conventions
-----------
World frame: x east, y north, z up; the ground plane is z = 0.
Camera frame: x right, y down, z forward (optical axis).
Pose: yaw rotates the heading clockwise from north (toward east), pitch tilts
the optical axis down toward the ground, roll turns the image clockwise.
R maps world to camera coordinates; T = -R @ C for camera position C, so
p_cam = R @ p_world + T.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BehindCamera, DirectionAtInfinity, ParseError
from .geometry import ImagePoint

_ROT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Explicit pinhole camera: intrinsics plus world-to-camera pose."""

    f: float
    m_x: float
    m_y: float
    gamma: float
    c_x: float
    c_y: float
    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        if self.f * self.m_x <= 0 or self.f * self.m_y <= 0:
            raise ValueError("pixel focal lengths must be positive")
        r = np.asarray(self.r, dtype=float)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if np.max(np.abs(r.T @ r - np.eye(3))) > _ROT_TOL or np.linalg.det(r) < 0:
            raise ValueError("rotation is not orthonormal with det +1")

    @property
    def alpha_x(self) -> float:
        return self.f * self.m_x

    @property
    def alpha_y(self) -> float:
        return self.f * self.m_y

    def intrinsics(self) -> np.ndarray:
        """3x3 pixel-scaling block of the intrinsic matrix."""
        return np.array(
            [
                [self.alpha_x, self.gamma, self.c_x],
                [0.0, self.alpha_y, self.c_y],
                [0.0, 0.0, 1.0],
            ]
        )

    def matrix(self) -> np.ndarray:
        """Full 3x4 camera matrix mapping homogeneous world points to pixels."""
        rt = np.hstack([self.r, np.asarray(self.t, dtype=float).reshape(3, 1)])
        return self.intrinsics() @ rt

    def position(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.r.T @ np.asarray(self.t, dtype=float)


def rotation_yaw(yaw_deg: float) -> np.ndarray:
    """World-frame heading rotation (clockwise from north toward east)."""
    c, s = math.cos(math.radians(yaw_deg)), math.sin(math.radians(yaw_deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_pitch(pitch_deg: float) -> np.ndarray:
    """Camera-frame tilt about the right axis; positive looks down."""
    c, s = math.cos(math.radians(pitch_deg)), math.sin(math.radians(pitch_deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_roll(roll_deg: float) -> np.ndarray:
    """Camera-frame rotation about the optical axis; positive turns the image clockwise."""
    c, s = math.cos(math.radians(roll_deg)), math.sin(math.radians(roll_deg))
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


# Base alignment: camera right = east, down = -z (world down), forward = north.
_BASE = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def rotation_from_pose(yaw_deg: float, pitch_deg: float, roll_deg: float = 0.0) -> np.ndarray:
    """Compose the world-to-camera rotation as roll . pitch . base . yaw."""
    return rotation_roll(roll_deg) @ rotation_pitch(pitch_deg) @ _BASE @ rotation_yaw(yaw_deg)


def camera_at(
    position: tuple[float, float, float],
    yaw_deg: float,
    pitch_deg: float,
    roll_deg: float = 0.0,
    focal_px: float = 800.0,
    image_size: tuple[float, float] = (640.0, 360.0),
    m_x: float = 1.0,
    m_y: float = 1.0,
    gamma: float = 0.0,
) -> CameraModel:
    """Camera from a world position and yaw/pitch/roll pose, principal point centered."""
    r = rotation_from_pose(yaw_deg, pitch_deg, roll_deg)
    c = np.asarray(position, dtype=float)
    return CameraModel(
        f=focal_px,
        m_x=m_x,
        m_y=m_y,
        gamma=gamma,
        c_x=image_size[0] / 2.0,
        c_y=image_size[1] / 2.0,
        r=r,
        t=-r @ c,
    )


def project_world(cam: CameraModel, p_world) -> ImagePoint:
    """Project one world point. Raises BehindCamera for non-positive camera depth."""
    p = np.asarray(p_world, dtype=float)
    p_cam = cam.r @ p + np.asarray(cam.t, dtype=float)
    z = p_cam[2]
    if z <= 1e-9:
        raise BehindCamera(f"world point {p.tolist()} has camera depth {z:.3e}")
    u = (cam.alpha_x * p_cam[0] + cam.gamma * p_cam[1]) / z + cam.c_x
    v = (cam.alpha_y * p_cam[1]) / z + cam.c_y
    return ImagePoint(x=u, y=v)


def true_vp(cam: CameraModel, direction) -> ImagePoint:
    """Image of the point at infinity of a world direction: dehomogenized K.R.d."""
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm < 1e-12:
        raise ValueError("direction must be nonzero")
    h = cam.intrinsics() @ (cam.r @ (d / norm))
    if abs(h[2]) <= 1e-9:
        raise DirectionAtInfinity("direction is parallel to the image plane")
    return ImagePoint(x=h[0] / h[2], y=h[1] / h[2])


# --- scenario description -----------------------------------------------------


@dataclass(frozen=True)
class Footprint:
    """Physical ground box of an agent, metres: length along heading, width, height."""

    length: float
    width: float
    height: float


@dataclass(frozen=True)
class Agent:
    """One road user on the ground plane following a waypoint polyline at fixed speed."""

    track_id: int
    cls: str
    waypoints: tuple[tuple[float, float], ...]
    speed: float
    footprint: Footprint

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ValueError("agent needs at least one waypoint")
        if self.speed < 0:
            raise ValueError("speed must be nonnegative")


@dataclass(frozen=True, eq=False)
class Scenario:
    camera: CameraModel
    agents: tuple[Agent, ...]
    duration: int
    fps: float
    image_width: float
    image_height: float
    road_axis: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.duration < 1:
            raise ValueError("duration must be at least one frame")


@dataclass(frozen=True)
class NoiseParams:
    """Opt-in detection noise; everything is reproducible from the seed."""

    bbox_sigma: float = 0.0
    dropout: float = 0.0
    drop_ids: bool = False
    seed: int = 0


def agent_state(agent: Agent, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Ground position and unit heading at time t (arc-length along the polyline).

    The agent stops at the final waypoint; a single-waypoint agent is static
    and faces north.
    """
    pts = np.asarray(agent.waypoints, dtype=float)
    if len(pts) == 1 or agent.speed == 0.0:
        heading = np.array([0.0, 1.0])
        if len(pts) > 1:
            seg = pts[1] - pts[0]
            n = np.linalg.norm(seg)
            if n > 1e-12:
                heading = seg / n
        return pts[0].copy(), heading
    dist = agent.speed * t
    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        seg_len = float(np.linalg.norm(seg))
        if seg_len < 1e-12:
            continue
        if dist <= seg_len:
            heading = seg / seg_len
            return a + heading * dist, heading
        dist -= seg_len
    last_seg = pts[-1] - pts[-2]
    n = np.linalg.norm(last_seg)
    heading = last_seg / n if n > 1e-12 else np.array([0.0, 1.0])
    return pts[-1].copy(), heading


def footprint_corners(center: np.ndarray, heading: np.ndarray, fp: Footprint) -> np.ndarray:
    """8 world corners of the agent's box, bottom face on z = 0."""
    h = heading / np.linalg.norm(heading)
    perp = np.array([-h[1], h[0]])
    half_l, half_w = fp.length / 2.0, fp.width / 2.0
    corners = []
    for dz in (0.0, fp.height):
        for sl, sw in ((-1, -1), (-1, 1), (1, 1), (1, -1)):
            ground = center + sl * half_l * h + sw * half_w * perp
            corners.append([ground[0], ground[1], dz])
    return np.array(corners)


def agent_bbox(cam: CameraModel, agent: Agent, t: float) -> tuple[float, float, float, float] | None:
    """Axis-aligned image hull of the agent's 8 projected corners.

    Returns None when any corner is behind the camera (agent out of view).
    """
    center, heading = agent_state(agent, t)
    corners = footprint_corners(center, heading, agent.footprint)
    xs, ys = [], []
    for corner in corners:
        try:
            p = project_world(cam, corner)
        except BehindCamera:
            return None
        xs.append(p.x)
        ys.append(p.y)
    return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class EmittedScene:
    detections: Path
    vp_sidecar: Path
    ground_truth: Path
    segments: Path
    scene_meta: Path


def emit_scenario(
    scenario: Scenario,
    out_dir: str | Path,
    noise: NoiseParams | None = None,
) -> EmittedScene:
    """Write the four pipeline input/oracle files plus scene metadata.

    Outputs use the ingestion formats exactly, so the emitted directory can be
    fed straight to the CLI and the calibration service.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    noise = noise or NoiseParams()
    rng = np.random.default_rng(noise.seed)

    det_path = out / "detections.ndjson"
    gt_path = out / "ground_truth.ndjson"
    with det_path.open("w") as det_f, gt_path.open("w") as gt_f:
        for frame in range(scenario.duration):
            t = frame / scenario.fps
            for agent in scenario.agents:
                center, _ = agent_state(agent, t)
                gt_f.write(
                    json.dumps(
                        {
                            "track_id": agent.track_id,
                            "frame": frame,
                            "t": t,
                            "class": agent.cls,
                            "x_w": center[0],
                            "y_w": center[1],
                        }
                    )
                    + "\n"
                )
                bbox = agent_bbox(scenario.camera, agent, t)
                if bbox is None:
                    continue
                if noise.dropout > 0.0 and rng.random() < noise.dropout:
                    continue
                x1, y1, x2, y2 = bbox
                if noise.bbox_sigma > 0.0:
                    dx1, dy1, dx2, dy2 = rng.normal(0.0, noise.bbox_sigma, size=4)
                    x1, y1, x2, y2 = x1 + dx1, y1 + dy1, x2 + dx2, y2 + dy2
                    x1, x2 = min(x1, x2), max(x1, x2) + 1e-6
                    y1, y2 = min(y1, y2), max(y1, y2) + 1e-6
                record = {
                    "frame": frame,
                    "class": agent.cls,
                    "bbox": [x1, y1, x2, y2],
                    "confidence": 1.0,
                    "t": t,
                }
                if not noise.drop_ids:
                    record["track_id"] = agent.track_id
                det_f.write(json.dumps(record) + "\n")

    vp = true_vp(scenario.camera, (scenario.road_axis[0], scenario.road_axis[1], 0.0))
    vp_path = out / "vp.json"
    vp_path.write_text(json.dumps({"x": vp.x, "y": vp.y, "confidence": 1.0}) + "\n")

    seg_path = out / "segments.json"
    seg_path.write_text(json.dumps(road_edge_segments(scenario)) + "\n")

    meta_path = out / "scene.json"
    meta_path.write_text(
        json.dumps(
            {
                "image_width": scenario.image_width,
                "image_height": scenario.image_height,
                "fps": scenario.fps,
            }
        )
        + "\n"
    )
    return EmittedScene(
        detections=det_path,
        vp_sidecar=vp_path,
        ground_truth=gt_path,
        segments=seg_path,
        scene_meta=meta_path,
    )


def road_edge_segments(
    scenario: Scenario,
    lateral_offsets: tuple[float, ...] = (-8.0, -5.0, -2.0, 2.0, 5.0, 8.0),
    near_range: float = 8.0,
    far_range: float = 35.0,
) -> list[dict]:
    """Project ground lines parallel to the road axis into image segments.

    All of them pass through the road-axis vanishing point, which is what the
    classical estimator recovers.
    """
    cam = scenario.camera
    cam_ground = cam.position()[:2]
    axis = np.asarray(scenario.road_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    perp = np.array([-axis[1], axis[0]])
    segments = []
    for offset in lateral_offsets:
        base = cam_ground + perp * offset
        p_near = base + axis * near_range
        p_far = base + axis * far_range
        try:
            a = project_world(cam, (p_near[0], p_near[1], 0.0))
            b = project_world(cam, (p_far[0], p_far[1], 0.0))
        except BehindCamera:
            continue
        segments.append({"x1": a.x, "y1": a.y, "x2": b.x, "y2": b.y, "weight": 1.0})
    return segments


# --- scenario (de)serialization -------------------------------------------------


def scenario_to_json(scenario: Scenario) -> dict:
    cam = scenario.camera
    pos = cam.position()
    # Recover pose angles is lossy in general; store the raw matrix instead.
    return {
        "image_width": scenario.image_width,
        "image_height": scenario.image_height,
        "fps": scenario.fps,
        "duration": scenario.duration,
        "road_axis": list(scenario.road_axis),
        "camera": {
            "position": pos.tolist(),
            "rotation": cam.r.tolist(),
            "focal_px": cam.f,
            "m_x": cam.m_x,
            "m_y": cam.m_y,
            "gamma": cam.gamma,
            "c_x": cam.c_x,
            "c_y": cam.c_y,
        },
        "agents": [
            {
                "id": a.track_id,
                "class": a.cls,
                "waypoints": [list(w) for w in a.waypoints],
                "speed": a.speed,
                "footprint": [a.footprint.length, a.footprint.width, a.footprint.height],
            }
            for a in scenario.agents
        ],
    }


def scenario_from_json(doc: dict) -> Scenario:
    """Parse a scenario document; raises ParseError with the offending field."""

    def need(obj: dict, key: str, ctx: str):
        if key not in obj:
            raise ParseError(f"scenario: missing field {ctx}{key}")
        return obj[key]

    try:
        cam_doc = need(doc, "camera", "")
        if "rotation" in cam_doc:
            r = np.asarray(cam_doc["rotation"], dtype=float)
            pos = np.asarray(need(cam_doc, "position", "camera."), dtype=float)
            camera = CameraModel(
                f=float(need(cam_doc, "focal_px", "camera.")),
                m_x=float(cam_doc.get("m_x", 1.0)),
                m_y=float(cam_doc.get("m_y", 1.0)),
                gamma=float(cam_doc.get("gamma", 0.0)),
                c_x=float(need(cam_doc, "c_x", "camera.")),
                c_y=float(need(cam_doc, "c_y", "camera.")),
                r=r,
                t=-r @ pos,
            )
        else:
            camera = camera_at(
                position=tuple(need(cam_doc, "position", "camera.")),
                yaw_deg=float(cam_doc.get("yaw_deg", 0.0)),
                pitch_deg=float(need(cam_doc, "pitch_deg", "camera.")),
                roll_deg=float(cam_doc.get("roll_deg", 0.0)),
                focal_px=float(need(cam_doc, "focal_px", "camera.")),
                image_size=(float(need(doc, "image_width", "")), float(need(doc, "image_height", ""))),
                m_x=float(cam_doc.get("m_x", 1.0)),
                m_y=float(cam_doc.get("m_y", 1.0)),
                gamma=float(cam_doc.get("gamma", 0.0)),
            )
        agents = []
        for i, a in enumerate(need(doc, "agents", "")):
            fp = need(a, "footprint", f"agents[{i}].")
            agents.append(
                Agent(
                    track_id=int(need(a, "id", f"agents[{i}].")),
                    cls=str(need(a, "class", f"agents[{i}].")),
                    waypoints=tuple(tuple(w) for w in need(a, "waypoints", f"agents[{i}].")),
                    speed=float(need(a, "speed", f"agents[{i}].")),
                    footprint=Footprint(length=fp[0], width=fp[1], height=fp[2]),
                )
            )
        return Scenario(
            camera=camera,
            agents=tuple(agents),
            duration=int(need(doc, "duration", "")),
            fps=float(need(doc, "fps", "")),
            image_width=float(need(doc, "image_width", "")),
            image_height=float(need(doc, "image_height", "")),
            road_axis=tuple(doc.get("road_axis", (0.0, 1.0))),
        )
    except ParseError:
        raise
    except (TypeError, ValueError, KeyError, IndexError) as exc:
        raise ParseError(f"scenario: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"scenario file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario: invalid JSON: {exc}") from exc
    return scenario_from_json(doc)
