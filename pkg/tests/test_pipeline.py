from topview import synth
from topview.bev import CalibrationParams
from topview.ingest import Detection, load_detections
from topview.pipeline import PipelineConfig, run_pipeline
from topview.vp import VanishingPoint, load_vp_sidecar


def emitted_scene(tmp_path, duration=60, noise=None):
    cam = synth.camera_at((0.0, 0.0, 6.0), yaw_deg=0.0, pitch_deg=20.0)
    agents = (
        synth.Agent(1, "person", ((-1.0, 8.0), (-1.0, 35.0)), 1.4, synth.Footprint(0.4, 0.4, 1.7)),
        synth.Agent(2, "car", ((2.0, 12.0), (2.0, 40.0)), 4.0, synth.Footprint(4.2, 1.8, 1.5)),
    )
    scenario = synth.Scenario(
        camera=cam, agents=agents, duration=duration, fps=10.0,
        image_width=640.0, image_height=360.0,
    )
    return synth.emit_scenario(scenario, tmp_path, noise)


class TestRunPipeline:
    def test_streams_cover_tracks_with_increasing_frames(self, tmp_path):
        emitted = emitted_scene(tmp_path)
        dets = load_detections(emitted.detections)
        vp = load_vp_sidecar(emitted.vp_sidecar)
        result = run_pipeline(dets, vp, 640.0, 360.0)
        assert len(result.streams) == 2
        for stream in result.streams:
            frames = [s.frame for s in stream.states]
            assert frames == sorted(frames)
            assert len(set(frames)) == len(frames)
        assert result.dropped_above_horizon == 0

    def test_geo_attached_only_when_anchored(self, tmp_path):
        emitted = emitted_scene(tmp_path)
        dets = load_detections(emitted.detections)
        vp = load_vp_sidecar(emitted.vp_sidecar)
        plain = run_pipeline(dets, vp, 640.0, 360.0)
        assert all(s.geo is None for st in plain.streams for s in st.states)
        cal = CalibrationParams(camera_lat=51.5, camera_lon=-0.12, heading=0.0)
        geo = run_pipeline(dets, vp, 640.0, 360.0, PipelineConfig(calibration=cal))
        assert all(s.geo is not None for st in geo.streams for s in st.states)

    def test_fps_supplies_timebase(self):
        dets = [
            Detection(frame=f, cls="person", bbox=(100.0, 200.0, 120.0, 250.0 + f), confidence=0.9, track_id=1)
            for f in range(5)
        ]
        vp = VanishingPoint(320.0, 90.0)
        result = run_pipeline(dets, vp, 640.0, 360.0, PipelineConfig(fps=25.0))
        ts = [s.t for s in result.streams[0].states]
        assert ts == [f / 25.0 for f in range(5)]

    def test_above_horizon_samples_dropped_and_counted(self):
        # Track walks upward past the horizon at y=90 (fast enough that the
        # smoothed anchor also ends above it).
        dets = [
            Detection(frame=f, cls="person", bbox=(300.0, 0.0, 330.0, 300.0 - 70.0 * f), confidence=0.9, track_id=1)
            for f in range(5)
        ]
        vp = VanishingPoint(320.0, 90.0)
        result = run_pipeline(dets, vp, 640.0, 360.0)
        kept = sum(len(s.states) for s in result.streams)
        assert result.dropped_above_horizon > 0
        assert kept + result.dropped_above_horizon == 5

    def test_box3d_present_and_contained(self, tmp_path):
        emitted = emitted_scene(tmp_path)
        dets = load_detections(emitted.detections)
        vp = load_vp_sidecar(emitted.vp_sidecar)
        result = run_pipeline(dets, vp, 640.0, 360.0)
        by_key = {
            (s.frame, s.track_id): s for st in result.streams for s in st.states
        }
        for d in dets:
            state = by_key.get((d.frame, d.track_id))
            if state is None:
                continue
            x1, y1, x2, y2 = state.box3d.source_bbox
            for c in state.box3d.corners:
                assert x1 <= c.x <= x2 and y1 <= c.y <= y2
