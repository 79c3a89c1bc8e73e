import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from topview import synth
from topview.errors import EmptyInput, SchemaError
from topview.ingest import (
    Detection,
    StationaryConfig,
    Track,
    TrackerConfig,
    TrackSample,
    assemble_tracks,
    load_detections,
    parse_detections,
    repair_ids,
    smooth_trajectory,
    smoothed_anchors,
    stationary_flags,
)


def det(frame, x, y=100.0, w=40.0, h=80.0, cls="car", track_id=None, conf=0.9):
    return Detection(
        frame=frame, cls=cls, bbox=(x, y, x + w, y + h),
        confidence=conf, track_id=track_id,
    )


def track_of(positions, cls="car", tid=1, w=40.0, h=80.0, start=0):
    samples = [
        TrackSample(frame=start + i, bbox=(x - w / 2, y - h, x + w / 2, y))
        for i, (x, y) in enumerate(positions)
    ]
    return Track(id=tid, cls=cls, samples=samples)


class TestParse:
    def test_single_valid_line(self):
        lines = ['{"frame": 3, "class": "person", "bbox": [1, 2, 5, 9], "confidence": 0.8}']
        dets = parse_detections(lines)
        assert len(dets) == 1
        assert dets[0].frame == 3 and dets[0].cls == "person"
        assert dets[0].anchor.x == 3.0 and dets[0].anchor.y == 9.0

    def test_inverted_bbox_rejected(self):
        lines = ['{"frame": 0, "class": "car", "bbox": [5, 2, 1, 9], "confidence": 0.8}']
        with pytest.raises(SchemaError) as exc:
            parse_detections(lines)
        assert exc.value.line == 1 and exc.value.field == "bbox"

    def test_unknown_class_rejected(self):
        lines = ['{"frame": 0, "class": "boat", "bbox": [1, 2, 5, 9], "confidence": 0.8}']
        with pytest.raises(SchemaError):
            parse_detections(lines)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            parse_detections(["", "   "])

    def test_out_of_order_frames_sorted_stably(self):
        lines = [
            '{"frame": 5, "class": "car", "bbox": [0, 0, 1, 1], "confidence": 0.5}',
            '{"frame": 1, "class": "car", "bbox": [2, 0, 3, 1], "confidence": 0.5}',
            '{"frame": 5, "class": "car", "bbox": [4, 0, 5, 1], "confidence": 0.5}',
        ]
        dets = parse_detections(lines)
        assert [d.frame for d in dets] == [1, 5, 5]
        assert dets[1].bbox[0] == 0.0 and dets[2].bbox[0] == 4.0

    def test_synthetic_file_matches_oracle_count_and_order(self, tmp_path):
        cam = synth.camera_at((0.0, 0.0, 6.0), yaw_deg=0.0, pitch_deg=20.0)
        agents = tuple(
            synth.Agent(i + 1, "person", ((2.0 * i - 3.0, 10.0), (2.0 * i - 3.0, 30.0)),
                        1.2, synth.Footprint(0.4, 0.4, 1.7))
            for i in range(5)
        )
        scenario = synth.Scenario(
            camera=cam, agents=agents, duration=200, fps=10.0,
            image_width=640.0, image_height=360.0,
        )
        emitted = synth.emit_scenario(scenario, tmp_path)
        oracle_rows = [json.loads(l) for l in emitted.detections.read_text().splitlines()]
        assert len(oracle_rows) == 1000
        dets = load_detections(emitted.detections)
        assert len(dets) == len(oracle_rows)
        assert [d.frame for d in dets] == [r["frame"] for r in oracle_rows]
        assert all(d.track_id == r["track_id"] for d, r in zip(dets, oracle_rows))


class TestAssemble:
    def test_pass_through_grouping(self):
        dets = [det(0, 0, track_id=1), det(1, 2, track_id=1), det(0, 100, track_id=2)]
        tracks = assemble_tracks(dets)
        assert [(t.id, len(t.samples)) for t in tracks] == [(1, 2), (2, 1)]

    def test_empty_input_empty_output(self):
        assert assemble_tracks([]) == []

    def test_two_diverging_boxes_no_switches(self):
        # Derived oracle: the generating ids. Two objects drift apart for 50
        # frames; greedy IoU must reproduce the oracle grouping exactly.
        oracle = []
        for f in range(50):
            oracle.append(det(f, 100.0 + 3.0 * f, track_id=1))
            oracle.append(det(f, 100.0 - 3.0 * f, y=150.0, track_id=2))
        stripped = [
            Detection(frame=d.frame, cls=d.cls, bbox=d.bbox, confidence=d.confidence)
            for d in oracle
        ]
        tracks = assemble_tracks(stripped)
        assert len(tracks) == 2
        oracle_groups = {
            tid: [d.bbox for d in oracle if d.track_id == tid] for tid in (1, 2)
        }
        got_groups = sorted([[s.bbox for s in t.samples] for t in tracks])
        assert got_groups == sorted(oracle_groups.values())

    def test_expiry_opens_new_track(self):
        cfg = TrackerConfig(max_age=10)
        dets = [det(0, 50.0), det(11 + 1, 50.0)]  # absent for max_age + 1 frames
        tracks = assemble_tracks(dets, cfg)
        assert len(tracks) == 2

    def test_within_max_age_rejoins(self):
        cfg = TrackerConfig(max_age=10)
        dets = [det(0, 50.0), det(10, 50.0)]
        tracks = assemble_tracks(dets, cfg)
        assert len(tracks) == 1

    @given(
        data=st.lists(
            st.tuples(
                st.integers(0, 30),            # frame
                st.integers(0, 500),           # x1
                st.integers(0, 300),           # y1
                st.integers(1, 60),            # width
                st.integers(1, 60),            # height
                st.sampled_from(["person", "car", "bus"]),
            ),
            max_size=40,
        )
    )
    def test_conservation_without_ids(self, data):
        dets = [
            Detection(frame=f, cls=c, bbox=(x, y, x + w, y + h), confidence=0.5)
            for f, x, y, w, h, c in data
        ]
        dets.sort(key=lambda d: d.frame)
        tracks = assemble_tracks(dets)
        emitted = sorted(
            (s.frame, s.bbox) for t in tracks for s in t.samples
        )
        assert emitted == sorted((d.frame, d.bbox) for d in dets)
        # No detection lands in two tracks and frames rise strictly per track.
        for t in tracks:
            frames = [s.frame for s in t.samples]
            assert frames == sorted(set(frames))


class TestRepair:
    def test_occlusion_split_merged(self):
        # One straight mover split by a 5-frame occlusion.
        a = track_of([(100.0 + 4.0 * i, 200.0) for i in range(10)], tid=1)
        b = track_of(
            [(100.0 + 4.0 * (15 + i), 200.0) for i in range(10)], tid=7, start=15
        )
        merged = repair_ids([a, b])
        assert len(merged) == 1
        assert merged[0].id == 1
        assert len(merged[0].samples) == 20
        frames = [s.frame for s in merged[0].samples]
        assert frames == sorted(frames)

    def test_distinct_classes_never_merge(self):
        a = track_of([(100.0 + 4.0 * i, 200.0) for i in range(10)], tid=1, cls="car")
        b = track_of(
            [(100.0 + 4.0 * (13 + i), 200.0) for i in range(10)], tid=2, cls="bus", start=13
        )
        assert len(repair_ids([a, b])) == 2

    def test_jitter_track_removed(self):
        t = track_of([(10.0, 10.0), (11.0, 10.0)], tid=1)
        assert repair_ids([t]) == []

    def test_overlapping_tracks_never_merge(self):
        a = track_of([(100.0 + 4.0 * i, 200.0) for i in range(10)], tid=1)
        b = track_of([(100.0 + 4.0 * i, 200.0) for i in range(10)], tid=2, start=5)
        merged = repair_ids([a, b])
        assert sorted(t.id for t in merged) == [1, 2]

    def test_heading_reversal_blocks_merge(self):
        a = track_of([(100.0 + 4.0 * i, 200.0) for i in range(10)], tid=1)
        # Continuation jumps backwards against A's heading.
        b = track_of([(100.0 - 4.0 * i, 200.0) for i in range(10)], tid=2, start=12)
        assert len(repair_ids([a, b])) == 2

    def test_sample_count_conserved_modulo_min_len(self):
        a = track_of([(100.0 + 4.0 * i, 200.0) for i in range(6)], tid=1)
        b = track_of([(100.0 + 4.0 * (9 + i), 200.0) for i in range(6)], tid=2, start=9)
        c = track_of([(400.0, 80.0)], tid=3)  # below min_len, dropped
        out = repair_ids([a, b, c])
        assert sum(len(t.samples) for t in out) == 12


class TestSmoothing:
    def test_constant_position_collapses(self):
        t = track_of([(50.0, 70.0)] * 8)
        line = smooth_trajectory(t)
        assert len(line.points) == 1
        assert (line.points[0].x, line.points[0].y) == (50.0, 70.0)

    def test_points_on_line_stay_on_line(self):
        t = track_of([(float(x), 2.0 * x) for x in range(0, 40, 3)])
        for p in smoothed_anchors(t):
            assert abs(p.y - 2.0 * p.x) < 1e-9

    def test_length_preserved_and_even_window_rejected(self):
        t = track_of([(float(i), 0.0 + i) for i in range(7)])
        assert len(smoothed_anchors(t, 5)) == 7
        with pytest.raises(ValueError):
            smoothed_anchors(t, 4)

    def test_noise_reduced_on_straight_path(self):
        rng = np.random.default_rng(123)
        xs = [4.0 * i for i in range(60)]
        noise = rng.normal(0.0, 2.0, size=60)
        t = track_of([(x, 0.5 * x + 3.0 + e) for x, e in zip(xs, noise)])

        def rms(points):
            return math.sqrt(
                sum((p.y - (0.5 * p.x + 3.0)) ** 2 for p in points) / len(points)
            )

        assert rms(smoothed_anchors(t)) < rms(t.anchors)

    @given(
        dx=st.floats(-500, 500),
        dy=st.floats(-500, 500),
        n=st.integers(2, 15),
    )
    def test_commutes_with_translation(self, dx, dy, n):
        base = track_of([(10.0 * i, 3.0 * i + 7.0) for i in range(n)])
        moved = Track(
            id=1, cls="car",
            samples=[
                TrackSample(frame=s.frame, bbox=(
                    s.bbox[0] + dx, s.bbox[1] + dy, s.bbox[2] + dx, s.bbox[3] + dy))
                for s in base.samples
            ],
        )
        for p, q in zip(smoothed_anchors(base), smoothed_anchors(moved)):
            assert math.isclose(q.x, p.x + dx, abs_tol=1e-9)
            assert math.isclose(q.y, p.y + dy, abs_tol=1e-9)


class TestStationary:
    def test_fixed_box_all_true(self):
        t = track_of([(300.0, 200.0)] * 100)
        assert all(stationary_flags(t))

    def test_constant_velocity_all_false(self):
        t = track_of([(10.0 + 5.0 * i, 200.0) for i in range(60)])
        assert not any(stationary_flags(t))

    def test_stop_and_go_transitions_within_window(self):
        cfg = StationaryConfig(window=25)
        positions = []
        for f in range(120):
            if f < 40:
                positions.append((5.0 * f, 200.0))
            elif f < 80:
                positions.append((200.0, 200.0))
            else:
                positions.append((200.0 + 5.0 * (f - 79), 200.0))
        t = track_of(positions)
        flags = stationary_flags(t, cfg)
        assert not any(flags[:40])
        assert all(flags[64:80])
        assert not any(flags[80:])
        first_true = flags.index(True)
        assert 40 <= first_true <= 40 + cfg.window
