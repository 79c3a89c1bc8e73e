import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from topview.analytics import (
    CameraSite,
    aggregate_scenes,
    detect_violations,
    load_camera_registry,
    occupancy,
    pairwise_distances,
)
from topview.bev import BevObject, CalibrationParams, TokenStream
from topview.box3d import Orientation
from topview.errors import MixedCalibration, UnknownCamera
from topview.geometry import BevPoint

CAL = CalibrationParams()


def state(tid, frame, u, v, cls="person", cal=None):
    return BevObject(
        track_id=tid, cls=cls, position=BevPoint(u, v), frame=frame,
        t=frame / 10.0, stationary=False, orientation=Orientation.MOVING_STRAIGHT,
        calibration=cal,
    )


def stream_from_path(tid, path, cls="person", start=0):
    return TokenStream(
        token_id=tid,
        states=tuple(
            state(tid, start + i, u, v, cls=cls) for i, (u, v) in enumerate(path)
        ),
    )


from helpers import brute_force_violations


class TestPairwise:
    def test_three_four_five(self):
        d = pairwise_distances([state(1, 0, 0.0, 0.0), state(2, 0, 3.0, 4.0)], CAL)
        assert d[0, 1] == d[1, 0] == 5.0
        assert d[0, 0] == d[1, 1] == 0.0

    def test_single_object(self):
        d = pairwise_distances([state(1, 0, 2.0, 2.0)], CAL)
        assert d.shape == (1, 1) and d[0, 0] == 0.0

    def test_meters_per_unit_scales(self):
        cal = CalibrationParams(meters_per_unit=0.5)
        d = pairwise_distances([state(1, 0, 0.0, 0.0), state(2, 0, 3.0, 4.0)], cal)
        assert d[0, 1] == 2.5

    def test_matches_brute_force_on_random_objects(self):
        rng = np.random.default_rng(11)
        objs = [
            state(i, 0, float(u), float(v))
            for i, (u, v) in enumerate(rng.uniform(-30, 30, size=(50, 2)))
        ]
        got = pairwise_distances(objs, CAL)
        for i in range(50):
            for j in range(50):
                want = math.hypot(
                    objs[i].position.u - objs[j].position.u,
                    objs[i].position.v - objs[j].position.v,
                )
                assert got[i, j] == pytest.approx(want, abs=1e-12)

    def test_mixed_calibration_rejected(self):
        other = CalibrationParams(z_value=2.0)
        objs = [state(1, 0, 0.0, 0.0, cal=other), state(2, 0, 1.0, 1.0)]
        with pytest.raises(MixedCalibration):
            pairwise_distances(objs, CAL)

    @given(
        angle=st.floats(0, 2 * math.pi),
        dx=st.floats(-100, 100),
        dy=st.floats(-100, 100),
    )
    def test_rigid_transform_invariance(self, angle, dx, dy):
        pts = [(0.0, 0.0), (3.0, 4.0), (-7.0, 2.0), (11.0, -5.0)]
        objs = [state(i, 0, u, v) for i, (u, v) in enumerate(pts)]
        c, s = math.cos(angle), math.sin(angle)
        moved = [
            state(i, 0, c * u - s * v + dx, s * u + c * v + dy)
            for i, (u, v) in enumerate(pts)
        ]
        base = pairwise_distances(objs, CAL)
        rot = pairwise_distances(moved, CAL)
        assert np.max(np.abs(base - rot)) < 1e-9


class TestViolations:
    def test_sustained_pair_is_one_event(self):
        a = stream_from_path(1, [(0.0, 0.0)] * 10)
        b = stream_from_path(2, [(1.5, 0.0)] * 10)
        events, count = detect_violations([a, b], CAL, threshold=2.0)
        assert count == 1
        ev = events[0]
        assert ev.pair == (1, 2)
        assert (ev.frame, ev.frame_end) == (0, 9)
        assert ev.distance == 1.5

    def test_person_car_pair_ignored(self):
        a = stream_from_path(1, [(0.0, 0.0)] * 5)
        b = stream_from_path(2, [(0.5, 0.0)] * 5, cls="car")
        events, count = detect_violations([a, b], CAL)
        assert events == [] and count == 0

    def test_min_duration_debounces(self):
        # Close only on frames 2 and 3, then again at 6: runs of 2 and 1.
        path_a = [(0.0, 0.0)] * 8
        path_b = [(5.0, 0.0)] * 2 + [(1.0, 0.0)] * 2 + [(5.0, 0.0)] * 2 + [(1.0, 0.0)] + [(5.0, 0.0)]
        a, b = stream_from_path(1, path_a), stream_from_path(2, path_b)
        events, _ = detect_violations([a, b], CAL, min_duration=2)
        assert [(e.frame, e.frame_end) for e in events] == [(2, 3)]

    def test_scripted_crowd_matches_brute_force(self):
        streams = []
        for i in range(20):
            # Walkers crisscross a 30 x 30 court deterministically.
            sx, sy = float(i % 7) * 4.0, float(i % 5) * 6.0
            ex, ey = 30.0 - sx, 30.0 - sy
            path = [
                (sx + (ex - sx) * k / 59.0, sy + (ey - sy) * k / 59.0)
                for k in range(60)
            ]
            streams.append(stream_from_path(i + 1, path))
        events, count = detect_violations(streams, CAL, threshold=2.0)
        got = sorted((e.frame, e.frame_end, e.pair, e.distance) for e in events)
        want = brute_force_violations(streams, CAL, threshold=2.0)
        assert count == len(want)
        assert [(f, fe, p) for f, fe, p, _ in got] == [(f, fe, p) for f, fe, p, _ in want]
        for g, w in zip(got, want):
            assert g[3] == pytest.approx(w[3], abs=1e-12)

    def test_stream_order_invariance(self):
        a = stream_from_path(1, [(0.0, 0.0)] * 6)
        b = stream_from_path(2, [(1.0, 0.0)] * 6)
        c = stream_from_path(3, [(0.5, 0.5)] * 6)
        e1, _ = detect_violations([a, b, c], CAL)
        e2, _ = detect_violations([c, a, b], CAL)
        assert e1 == e2

    @pytest.mark.parametrize("thresholds", [(0.5, 1.0, 2.0, 4.0, 8.0)])
    def test_threshold_monotonicity(self, thresholds):
        rng = np.random.default_rng(3)
        streams = [
            stream_from_path(i + 1, rng.uniform(0, 12, size=(40, 2)).tolist())
            for i in range(8)
        ]
        counts = [detect_violations(streams, CAL, threshold=t)[1] for t in thresholds]
        assert counts == sorted(counts)


class TestOccupancy:
    def test_static_object_single_cell(self):
        s = stream_from_path(1, [(3.3, 4.4)] * 100)
        grid = occupancy([s], cell_size=1.0)
        layer = grid.counts["person"]
        assert layer.sum() == 100
        assert (layer > 0).sum() == 1
        row, col = grid.cell_of(3.3, 4.4)
        assert layer[row, col] == 100

    def test_empty_stream(self):
        grid = occupancy([], cell_size=1.0)
        assert grid.counts == {} and grid.total() == 0

    def test_scripted_path_cell_counts(self):
        # Walk along u through five unit cells, two samples per cell.
        path = [(0.25 + 0.5 * k, 0.5) for k in range(10)]
        grid = occupancy([stream_from_path(1, path)], cell_size=1.0)
        layer = grid.counts["person"]
        assert layer.sum() == 10
        occupied = sorted(
            grid.cell_of(u, v) for (u, v) in {(0.5, 0.5), (1.5, 0.5), (2.5, 0.5), (3.5, 0.5), (4.5, 0.5)}
        )
        for cell in occupied:
            assert layer[cell] == 2
        assert (layer > 0).sum() == 5

    def test_conservation_across_classes(self):
        s1 = stream_from_path(1, [(0.0, 0.0), (5.0, 5.0)], cls="car")
        s2 = stream_from_path(2, [(1.0, 1.0)] * 3)
        grid = occupancy([s1, s2], cell_size=2.0)
        assert grid.total() == 5
        assert set(grid.counts) == {"car", "person"}


class TestDownsampling:
    def test_keeps_first_state_per_bucket(self):
        from topview.analytics import downsample_streams

        s = stream_from_path(1, [(float(k), 0.0) for k in range(30)])  # t = k/10
        thinned = downsample_streams([s], sample_fps=2.0)
        ts = [st_.t for st_ in thinned[0].states]
        assert ts == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]

    def test_full_rate_is_identity(self):
        from topview.analytics import downsample_streams

        s = stream_from_path(1, [(float(k), 0.0) for k in range(10)])
        assert downsample_streams([s], sample_fps=10.0)[0].states == s.states

    def test_bad_rate_rejected(self):
        from topview.analytics import downsample_streams

        with pytest.raises(ValueError):
            downsample_streams([], sample_fps=0.0)


class TestAggregation:
    REGISTRY = {
        "cam-a": CameraSite("cam-a", 51.5, -0.1, 0.0),
        "cam-b": CameraSite("cam-b", 51.6, -0.2, 90.0),
    }

    def test_two_cameras(self):
        doc = aggregate_scenes({"cam-a": 3, "cam-b": 0}, self.REGISTRY)
        assert len(doc["features"]) == 2
        counts = {f["properties"]["camera_id"]: f["properties"]["violation_count"]
                  for f in doc["features"]}
        assert counts == {"cam-a": 3, "cam-b": 0}

    def test_unknown_camera(self):
        with pytest.raises(UnknownCamera):
            aggregate_scenes({"cam-zz": 1}, self.REGISTRY)

    def test_total_is_sum_of_parts(self):
        registry = {
            f"c{i}": CameraSite(f"c{i}", 51.0 + i * 0.01, -0.1, 0.0)
            for i in range(10)
        }
        counts = {f"c{i}": i * 2 for i in range(10)}
        doc = aggregate_scenes(counts, registry)
        total = sum(f["properties"]["violation_count"] for f in doc["features"])
        assert total == sum(counts.values())

    def test_registry_csv_loading(self, tmp_path):
        p = tmp_path / "registry.csv"
        p.write_text("camera_id,lat,lon,heading\ncam-a,51.5,-0.1,0\ncam-b,51.6,-0.2,90\n")
        registry = load_camera_registry(p)
        assert set(registry) == {"cam-a", "cam-b"}
        assert registry["cam-b"].heading == 90.0
