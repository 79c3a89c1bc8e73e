"""Shared oracle-side helpers for the test suite.

These deliberately re-derive results with plain numpy so they stay independent
of the library code paths they check.
"""

from __future__ import annotations

import math

import numpy as np


def apply_matrix(m: np.ndarray, x: float, y: float) -> tuple[float, float]:
    """Plain projective application of a raw 3x3 matrix."""
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    return (
        (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w,
        (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w,
    )


def random_homography(rng: np.random.Generator, min_det: float = 0.05) -> np.ndarray:
    """Random matrix with entries in [-1, 1], h22 = 1, rejecting near-singular draws."""
    while True:
        m = rng.uniform(-1.0, 1.0, size=(3, 3))
        m[2, 2] = 1.0
        if abs(np.linalg.det(m)) > min_det:
            return m


def min_denominator(m: np.ndarray, points) -> float:
    """Smallest |w| over the given (x, y) points; guards against near-horizon draws."""
    return min(abs(m[2, 0] * x + m[2, 1] * y + m[2, 2]) for x, y in points)


def cross_ratio(points) -> float:
    """Cross ratio of 4 collinear 2D points via signed positions along the line."""
    p = np.asarray(points, dtype=float)
    d = p[-1] - p[0]
    d = d / np.linalg.norm(d)
    t = (p - p[0]) @ d
    return ((t[2] - t[0]) * (t[3] - t[1])) / ((t[2] - t[1]) * (t[3] - t[0]))


def fit_similarity(src: np.ndarray, dst: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares similarity (scale, rotation, translation) mapping src to dst.

    Standard Procrustes solution without reflection; src and dst are (n, 2).
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    sc = src - mu_s
    dc = dst - mu_d
    cov = dc.T @ sc / len(src)
    u, s, vt = np.linalg.svd(cov)
    sign = np.sign(np.linalg.det(u @ vt))
    d = np.diag([1.0, sign])
    rot = u @ d @ vt
    var_s = (sc ** 2).sum() / len(src)
    scale = (s * np.diag(d)).sum() / var_s
    t = mu_d - scale * rot @ mu_s
    return scale, rot, t


def similarity_rms(src: np.ndarray, dst: np.ndarray) -> float:
    """RMS residual of the best similarity transform from src onto dst."""
    scale, rot, t = fit_similarity(src, dst)
    mapped = (scale * (rot @ np.asarray(src, dtype=float).T)).T + t
    return float(np.sqrt(np.mean(np.sum((mapped - dst) ** 2, axis=1))))


def lines_through(point, angles, r1=40.0, r2=200.0, rng=None, sigma=0.0):
    """Segment tuples (x1, y1, x2, y2) whose lines pass through `point`."""
    px, py = point
    segments = []
    for theta in angles:
        dx, dy = math.cos(theta), math.sin(theta)
        ends = np.array([[px + r1 * dx, py + r1 * dy], [px + r2 * dx, py + r2 * dy]])
        if rng is not None and sigma > 0:
            ends = ends + rng.normal(0.0, sigma, size=ends.shape)
        segments.append((ends[0, 0], ends[0, 1], ends[1, 0], ends[1, 1]))
    return segments


def noisy_vp_fixture(seed, point=(100.0, 50.0), n_lines=20, sigma=1.0, n_outliers=5):
    """The stock estimator stress fixture: noisy concurrent lines plus clutter."""
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.2, math.pi - 0.2, size=n_lines)
    segments = lines_through(point, angles, rng=rng, sigma=sigma)
    for _ in range(n_outliers):
        a = rng.uniform(0, 640, size=2)
        b = a + rng.uniform(-200, 200, size=2)
        if math.hypot(*(b - a)) < 10:
            b = a + np.array([50.0, 35.0])
        segments.append((a[0], a[1], b[0], b[1]))
    return segments


def brute_force_violations(streams, cal, threshold, min_duration=1):
    """Independent frame scan for social-distancing events: nested loops only."""
    frames = sorted({s.frame for st_ in streams for s in st_.states})
    persons = {}
    for st_ in streams:
        for s in st_.states:
            if s.cls == "person":
                persons.setdefault(s.frame, []).append(s)
    hits = {}
    for f in frames:
        objs = persons.get(f, [])
        for a in objs:
            for b in objs:
                if a.track_id >= b.track_id:
                    continue
                d = cal.meters_per_unit * math.hypot(
                    a.position.u - b.position.u, a.position.v - b.position.v
                )
                if d < threshold:
                    hits.setdefault((a.track_id, b.track_id), []).append((f, d))
    events = []
    for pair, frame_dists in hits.items():
        frame_dists.sort()
        run = [frame_dists[0]]
        for fd in frame_dists[1:] + [(None, None)]:
            if fd[0] is not None and fd[0] == run[-1][0] + 1:
                run.append(fd)
                continue
            if len(run) >= min_duration:
                events.append((run[0][0], run[-1][0], pair, min(d for _, d in run)))
            if fd[0] is not None:
                run = [fd]
    return sorted(events)


def fit_depth_scale(bev_pts: np.ndarray, world_pts: np.ndarray) -> tuple[float, float]:
    """Depth-scale and metre calibration from ground-truth correspondences.

    Fits the affine map world = A @ bev + t, then returns (z, meters_per_unit)
    where z equalizes the metre-per-unit scale of the depth axis against the
    lateral axis. This mirrors what an operator does with the z slider against
    a map, using known ground points instead of eyeballing.
    """
    bev_pts = np.asarray(bev_pts, dtype=float)
    world_pts = np.asarray(world_pts, dtype=float)
    design = np.hstack([bev_pts, np.ones((len(bev_pts), 1))])
    coef, *_ = np.linalg.lstsq(design, world_pts, rcond=None)
    a = coef[:2].T  # 2x2 linear part, columns act on (u, v)
    m_u = float(np.linalg.norm(a[:, 0]))
    m_v = float(np.linalg.norm(a[:, 1]))
    return m_v / m_u, m_u
