"""Homogeneous-coordinate primitives and the vanishing-point perspective grid.

Image coordinates: x grows rightward, y grows downward, origin at the top-left
pixel. BEV coordinates: u is lateral, v is depth and grows away from the
camera, so the bottom image edge maps to v = 0.

The four-point plane correspondence is solved with a normalized DLT
(Hartley-style point conditioning before the 8x8 solve).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateConfiguration,
    DegenerateGrid,
    PointAtInfinity,
    VanishingPointBelowScene,
)


@dataclass(frozen=True)
class Tolerances:
    """Tie and degeneracy tolerances, centralized so no literal is scattered."""

    homography_w: float = 1e-12        # |w| below this is a point at infinity
    homography_det: float = 1e-12      # |det| of normalized H below this is singular
    dlt_condition: float = 1e12        # condition number above this is rank-deficient
    collinearity: float = 1e-9         # normalized cross product below this is collinear


TOL = Tolerances()


@dataclass(frozen=True)
class ImagePoint:
    """Pixel-space point; may lie outside image bounds (vanishing points often do)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"image point must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class BevPoint:
    """Bird's-eye-view point in BEV units: u lateral, v depth away from camera."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"BEV point must be finite, got ({self.u}, {self.v})")


@dataclass(frozen=True)
class HorizonLine:
    """Horizontal image line y = const holding the ground plane's points at infinity."""

    y: float


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 invertible projective map, normalized so h22 = 1 when possible.

    When |h22| falls below the tolerance the matrix is normalized to unit
    Frobenius norm instead.
    """

    h: np.ndarray

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Homography":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {m.shape}")
        if abs(m[2, 2]) > TOL.homography_w:
            m = m / m[2, 2]
        else:
            m = m / np.linalg.norm(m)
        if abs(np.linalg.det(m)) <= TOL.homography_det:
            raise DegenerateConfiguration(
                f"homography is singular (det={np.linalg.det(m):.3e})"
            )
        return cls(h=m)

    def inverse(self) -> "Homography":
        return Homography.from_matrix(np.linalg.inv(self.h))


@dataclass(frozen=True)
class Quadrangle:
    """Four image points in fixed order: top-left, top-right, bottom-right, bottom-left.

    Must be convex with no three corners collinear.
    """

    corners: tuple[ImagePoint, ImagePoint, ImagePoint, ImagePoint]

    def __post_init__(self):
        crosses = []
        pts = self.corners
        for i in range(4):
            a, b, c = pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]
            e1 = (b.x - a.x, b.y - a.y)
            e2 = (c.x - b.x, c.y - b.y)
            n1 = math.hypot(*e1)
            n2 = math.hypot(*e2)
            if n1 < 1e-12 or n2 < 1e-12:
                raise ValueError("quadrangle has coincident corners")
            crosses.append((e1[0] * e2[1] - e1[1] * e2[0]) / (n1 * n2))
        if any(abs(c) <= TOL.collinearity for c in crosses):
            raise ValueError("quadrangle has three (near-)collinear corners")
        if not (all(c > 0 for c in crosses) or all(c < 0 for c in crosses)):
            raise ValueError("quadrangle is not convex")


@dataclass(frozen=True)
class GridParams:
    """Knobs for the automated perspective-grid construction.

    alpha places the upper horizontal line between the vanishing point and the
    bottom edge: y_upper = vp.y + alpha * (image_h - vp.y). Points nearer the
    horizon than that line have unbounded BEV depth, so alpha caps usable depth.
    subdivisions counts the equal intervals on the bottom line; only the
    outermost pair of radial lines defines the source quadrangle.
    """

    alpha: float = 0.25
    subdivisions: int = 8
    bev_width: float = 20.0
    bev_depth: float = 40.0


@dataclass(frozen=True)
class PerspectiveGrid:
    """Radial-line grid anchored at the vanishing point.

    src is the image-plane quadrangle; it corresponds corner-for-corner to the
    BEV rectangle [0, bev_width] x [0, bev_depth], bottom image edge at v = 0.
    """

    src: Quadrangle
    bev_width: float
    bev_depth: float
    vp: ImagePoint
    subdivisions: int
    bottom_points: tuple[ImagePoint, ...] = field(repr=False, default=())


def solve_homography(
    pairs: list[tuple[ImagePoint, BevPoint]] | tuple[tuple[ImagePoint, BevPoint], ...],
) -> Homography:
    """Solve the 3x3 plane map from exactly four point correspondences.

    Uses Hartley normalization on both point sets, solves the 8x8 linear
    system with h22 = 1, then denormalizes. Raises DegenerateConfiguration
    when the conditioned system has condition number above ``TOL.dlt_condition``.
    """
    if len(pairs) != 4:
        raise ValueError(f"need exactly 4 correspondences, got {len(pairs)}")
    src = np.array([[p.x, p.y] for p, _ in pairs], dtype=float)
    dst = np.array([[q.u, q.v] for _, q in pairs], dtype=float)

    t_src, src_n = _hartley(src)
    t_dst, dst_n = _hartley(dst)

    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = src_n[i]
        u, v = dst_n[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        b[2 * i] = u
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i + 1] = v

    if not np.all(np.isfinite(a)) or np.linalg.cond(a) > TOL.dlt_condition:
        raise DegenerateConfiguration("correspondences yield a rank-deficient system")

    sol = np.linalg.solve(a, b)
    h_n = np.array(
        [
            [sol[0], sol[1], sol[2]],
            [sol[3], sol[4], sol[5]],
            [sol[6], sol[7], 1.0],
        ]
    )
    h = np.linalg.inv(t_dst) @ h_n @ t_src
    return Homography.from_matrix(h)


def _hartley(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Similarity transform moving the centroid to the origin, mean radius sqrt(2)."""
    centroid = points.mean(axis=0)
    shifted = points - centroid
    mean_dist = np.mean(np.linalg.norm(shifted, axis=1))
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("all points coincide")
    s = math.sqrt(2) / mean_dist
    t = np.array(
        [
            [s, 0.0, -s * centroid[0]],
            [0.0, s, -s * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return t, shifted * s


def project(h: Homography, p: ImagePoint) -> BevPoint:
    """Apply the homography to one point. Raises PointAtInfinity when the
    denominator w = h20*x + h21*y + h22 vanishes."""
    m = h.h
    w = m[2, 0] * p.x + m[2, 1] * p.y + m[2, 2]
    if abs(w) <= TOL.homography_w:
        raise PointAtInfinity(f"point ({p.x}, {p.y}) maps to infinity")
    u = (m[0, 0] * p.x + m[0, 1] * p.y + m[0, 2]) / w
    v = (m[1, 0] * p.x + m[1, 1] * p.y + m[1, 2]) / w
    return BevPoint(u=u, v=v)


def project_bev(h: Homography, p: BevPoint) -> ImagePoint:
    """Apply the homography in the BEV-to-image direction (for inverse maps)."""
    q = project(h, ImagePoint(x=p.u, y=p.v))
    return ImagePoint(x=q.u, y=q.v)


def horizon_line(vp: ImagePoint) -> HorizonLine:
    """Horizon under the zero-roll assumption: the horizontal line through the VP."""
    return HorizonLine(y=vp.y)


def build_perspective_grid(
    vp: ImagePoint,
    image_w: float,
    image_h: float,
    params: GridParams = GridParams(),
) -> PerspectiveGrid:
    """Construct the four-point perspective grid from the vanishing point.

    The bottom image line y = image_h is split into ``subdivisions`` equal
    intervals; radial lines run from the VP to each split point. The source
    quadrangle is bounded by the outermost pair of radials, the bottom line,
    and the upper horizontal line at y = vp.y + alpha * (image_h - vp.y).
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError(f"image dimensions must be positive, got {image_w}x{image_h}")
    if vp.y >= image_h:
        raise VanishingPointBelowScene(
            f"vp.y={vp.y} is not above the bottom edge y={image_h}"
        )
    if not (0.0 < params.alpha < 1.0):
        raise DegenerateGrid(f"alpha must lie in (0, 1), got {params.alpha}")
    if params.subdivisions < 1:
        raise DegenerateGrid(f"subdivisions must be >= 1, got {params.subdivisions}")

    n = params.subdivisions
    bottom = tuple(
        ImagePoint(x=image_w * i / n, y=float(image_h)) for i in range(n + 1)
    )
    # The radial vp -> (bx, image_h) reaches the upper line exactly at
    # parameter t = alpha, so corners interpolate linearly.
    y_upper = vp.y + params.alpha * (image_h - vp.y)
    a = params.alpha
    tl = ImagePoint(x=vp.x + a * (bottom[0].x - vp.x), y=y_upper)
    tr = ImagePoint(x=vp.x + a * (bottom[-1].x - vp.x), y=y_upper)
    src = Quadrangle(corners=(tl, tr, bottom[-1], bottom[0]))
    return PerspectiveGrid(
        src=src,
        bev_width=params.bev_width,
        bev_depth=params.bev_depth,
        vp=vp,
        subdivisions=n,
        bottom_points=bottom,
    )


def grid_homography(grid: PerspectiveGrid) -> Homography:
    """Homography mapping the grid's source quadrangle onto the BEV rectangle.

    Bottom corners land at depth v = 0, upper corners at v = bev_depth; the
    left radial maps to u = 0 so image left/right order is preserved.
    """
    tl, tr, br, bl = grid.src.corners
    w, d = grid.bev_width, grid.bev_depth
    return solve_homography(
        [
            (tl, BevPoint(0.0, d)),
            (tr, BevPoint(w, d)),
            (br, BevPoint(w, 0.0)),
            (bl, BevPoint(0.0, 0.0)),
        ]
    )
