"""Exception types shared across the toolkit.

Every error raised by the library derives from TopviewError so callers can
catch one base class at pipeline boundaries.
"""

from __future__ import annotations


class TopviewError(Exception):
    """Base class for all toolkit errors."""


# --- geometry ---------------------------------------------------------------

class DegenerateConfiguration(TopviewError):
    """Point correspondences do not determine a homography (rank-deficient system)."""


class PointAtInfinity(TopviewError):
    """Projection denominator vanished: the point lies on the projective horizon."""


class VanishingPointBelowScene(TopviewError):
    """Vanishing point sits at or below the bottom image edge; no grid exists."""


class DegenerateGrid(TopviewError):
    """Upper-line placement parameter outside (0, 1)."""


# --- vanishing point estimation ----------------------------------------------

class InsufficientSegments(TopviewError):
    """Fewer than two non-parallel line segments were supplied."""


class NoConsensus(TopviewError):
    """RANSAC found no candidate with the required inlier ratio."""


class ParseError(TopviewError):
    """A sidecar or segment file violated its schema."""


class MissingFile(TopviewError):
    """Input file does not exist."""


# --- detection ingestion -----------------------------------------------------

class SchemaError(TopviewError):
    """One detection record violated the stream schema."""

    def __init__(self, line: int, field: str, message: str):
        super().__init__(f"line {line}, field '{field}': {message}")
        self.line = line
        self.field = field


class EmptyInput(TopviewError):
    """The detection stream contained no records."""


# --- bird's-eye-view projection ---------------------------------------------

class AboveHorizon(TopviewError):
    """Image point at or above the horizon has no finite ground position."""


class MissingGeoAnchor(TopviewError):
    """Calibration carries no camera latitude/longitude."""


# --- analytics ----------------------------------------------------------------

class MixedCalibration(TopviewError):
    """Objects produced under different calibrations cannot be compared metrically."""


class UnknownCamera(TopviewError):
    """Camera id absent from the registry."""

    def __init__(self, camera_id: str):
        super().__init__(f"camera id not in registry: {camera_id!r}")
        self.camera_id = camera_id


# --- synthetic oracle ----------------------------------------------------------

class BehindCamera(TopviewError):
    """World point has non-positive depth in the camera frame."""


class DirectionAtInfinity(TopviewError):
    """Direction is parallel to the image plane; its vanishing point is not finite."""
