"""topview: vectorised bird's-eye-view scenes from uncalibrated street cameras.

Turns per-frame 2D detections plus a single vanishing point into metric BEV
trajectories, image-space 3D boxes, georeferenced token streams, and
distance analytics. No camera intrinsics or extrinsics required.
"""

__version__ = "0.1.0"
