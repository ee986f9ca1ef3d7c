"""Rear-approach hazard detection from sparse monocular frames.

Single-frame detections plus an IMU pose ("blinks") are lifted to 3D,
tracked with a constant-velocity EKF, and scored for collision risk via
radial time-to-collision.  A tabular SARSA agent decides online when the
next blink is worth its cost.  A synthetic traffic simulator and an
evaluation harness round out the package.
"""

__version__ = "0.1.0"

from .geometry import BoundingBox2D, CameraIntrinsics, ImuPose

__all__ = ["BoundingBox2D", "CameraIntrinsics", "ImuPose", "__version__"]
