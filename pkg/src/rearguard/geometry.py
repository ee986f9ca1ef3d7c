"""Camera geometry: ground-plane depth from the horizon line, back-projection,
frame transforms, and the forward observation model used by the tracker.

Conventions used throughout the package
---------------------------------------
Image: pixel column u grows to the right, pixel row v grows downward.
The horizon row for a head pitch ``theta_p`` is

    y_h = c_y - f_y * tan(theta_p)

so positive pitch moves the horizon up in the image.  A ground-contact
pixel of an object sits ``dy = v_bottom - y_h`` rows below the horizon,
and its depth along the camera's forward axis is

    depth = f_y * camera_height / dy

which is what makes depth estimation insensitive to head pitch: the
horizon shift and the contact-pixel shift cancel.

User frame: x to the user's right, z forward, planar (the vertical
coordinate is carried but not tracked).  The camera yaw ``theta_y`` is the
rotation of the camera frame relative to the user frame about the
vertical axis; a rear-facing camera has yaw close to pi.  Camera-frame
coordinates (n, d) of a user-frame point (x, z) are

    n = x * cos(theta_y) + z * sin(theta_y)     (lateral)
    d = -x * sin(theta_y) + z * cos(theta_y)    (forward, must be > 0)

The forward observation of an object at (x, z) with height h is the
triple used by the EKF measurement model:

    u_offset          = f_x * (n / d) * cos(theta_p)   pixels from c_x
    pixel_height      = f_y * h   / d                  pixels
    horizon_deviation = f_y * h_e / d                  pixels below y_h

The third component is exactly the ``dy`` that ``estimate_depth``
inverts, so projection and depth estimation agree by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Depth beyond this is reported as the clamp value rather than trusted;
# a 1 px horizon deviation at f_y=600, h_e=1.5 would already mean 900 m.
DEFAULT_MAX_DEPTH_M = 100.0
DEFAULT_MIN_DY_PX = 1.0


class AboveHorizon(ValueError):
    """Ground-contact pixel at or above the horizon; no finite depth."""


class BehindCamera(ValueError):
    """Point has non-positive forward coordinate in the camera frame."""


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters in pixels."""

    f_x: float
    f_y: float
    c_x: float
    c_y: float

    def __post_init__(self):
        if self.f_x <= 0 or self.f_y <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class ImuPose:
    """Head orientation at a blink: pitch and yaw in radians.

    Pitch must lie in (-pi/2, pi/2); yaw is normalized to (-pi, pi].
    """

    pitch: float
    yaw: float

    def __post_init__(self):
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise ValueError("pitch out of range (-pi/2, pi/2)")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))


@dataclass(frozen=True)
class BoundingBox2D:
    """Axis-aligned detector box: top-left corner, size, class and score."""

    x: float
    y: float
    w: float
    h: float
    cls: str = "car"
    score: float = 1.0

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("box width and height must be positive")

    @property
    def bottom_center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h)


@dataclass(frozen=True)
class PointCamera3D:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PointUser3D:
    x: float
    y: float
    z: float


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def horizon_line(intr: CameraIntrinsics, pitch: float) -> float:
    """Image row of the horizon for the given head pitch.

    May fall outside the image; that is fine, depth only cares about the
    offset of the contact pixel from this row.
    """
    return intr.c_y - intr.f_y * math.tan(pitch)


def estimate_depth(
    box: BoundingBox2D,
    intr: CameraIntrinsics,
    pitch: float,
    camera_height: float,
    max_depth: float = DEFAULT_MAX_DEPTH_M,
    min_dy: float = DEFAULT_MIN_DY_PX,
) -> float:
    """Depth of the box's ground contact from its offset below the horizon.

    Raises AboveHorizon when the bottom edge is less than ``min_dy`` pixels
    below the horizon row (contact at or above the horizon carries no
    usable depth).  Results are clamped to ``max_depth``.
    """
    if camera_height <= 0:
        raise ValueError("camera_height must be positive")
    y_h = horizon_line(intr, pitch)
    dy = box.y + box.h - y_h
    if dy <= min_dy:
        raise AboveHorizon(f"contact point {dy:.2f} px below horizon (min {min_dy})")
    return min(intr.f_y * camera_height / dy, max_depth)


def backproject(box: BoundingBox2D, depth: float, intr: CameraIntrinsics) -> PointCamera3D:
    """Lift the box's bottom-center pixel to camera coordinates at ``depth``."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    u, v = box.bottom_center
    return PointCamera3D(
        x=(u - intr.c_x) * depth / intr.f_x,
        y=(v - intr.c_y) * depth / intr.f_y,
        z=depth,
    )


def camera_to_user(p: PointCamera3D, yaw: float) -> PointUser3D:
    """Rotate a camera-frame point into the user frame (planar, about vertical)."""
    c, s = math.cos(yaw), math.sin(yaw)
    return PointUser3D(x=c * p.x - s * p.z, y=p.y, z=s * p.x + c * p.z)


def user_to_camera_planar(x: float, z: float, yaw: float) -> tuple[float, float]:
    """Inverse planar rotation: user-frame (x, z) to camera-frame (n, d)."""
    c, s = math.cos(yaw), math.sin(yaw)
    return (c * x + s * z, -s * x + c * z)


def project_observation(
    x_u: float,
    z_u: float,
    obj_height: float,
    pose: ImuPose,
    intr: CameraIntrinsics,
    camera_height: float,
) -> np.ndarray:
    """Forward observation of a user-frame object.

    Returns the 3-vector (u_offset, pixel_height, horizon_deviation); see
    the module docstring for definitions.  Raises BehindCamera when the
    camera-frame forward coordinate is non-positive.
    """
    n, d = user_to_camera_planar(x_u, z_u, pose.yaw)
    if d <= 0:
        raise BehindCamera(f"forward coordinate d={d:.3f} m not positive")
    return np.array(
        [
            intr.f_x * (n / d) * math.cos(pose.pitch),
            intr.f_y * obj_height / d,
            intr.f_y * camera_height / d,
        ]
    )
