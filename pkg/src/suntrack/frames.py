"""Transforms between the geographic frame and the tracker platform frame.

The platform frame is the geographic frame rotated about the vertical by
``z_rotation`` degrees; 180 means the platform's zero-orientation axis
points geographic south. The controller carries a *believed* rotation that
may differ from the physical one; deliberate mis-calibration experiments
change only the believed value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_degrees(angle: float) -> float:
    """Normalize an angle to [0, 360)."""
    a = math.fmod(angle, 360.0)
    return a + 360.0 if a < 0.0 else a


def wrap_signed(angle: float) -> float:
    """Normalize an angle to (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


@dataclass(frozen=True, slots=True)
class PlatformFrame:
    """Vertical-axis rotation of the platform frame, degrees.

    Any real value is accepted; it is normalized to [0, 360) on
    construction.
    """

    z_rotation: float = 180.0

    def __post_init__(self):
        object.__setattr__(self, "z_rotation", wrap_degrees(self.z_rotation))

    def rotated(self, delta: float) -> "PlatformFrame":
        return PlatformFrame(self.z_rotation + delta)


def azimuth_to_orientation(azimuth: float, frame: PlatformFrame) -> float:
    """Platform orientation coordinate for a geographic azimuth.

    theta_ori = wrap_(-180, 180](azimuth - z_rotation); the exact inverse
    of :func:`orientation_to_azimuth` on its range.
    """
    return wrap_signed(azimuth - frame.z_rotation)


def orientation_to_azimuth(theta_ori: float, frame: PlatformFrame) -> float:
    """Geographic azimuth for a platform orientation coordinate."""
    return wrap_degrees(theta_ori + frame.z_rotation)
