"""Concentrator model: sun-beam projection on the virtual cell and efficiency.

The wing normal at perfect pointing coincides with the sun direction; the
beam projection is expressed as the two small-angle components (x along the
orientation sweep, y along elevation) of the sun vector in the wing's
tangent plane. Relative efficiency is a separable flat-top roll-off
anchored so it equals 0.90 at the half-acceptance angle on each axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .frames import PlatformFrame, orientation_to_azimuth
from .kinematics import TrackerPose
from .ephemeris import SolarAngles


@dataclass(frozen=True, slots=True)
class CellProjection:
    """Angular beam deviation on the virtual cell plane, degrees.

    (0, 0) is perfect pointing. x grows when the sun azimuth leads the
    wing azimuth; y grows when the sun elevation leads the wing.
    """

    x: float
    y: float


@dataclass(frozen=True, slots=True)
class ConcentratorSpec:
    """Optical and electrical constants of the concentrator assembly."""

    half_acceptance: float = 1.14   # degrees to the 90% efficiency contour
    eta_peak: float = 0.20          # absolute DC efficiency at perfect pointing
    rolloff_sharpness: float = 4.0  # half the Butterworth exponent
    misalignment: tuple[float, float] = (0.0, 0.0)  # module vs wing, cell degrees

    def __post_init__(self):
        if self.half_acceptance <= 0.0:
            raise ValueError("half-acceptance angle must be positive")
        if not 0.0 < self.eta_peak <= 1.0:
            raise ValueError("eta_peak must be in (0, 1]")
        if self.rolloff_sharpness <= 0.0:
            raise ValueError("rolloff sharpness must be positive")


def _unit_vector(azimuth_deg: float, elevation_deg: float):
    """ENU unit vector for an azimuth (clockwise from north) and elevation."""
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    ce = math.cos(el)
    return ce * math.sin(az), ce * math.cos(az), math.sin(el)


def project_sun(sun: SolarAngles, pose: TrackerPose, frame: PlatformFrame,
                spec: ConcentratorSpec) -> CellProjection:
    """Beam position on the virtual cell for a sun direction and wing pose.

    Defined for all inputs; physically meaningful while the sun is above
    the horizon. The spec's mount misalignment adds directly on the cell
    plane.
    """
    wing_azimuth = orientation_to_azimuth(pose.theta_ori, frame)
    az = math.radians(wing_azimuth)
    el = math.radians(pose.theta_ele)
    sin_az, cos_az = math.sin(az), math.cos(az)
    sin_el, cos_el = math.sin(el), math.cos(el)

    sx, sy, sz = _unit_vector(sun.azimuth, sun.elevation)

    # Wing basis: normal, azimuth-sweep tangent, elevation tangent.
    s_n = sx * (cos_el * sin_az) + sy * (cos_el * cos_az) + sz * sin_el
    s_x = sx * cos_az - sy * sin_az
    s_y = (-sx * sin_el * sin_az - sy * sin_el * cos_az + sz * cos_el)

    dx, dy = spec.misalignment
    return CellProjection(x=math.degrees(math.atan2(s_x, s_n)) + dx,
                          y=math.degrees(math.atan2(s_y, s_n)) + dy)


def _axis_rolloff(u: float, spec: ConcentratorSpec, alpha: float) -> float:
    # Flat-top Butterworth profile with f(0)=1 and f(alpha)=0.9:
    # f(u) = 1 / (1 + (|u|/u0)^(2k)), u0 = alpha * 9^(1/(2k)).
    exponent = 2.0 * spec.rolloff_sharpness
    u0 = alpha * 9.0 ** (1.0 / exponent)
    return 1.0 / (1.0 + (abs(u) / u0) ** exponent)


def relative_efficiency(projection: CellProjection, spec: ConcentratorSpec,
                        alpha_scale: float = 1.0) -> float:
    """Efficiency relative to perfect pointing, in [0, 1].

    Separable product of identical per-axis profiles; ``alpha_scale``
    contracts the acceptance angle (inverter-coupled operation squeezes
    the usable surface).
    """
    alpha = spec.half_acceptance * alpha_scale
    return (_axis_rolloff(projection.x, spec, alpha)
            * _axis_rolloff(projection.y, spec, alpha))


def inside_region(projection: CellProjection, half_width: float) -> bool:
    """True while the beam stays inside the closed square of ``half_width``.

    The boundary counts as inside, so a predicted exit time is the last
    instant before the beam leaves.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    return abs(projection.x) <= half_width and abs(projection.y) <= half_width
