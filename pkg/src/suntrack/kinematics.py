"""Two-axis tracker simulation: motion plans, quantized measurement, limits.

Pointing movements execute as two sequential constant-speed legs, the
orientation leg first. The low-level position loops are abstracted: each
nonzero leg lands on its target plus a uniform terminal error within the
axis accuracy. Orientation is measured by an encoder (2^14 counts per
revolution by default); elevation by an inclinometer quantized to 0.1
degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

ENCODER_RESOLUTION_DEG = 360.0 / 2 ** 14  # 0.02197265625

ORIENTATION = "orientation"
ELEVATION = "elevation"


class LimitError(ValueError):
    """Commanded target outside the configured travel range."""


@dataclass(frozen=True, slots=True)
class TrackerPose:
    """Joint coordinates of the tracker, degrees."""

    theta_ori: float
    theta_ele: float


@dataclass(frozen=True, slots=True)
class AxisSpec:
    """Speed, measurement quantization and terminal accuracy of one axis."""

    speed: float                  # degrees/s, > 0
    measurement_resolution: float  # degrees, > 0
    accuracy: float = 0.0         # degrees, >= 0; terminal scatter half-width

    def __post_init__(self):
        if self.speed <= 0.0:
            raise ValueError("axis speed must be positive")
        if self.measurement_resolution <= 0.0:
            raise ValueError("measurement resolution must be positive")
        if self.accuracy < 0.0:
            raise ValueError("accuracy must be non-negative")


#: Paper-grade defaults: sub-0.1 degree orientation, 0.1 degree elevation
#: hardware. The elevation inclinometer's 0.1 degree figure is carried by
#: the measurement quantization; the motion repeatability is tighter.
DEFAULT_ORIENTATION_AXIS = AxisSpec(speed=0.2,
                                    measurement_resolution=ENCODER_RESOLUTION_DEG,
                                    accuracy=0.02)
DEFAULT_ELEVATION_AXIS = AxisSpec(speed=0.1,
                                  measurement_resolution=0.1,
                                  accuracy=0.05)


@dataclass(frozen=True, slots=True)
class TravelLimits:
    """Software travel limits, degrees."""

    orientation_min: float = -170.0
    orientation_max: float = 170.0
    elevation_min: float = 20.0
    elevation_max: float = 90.0

    def clamp_elevation(self, value: float) -> float:
        return min(max(value, self.elevation_min), self.elevation_max)


@dataclass(slots=True)
class MotionLeg:
    axis: str
    start: float
    target: float
    speed: float

    @property
    def distance(self) -> float:
        return abs(self.target - self.start)

    @property
    def duration(self) -> float:
        return self.distance / self.speed


@dataclass(slots=True)
class MotionPlan:
    """Orientation leg followed by elevation leg; zero-length legs allowed."""

    orientation: MotionLeg
    elevation: MotionLeg

    @property
    def legs(self):
        return (self.orientation, self.elevation)


def quantize(value: float, resolution: float) -> float:
    """Round to the nearest multiple of ``resolution`` (half rounds up)."""
    return math.floor(value / resolution + 0.5) * resolution


@dataclass(slots=True)
class Tracker:
    """Mutable tracker state, advanced only by the simulation clock.

    Single-owner: the plant steps it; the controller interacts through
    commands and quantized measurements.
    """

    orientation_axis: AxisSpec = DEFAULT_ORIENTATION_AXIS
    elevation_axis: AxisSpec = DEFAULT_ELEVATION_AXIS
    limits: TravelLimits = TravelLimits()
    pose: TrackerPose = TrackerPose(0.0, 20.0)
    rng: object = None  # numpy Generator for terminal-error draws
    _plan: MotionPlan | None = field(default=None, init=False)
    _leg_index: int = field(default=0, init=False)

    def __post_init__(self):
        clamped = self.limits.clamp_elevation(self.pose.theta_ele)
        self.pose = TrackerPose(self.pose.theta_ori, clamped)

    def command_move(self, target: TrackerPose) -> MotionPlan:
        """Plan a move to ``target``; elevation clamps, orientation errors.

        Replaces any active plan. Raises :class:`LimitError` when the
        orientation target is outside the travel range.
        """
        if not (self.limits.orientation_min <= target.theta_ori
                <= self.limits.orientation_max):
            raise LimitError(
                f"orientation target {target.theta_ori:.3f} outside "
                f"[{self.limits.orientation_min}, {self.limits.orientation_max}]")
        ele_target = self.limits.clamp_elevation(target.theta_ele)
        plan = MotionPlan(
            orientation=MotionLeg(ORIENTATION, self.pose.theta_ori,
                                  target.theta_ori,
                                  self.orientation_axis.speed),
            elevation=MotionLeg(ELEVATION, self.pose.theta_ele, ele_target,
                                self.elevation_axis.speed),
        )
        self._plan = plan
        self._leg_index = 0
        self._skip_empty_legs()
        return plan

    @property
    def moving(self) -> bool:
        return self._plan is not None

    @property
    def active_axis(self) -> str | None:
        """Axis currently executing, or None when settled."""
        if self._plan is None:
            return None
        return self._plan.legs[self._leg_index].axis

    def step(self, dt: float) -> TrackerPose:
        """Advance the active plan by ``dt`` seconds; returns the true pose."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        remaining = dt
        while self._plan is not None and remaining > 0.0:
            leg = self._plan.legs[self._leg_index]
            current = (self.pose.theta_ori if leg.axis == ORIENTATION
                       else self.pose.theta_ele)
            gap = leg.target - current
            travel = leg.speed * remaining
            if travel < abs(gap):
                self._set_axis(leg.axis, current + math.copysign(travel, gap))
                remaining = 0.0
            else:
                remaining -= abs(gap) / leg.speed
                self._finish_leg(leg)
        return self.pose

    def measure_pose(self) -> TrackerPose:
        """Quantized pose as the sensors report it."""
        return TrackerPose(
            quantize(self.pose.theta_ori,
                     self.orientation_axis.measurement_resolution),
            quantize(self.pose.theta_ele,
                     self.elevation_axis.measurement_resolution),
        )

    def _finish_leg(self, leg: MotionLeg) -> None:
        landing = leg.target
        spec = (self.orientation_axis if leg.axis == ORIENTATION
                else self.elevation_axis)
        if spec.accuracy > 0.0 and self.rng is not None:
            landing += self.rng.uniform(-spec.accuracy, spec.accuracy)
        self._set_axis(leg.axis, landing)
        self._leg_index += 1
        self._skip_empty_legs()

    def _skip_empty_legs(self) -> None:
        while (self._plan is not None
               and self._leg_index < len(self._plan.legs)
               and self._plan.legs[self._leg_index].distance == 0.0):
            self._leg_index += 1
        if self._plan is not None and self._leg_index >= len(self._plan.legs):
            self._plan = None
            self._leg_index = 0

    def _set_axis(self, axis: str, value: float) -> None:
        if axis == ORIENTATION:
            self.pose = TrackerPose(value, self.pose.theta_ele)
        else:
            self.pose = TrackerPose(self.pose.theta_ori,
                                    self.limits.clamp_elevation(value))
