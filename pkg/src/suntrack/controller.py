"""Closed-loop tracking strategy and the open-loop baseline.

The closed loop works ahead of the sun: at each movement event it

1. predicts, holding the sun still, how far ahead the wing can point
   before the beam leaves the maximum-power square (half-width beta) -
   that pose becomes the movement reference;
2. predicts, holding the wing at the reference, when the advancing sun
   will leave the square again - that instant becomes the next movement
   time;
3. executes the orientation leg then the elevation leg while recording
   trajectory tables, smooths them, computes efficiency, classifies the
   shapes and estimates where the sun actually was;
4. feeds the discrepancies between the estimates and the corrected sun
   equations into two asynchronous discrete PI accumulators whose outputs
   are the corrections used from the next movement on.

The azimuth correction is kept in platform-rotation terms: it adds to the
believed platform rotation, so with a believed rotation mis-set above the
physical one it converges to a negative value of the same magnitude (and
positive when mis-set below). The elevation correction adds to the
equations' elevation. Rejected or low-efficiency trajectories leave their
axis correction untouched; while the elevation sits at its software limit
its correction is never updated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analysis import (AnalyzerConfig, SunEstimate, TrajectoryLabel, analyze,
                       combined_timestamp)
from .dsp import (DEFAULT_FIR_TAPS, IRRADIANCE_FLOOR, TrajectoryRecorder,
                  efficiency, smooth)
from .ephemeris import (DEFAULT_VARIANT, ObserverLocation, SolarAngles,
                        solar_hour, solar_position)
from .frames import PlatformFrame, azimuth_to_orientation, wrap_signed
from .kinematics import ELEVATION, ORIENTATION, TrackerPose, TravelLimits
from .optics import ConcentratorSpec, project_sun

#: Projection geometry of the controller's internal model: perfectly
#: mounted modules (the real plant may disagree; that is the point).
_IDEAL_OPTICS = ConcentratorSpec()

IDLE = "idle"
MOVING = "moving"
PARKED = "parked"


@dataclass(frozen=True, slots=True)
class ControllerConfig:
    location: ObserverLocation
    believed_frame: PlatformFrame = PlatformFrame(180.0)
    limits: TravelLimits = TravelLimits()
    beta: float = 0.5                 # degrees, half-width of the power square
    prediction_step: float = 1.0      # s, fixed time resolution of both loops
    kp_azimuth: float = 0.4
    ki_azimuth: float = 0.25
    kp_elevation: float = 0.4
    ki_elevation: float = 0.25
    offset_clamp: float = 5.0         # degrees, safety bound on corrections
    deadband_azimuth: float = 0.03    # degrees; skip updates below sensor floor
    deadband_elevation: float = 0.06
    analyzer: AnalyzerConfig = AnalyzerConfig()
    fir_taps: int = DEFAULT_FIR_TAPS
    catchment_area: float = 9.3
    irradiance_floor: float = IRRADIANCE_FLOOR
    park_pose: TrackerPose = TrackerPose(0.0, 20.0)
    supervisory_period: float = 0.25
    sensor_period: float = 0.125
    ephemeris_variant: str = DEFAULT_VARIANT
    prediction_horizon: float = 6.0 * 3600.0

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if self.prediction_step != 1.0:
            raise ValueError("the prediction loops run at 1 s resolution")


@dataclass(frozen=True, slots=True)
class Offsets:
    """Corrections applied to the sun equations, degrees."""

    azimuth: float = 0.0    # believed platform-rotation correction
    elevation: float = 0.0  # added to the equations' elevation


@dataclass(frozen=True, slots=True)
class Prediction:
    reference: TrackerPose
    t_mov: float | None       # None: the sun sets before leaving the square
    elevation_locked: bool
    start_time: float


class PiAccumulator:
    """Discrete asynchronous PI law with clamping and conditional integration.

    This is the single place the correction law lives:

        u_k+1 = Kp * e_k + Ki * sum(e_0 .. e_k)

    The running sum includes the current error. Integration is skipped
    whenever the output saturates and the error would push it further out.
    """

    def __init__(self, kp: float, ki: float, clamp: float = 5.0,
                 initial_output: float = 0.0):
        self.kp = kp
        self.ki = ki
        self.clamp = clamp
        self.error_sum = 0.0
        self.last_output = initial_output
        self.history: list[float] = []

    def step(self, error: float) -> float:
        unclamped = self.kp * error + self.ki * (self.error_sum + error)
        if abs(unclamped) <= self.clamp:
            self.error_sum += error
            self.last_output = unclamped
        else:
            clamped = math.copysign(self.clamp, unclamped)
            if error * clamped < 0.0:  # integrating pulls back inside
                self.error_sum += error
            self.last_output = clamped
        self.history.append(error)
        return self.last_output


def believed_sun(t: float, offsets: Offsets, cfg: ControllerConfig) -> SolarAngles:
    """The controller's best estimate of the sun direction at ``t``."""
    sun = solar_position(t, cfg.location, cfg.ephemeris_variant)
    return SolarAngles(azimuth=sun.azimuth,
                       elevation=sun.elevation + offsets.elevation)


def corrected_frame(offsets: Offsets, cfg: ControllerConfig) -> PlatformFrame:
    return PlatformFrame(cfg.believed_frame.z_rotation + offsets.azimuth)


def corrected_solar_pose(t: float, offsets: Offsets,
                         cfg: ControllerConfig) -> TrackerPose:
    """Feed-forward pose from the corrected sun equations.

    The azimuth correction adjusts the believed platform rotation before
    the frame transform; the elevation correction adds to the equations'
    elevation, clamped to the software travel limits.
    """
    sun = believed_sun(t, offsets, cfg)
    theta_ori = azimuth_to_orientation(sun.azimuth, corrected_frame(offsets, cfg))
    theta_ori = min(max(theta_ori, cfg.limits.orientation_min),
                    cfg.limits.orientation_max)
    return TrackerPose(theta_ori, cfg.limits.clamp_elevation(sun.elevation))


def _elevation_locked(t: float, offsets: Offsets, cfg: ControllerConfig) -> bool:
    sun = believed_sun(t, offsets, cfg)
    return sun.elevation < cfg.limits.elevation_min


def predict(now: float, offsets: Offsets, cfg: ControllerConfig) -> Prediction:
    """Two-step move-ahead prediction at 1 s resolution.

    Step one freezes the sun at its corrected position for ``now`` and
    advances the simulated wing along the corrected equations until the
    frozen beam exits the beta square; the last inside pose is the
    movement reference. Step two holds the wing at the reference and
    advances the sun until the beam exits again; the last inside instant
    is the next movement time. While the elevation is pinned at its
    software limit only the azimuth coordinate of the square is watched.
    """
    step = cfg.prediction_step
    frame = corrected_frame(offsets, cfg)
    locked = _elevation_locked(now, offsets, cfg)
    beta = cfg.beta

    def outside(projection) -> bool:
        if abs(projection.x) > beta:
            return True
        return not locked and abs(projection.y) > beta

    frozen = believed_sun(now, offsets, cfg)
    reference = corrected_solar_pose(now, offsets, cfg)
    t = now
    while t - now < cfg.prediction_horizon:
        t += step
        candidate = corrected_solar_pose(t, offsets, cfg)
        if outside(project_sun(frozen, candidate, frame, _IDEAL_OPTICS)):
            break
        reference = candidate

    t = now
    t_mov = now + step
    while t - now < cfg.prediction_horizon:
        t += step
        sun = believed_sun(t, offsets, cfg)
        if sun.elevation - offsets.elevation <= 0.0:
            return Prediction(reference, None, locked, now)
        if outside(project_sun(sun, reference, frame, _IDEAL_OPTICS)):
            t_mov = max(t - step, now + step)
            break
        t_mov = t
    return Prediction(reference, t_mov, locked, now)


@dataclass(slots=True)
class CycleRecord:
    """One closed-loop control event, for logs and tests."""

    index: int
    t_start: float
    t_end: float
    reference: TrackerPose
    t_mov: float | None
    label_ori: TrajectoryLabel
    label_ele: TrajectoryLabel
    theta_ori: float | None
    theta_ele: float | None
    ts_hat: float | None
    error_azimuth: float | None
    error_elevation: float | None
    updated_azimuth: bool
    updated_elevation: bool
    offset_azimuth: float
    offset_elevation: float
    elevation_locked: bool


@dataclass(slots=True)
class MovementRecord:
    movement_index: int
    axis: str
    t_start: float
    t_end: float
    theta_start: float
    theta_target: float


class _TickGate:
    """Supervisory-cadence gate over sensor-rate ticks."""

    def __init__(self, sensor_period: float, supervisory_period: float):
        self._every = max(1, round(supervisory_period / sensor_period))
        self._count = -1

    def __call__(self) -> bool:
        self._count += 1
        return self._count % self._every == 0


class ClosedLoopTracker:
    """Power-feedback tracking strategy driven by the observation stream.

    A deterministic single-threaded state machine: movement events fire
    when the clock reaches the predicted time, trajectories are recorded
    at the sensor rate while legs execute, and corrections change only at
    accepted-analysis cycle boundaries.
    """

    mode = "closed_loop"

    def __init__(self, cfg: ControllerConfig,
                 initial_offsets: Offsets = Offsets()):
        self.cfg = cfg
        self.offsets = initial_offsets
        self.pi_azimuth = PiAccumulator(cfg.kp_azimuth, cfg.ki_azimuth,
                                        cfg.offset_clamp,
                                        initial_offsets.azimuth)
        self.pi_elevation = PiAccumulator(cfg.kp_elevation, cfg.ki_elevation,
                                          cfg.offset_clamp,
                                          initial_offsets.elevation)
        self.state = IDLE
        self.t_mov: float | None = None   # None fires the first cycle at once
        self.cycle_index = 0
        self.cycles: list[CycleRecord] = []
        self.movements: list[MovementRecord] = []
        self.tables = []
        self.movement_counts = {ORIENTATION: 0, ELEVATION: 0}
        self._gate = _TickGate(cfg.sensor_period, cfg.supervisory_period)
        self._pred: Prediction | None = None
        self._rec_ori: TrajectoryRecorder | None = None
        self._rec_ele: TrajectoryRecorder | None = None
        self._plan = None
        self._move_start = 0.0
        self._ori_end: float | None = None

    # -- event loop ------------------------------------------------------

    def on_tick(self, plant, obs) -> None:
        supervisory = self._gate()
        if self.state == MOVING:
            self._record(obs)
            if not obs.moving:
                self._finish_cycle(obs)
            return
        if self.state == IDLE and supervisory:
            if self.t_mov is None or obs.t >= self.t_mov:
                self._begin_cycle(plant, obs)

    # -- cycle phases ----------------------------------------------------

    def _begin_cycle(self, plant, obs) -> None:
        cfg = self.cfg
        t = obs.t
        sun = solar_position(t, cfg.location, cfg.ephemeris_variant)
        if sun.elevation <= 0.0:
            if solar_hour(t, cfg.location) < 12.0:
                self.t_mov = t + 60.0   # pre-dawn: try again shortly
            else:
                self._park(plant)
            return
        pred = predict(t, self.offsets, cfg)
        if pred.t_mov is None:
            self._park(plant)
            return
        self._pred = pred
        self._plan = plant.command_move(pred.reference)
        self._move_start = t
        self._ori_end = None
        min_samples = cfg.analyzer.min_samples
        self._rec_ori = TrajectoryRecorder(ORIENTATION, self.cycle_index,
                                           min_samples)
        self._rec_ele = TrajectoryRecorder(ELEVATION, self.cycle_index,
                                           min_samples)
        self._rec_ori.add(t, obs.power, obs.dni, obs.pose.theta_ori)
        self.state = MOVING
        if not obs.moving and not plant.tracker.moving:
            # Both legs zero-length: analyze the degenerate tables at once.
            self._rec_ele.add(t, obs.power, obs.dni, obs.pose.theta_ele)
            self._finish_cycle(obs)

    def _record(self, obs) -> None:
        t = obs.t
        if obs.active_axis == ORIENTATION:
            self._rec_ori.add(t, obs.power, obs.dni, obs.pose.theta_ori)
            return
        if self._ori_end is None:
            self._ori_end = t
            self._rec_ori.add(t, obs.power, obs.dni, obs.pose.theta_ori)
        self._rec_ele.add(t, obs.power, obs.dni, obs.pose.theta_ele)

    def _finish_cycle(self, obs) -> None:
        cfg = self.cfg
        t = obs.t
        if self._ori_end is None:
            self._ori_end = t
        table_ori = self._rec_ori.finish()
        table_ele = self._rec_ele.finish()
        self.tables.extend([table_ori, table_ele])
        self._log_movements(t)

        est_ori = self._analyze(table_ori)
        est_ele = self._analyze(table_ele)
        locked = self._pred.elevation_locked
        ts_hat = combined_timestamp(est_ori,
                                    None if locked else est_ele)

        err_azi = err_ele = None
        updated_azi = updated_ele = False
        if ts_hat is not None:
            sun_hat = solar_position(ts_hat, cfg.location, cfg.ephemeris_variant)
            if est_ori.accepted:
                err_azi = self._azimuth_error(est_ori.theta, sun_hat)
                if abs(err_azi) > cfg.deadband_azimuth:
                    new = self.pi_azimuth.step(err_azi)
                    self.offsets = Offsets(new, self.offsets.elevation)
                    updated_azi = True
            if est_ele.accepted and not locked:
                err_ele = est_ele.theta - (sun_hat.elevation
                                           + self.offsets.elevation)
                if abs(err_ele) > cfg.deadband_elevation:
                    new = self.pi_elevation.step(err_ele)
                    self.offsets = Offsets(self.offsets.azimuth, new)
                    updated_ele = True

        self.cycles.append(CycleRecord(
            index=self.cycle_index, t_start=self._move_start, t_end=t,
            reference=self._pred.reference, t_mov=self._pred.t_mov,
            label_ori=est_ori.label, label_ele=est_ele.label,
            theta_ori=est_ori.theta, theta_ele=est_ele.theta,
            ts_hat=ts_hat, error_azimuth=err_azi, error_elevation=err_ele,
            updated_azimuth=updated_azi, updated_elevation=updated_ele,
            offset_azimuth=self.offsets.azimuth,
            offset_elevation=self.offsets.elevation,
            elevation_locked=locked))
        self.cycle_index += 1
        self.t_mov = self._pred.t_mov
        self.state = IDLE

    # -- helpers ----------------------------------------------------------

    def _analyze(self, table) -> SunEstimate:
        cfg = self.cfg
        eff = efficiency(smooth(table, cfg.fir_taps), cfg.catchment_area,
                         cfg.irradiance_floor)
        return analyze(eff, cfg.analyzer)

    def _azimuth_error(self, theta_hat: float, sun_hat: SolarAngles) -> float:
        # Corrected-equation coordinate minus the measured sun coordinate;
        # positive error means the equations run ahead of the sun.
        theta_eq = azimuth_to_orientation(sun_hat.azimuth,
                                          corrected_frame(self.offsets, self.cfg))
        return wrap_signed(theta_eq - theta_hat)

    def _log_movements(self, t_end: float) -> None:
        legs = self._plan.legs
        ori_end = self._ori_end if self._ori_end is not None else t_end
        spans = ((legs[0], self._move_start, ori_end),
                 (legs[1], ori_end, t_end))
        for leg, t0, t1 in spans:
            if leg.distance > 0.0:
                self.movement_counts[leg.axis] += 1
            self.movements.append(MovementRecord(
                movement_index=self.cycle_index, axis=leg.axis,
                t_start=t0, t_end=t1, theta_start=leg.start,
                theta_target=leg.target))

    def _park(self, plant) -> None:
        try:
            plant.command_move(self.cfg.park_pose)
        except Exception:
            pass
        self.state = PARKED


class OpenLoopTracker:
    """Baseline: move to the raw feed-forward pose every fixed period.

    Uses the believed platform frame with zero corrections, so a mis-set
    believed rotation turns into a persistent pointing error.
    """

    mode = "open_loop"

    def __init__(self, cfg: ControllerConfig, period: float):
        if period <= 0.0:
            raise ValueError("period must be positive")
        self.cfg = cfg
        self.period = period
        self.offsets = Offsets()
        self.state = IDLE
        self.cycles: list[CycleRecord] = []
        self.movements: list[MovementRecord] = []
        self.tables = []
        self.movement_counts = {ORIENTATION: 0, ELEVATION: 0}
        self._gate = _TickGate(cfg.sensor_period, cfg.supervisory_period)
        self._next_move: float | None = None
        self._count = 0

    def on_tick(self, plant, obs) -> None:
        if not self._gate() or self.state == PARKED:
            return
        t = obs.t
        if self._next_move is None:
            self._next_move = t
        if t < self._next_move or obs.moving:
            return
        cfg = self.cfg
        sun = solar_position(t, cfg.location, cfg.ephemeris_variant)
        if sun.elevation <= 0.0:
            if solar_hour(t, cfg.location) >= 12.0:
                try:
                    plant.command_move(cfg.park_pose)
                except Exception:
                    pass
                self.state = PARKED
            else:
                self._next_move = t + 60.0
            return
        target = corrected_solar_pose(t, self.offsets, cfg)
        plan = plant.command_move(target)
        for leg in plan.legs:
            if leg.distance > 0.0:
                self.movement_counts[leg.axis] += 1
                self.movements.append(MovementRecord(
                    movement_index=self._count, axis=leg.axis, t_start=t,
                    t_end=t + plan.orientation.duration
                    + (plan.elevation.duration if leg.axis == ELEVATION else 0.0),
                    theta_start=leg.start, theta_target=leg.target))
        self._count += 1
        while self._next_move <= t:
            self._next_move += self.period


# -- correction persistence ----------------------------------------------

OFFSETS_HEADER = "azimuth_offset_deg,elevation_offset_deg,saved_at_utc"


def save_offsets(path, offsets: Offsets, saved_at_posix: float) -> None:
    """Persist the corrections as one plain-text record, UTF-8."""
    from datetime import datetime, timezone
    stamp = datetime.fromtimestamp(saved_at_posix, tz=timezone.utc)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(OFFSETS_HEADER + "\n")
        fh.write(f"{offsets.azimuth:.6f},{offsets.elevation:.6f},"
                 f"{stamp.strftime('%Y-%m-%dT%H:%M:%SZ')}\n")


def load_offsets(path) -> Offsets:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != OFFSETS_HEADER:
            raise ValueError(f"unexpected offsets header: {header}")
        azi, ele, _ = fh.readline().strip().split(",")
    return Offsets(azimuth=float(azi), elevation=float(ele))
