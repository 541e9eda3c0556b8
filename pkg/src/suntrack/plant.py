"""Simulated plant: irradiance, DC power generation, inverter, clock.

The plant owns the closed world the controller acts on: a clear-sky
irradiance bell with optional cloud events, the tracker kinematics, the
concentrator optics evaluated against the true platform frame, an
inverter start-up gate with a phenomenological MPPT ripple, multiplicative
power measurement noise, and a single seeded RNG for reproducibility.

Observations are produced at the sensor sampling period and held between
samples (zero-order hold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ephemeris import ObserverLocation, SolarAngles, solar_position
from .frames import PlatformFrame
from .kinematics import Tracker, TrackerPose
from .optics import ConcentratorSpec, project_sun, relative_efficiency


@dataclass(frozen=True, slots=True)
class CloudEvent:
    """Irradiance attenuation window, POSIX seconds and fraction in [0, 1]."""

    start: float
    end: float
    attenuation: float = 1.0

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("cloud event must end after it starts")
        if not 0.0 <= self.attenuation <= 1.0:
            raise ValueError("attenuation must be in [0, 1]")


@dataclass(frozen=True, slots=True)
class IrradianceProfile:
    """Clear-sky DNI bell between sunrise and sunset, with cloud events.

    The base curve is a raised cosine: zero at the horizon crossings,
    ``peak`` at the midpoint.
    """

    sunrise: float
    sunset: float
    peak: float = 850.0
    clouds: tuple[CloudEvent, ...] = ()

    def dni_at(self, t: float) -> float:
        if not self.sunrise < t < self.sunset:
            return 0.0
        tau = (t - self.sunrise) / (self.sunset - self.sunrise)
        dni = self.peak * math.sin(math.pi * tau) ** 2
        for cloud in self.clouds:
            if cloud.start <= t < cloud.end:
                dni *= 1.0 - cloud.attenuation
        return dni


@dataclass(frozen=True, slots=True)
class MpptRipple:
    """Periodic power dips attributed to the inverter's MPPT search."""

    period: float = 600.0
    depth: float = 0.25
    duration: float = 10.0

    def __post_init__(self):
        if self.period <= 0.0 or self.duration < 0.0:
            raise ValueError("ripple period must be positive, duration >= 0")
        if not 0.0 <= self.depth < 1.0:
            raise ValueError("ripple depth must be in [0, 1)")

    def factor(self, seconds_since_on: float) -> float:
        if self.depth == 0.0 or self.duration == 0.0:
            return 1.0
        return (1.0 - self.depth
                if (seconds_since_on % self.period) < self.duration else 1.0)


@dataclass(frozen=True, slots=True)
class PlantConfig:
    catchment_area: float = 9.3          # m^2
    sensor_period: float = 0.125         # s, sensor sampling
    supervisory_period: float = 0.25     # s, controller decision cadence
    inverter_startup_delay: float = 120.0  # s of sustained DNI before power flows
    inverter_dni_threshold: float = 100.0  # W/m^2
    inverter_coupled: bool = True        # False = resistive characterization load
    alpha_contraction: float = 0.85      # acceptance-angle squeeze when coupled
    ripple: MpptRipple = MpptRipple()
    power_noise_frac: float = 0.01       # sigma as a fraction of instantaneous P
    elevation_zero_offset: float = 0.0   # foundation error added to the wing elevation

    def __post_init__(self):
        if min(self.sensor_period, self.supervisory_period) <= 0.0:
            raise ValueError("sampling periods must be positive")
        if self.catchment_area <= 0.0:
            raise ValueError("catchment area must be positive")


@dataclass(frozen=True, slots=True)
class PlantObservation:
    """Sensor-rate snapshot: timestamp, power, DNI and the measured pose."""

    t: float
    power: float
    dni: float
    pose: TrackerPose     # quantized, as the sensors report it
    moving: bool
    active_axis: str | None


class Plant:
    """Single-owner simulated world advanced by one clock.

    The controller interacts only through :meth:`command_move` and the
    observation stream; all stochastic draws come from one seeded
    generator, so a (config, seed) pair replays bit-identically.
    """

    def __init__(self, config: PlantConfig, optics: ConcentratorSpec,
                 true_frame: PlatformFrame, profile: IrradianceProfile,
                 tracker: Tracker, location: ObserverLocation,
                 start_time: float, seed: int = 0,
                 ephemeris_variant: str | None = None):
        from .ephemeris import DEFAULT_VARIANT
        self.config = config
        self.optics = optics
        self.true_frame = true_frame
        self.profile = profile
        self.tracker = tracker
        self.location = location
        self.variant = ephemeris_variant or DEFAULT_VARIANT
        self.rng = np.random.default_rng(seed)
        tracker.rng = self.rng
        self.t = float(start_time)
        self._dni_above_since: float | None = None
        self._inverter_on_time: float | None = None
        self._update_inverter(self.t)
        self._observation = self._make_observation(self.t)

    # -- irradiance and power -------------------------------------------------

    def dni_at(self, t: float) -> float:
        return self.profile.dni_at(t)

    def sun_at(self, t: float) -> SolarAngles:
        return solar_position(t, self.location, self.variant)

    @property
    def inverter_on(self) -> bool:
        return self._inverter_on_time is not None

    def effective_wing_pose(self, pose: TrackerPose | None = None) -> TrackerPose:
        """True wing pose including the foundation elevation-zero error."""
        p = pose if pose is not None else self.tracker.pose
        return TrackerPose(p.theta_ori,
                           p.theta_ele + self.config.elevation_zero_offset)

    def dc_power(self, t: float, pose: TrackerPose | None = None,
                 noise_draw: float = 0.0) -> float:
        """Generated DC power in W at time ``t`` for the (true) pose.

        Deterministic unless a standard-normal ``noise_draw`` is supplied;
        the plant's own tick path draws it from the seeded generator.
        Never negative and never above eta_peak * DNI * area.
        """
        cfg = self.config
        dni = self.dni_at(t)
        if dni <= 0.0:
            return 0.0
        if cfg.inverter_coupled and self._inverter_on_time is None:
            return 0.0
        projection = project_sun(self.sun_at(t),
                                 self.effective_wing_pose(pose),
                                 self.true_frame, self.optics)
        alpha_scale = cfg.alpha_contraction if cfg.inverter_coupled else 1.0
        power = (self.optics.eta_peak
                 * relative_efficiency(projection, self.optics, alpha_scale)
                 * dni * cfg.catchment_area)
        if cfg.inverter_coupled:
            power *= cfg.ripple.factor(t - self._inverter_on_time)
        if noise_draw != 0.0:
            power *= 1.0 + cfg.power_noise_frac * noise_draw
        ceiling = self.optics.eta_peak * dni * cfg.catchment_area
        return min(max(power, 0.0), ceiling)

    # -- stepping -------------------------------------------------------------

    def command_move(self, target: TrackerPose):
        return self.tracker.command_move(target)

    def observe(self) -> PlantObservation:
        """Latest sensor-rate observation (held between sample instants)."""
        return self._observation

    def tick(self) -> PlantObservation:
        """Advance one sensor period; returns the new held observation."""
        dt = self.config.sensor_period
        self.tracker.step(dt)
        self.t += dt
        self._update_inverter(self.t)
        self._observation = self._make_observation(self.t)
        return self._observation

    def advance(self, dt: float) -> PlantObservation:
        """Advance by ``dt`` (a positive multiple of the sensor period)."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        steps = round(dt / self.config.sensor_period)
        if steps < 1 or abs(steps * self.config.sensor_period - dt) > 1e-9:
            raise ValueError("dt must be a multiple of the sensor period")
        for _ in range(steps):
            obs = self.tick()
        return obs

    def _update_inverter(self, t: float) -> None:
        cfg = self.config
        if not cfg.inverter_coupled:
            return
        if self.dni_at(t) >= cfg.inverter_dni_threshold:
            if self._dni_above_since is None:
                self._dni_above_since = t
            if (self._inverter_on_time is None
                    and t - self._dni_above_since >= cfg.inverter_startup_delay):
                self._inverter_on_time = t
        else:
            self._dni_above_since = None
            self._inverter_on_time = None

    def _make_observation(self, t: float) -> PlantObservation:
        cfg = self.config
        dni = self.dni_at(t)
        gated_off = cfg.inverter_coupled and self._inverter_on_time is None
        if dni <= 0.0 or gated_off:
            power = 0.0
        else:
            draw = self.rng.standard_normal() if cfg.power_noise_frac > 0.0 else 0.0
            power = self.dc_power(t, noise_draw=draw)
        return PlantObservation(t=t, power=power, dni=dni,
                                pose=self.tracker.measure_pose(),
                                moving=self.tracker.moving,
                                active_axis=self.tracker.active_axis)
