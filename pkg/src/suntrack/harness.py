"""Scenario runner: configuration, day simulations, metrics, CSV artifacts.

Scenarios are flat dotted-key text files (``section.key = value``); any
key can be overridden from the command line. A run simulates one day at
the sensor sampling rate, drives the configured controller, and writes
plot-ready CSV artifacts plus a key-value metrics summary. Runs are
reproducible byte-for-byte from (config, seed).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .analysis import AnalyzerConfig
from .controller import (ClosedLoopTracker, ControllerConfig, Offsets,
                         OpenLoopTracker, load_offsets, save_offsets)
from .dsp import write_tables_csv
from .ephemeris import (DEFAULT_VARIANT, ObserverLocation, daylight_window,
                        solar_hour, solar_time_offset, utc_midnight)
from .frames import PlatformFrame, azimuth_to_orientation
from .kinematics import (ELEVATION, ENCODER_RESOLUTION_DEG, ORIENTATION,
                         AxisSpec, Tracker, TrackerPose, TravelLimits)
from .optics import ConcentratorSpec, project_sun
from .plant import (CloudEvent, IrradianceProfile, MpptRipple, Plant,
                    PlantConfig)

PLANT_LOG_HEADER = ("t,dni,p_dc,theta_ori,theta_ele,offset_azi,offset_ele,"
                    "theta_ori_true,theta_ele_true,solar_hour")
OFFSET_LOG_HEADER = "t,offset_azi,offset_ele"
MOVEMENT_LOG_HEADER = "movement_index,axis,t_start,t_end,theta_start,theta_target"
CYCLE_LOG_HEADER = ("index,t_start,t_end,label_ori,label_ele,theta_ori,"
                    "theta_ele,ts_hat,error_azimuth,error_elevation,"
                    "updated_azimuth,updated_elevation,offset_azimuth,"
                    "offset_elevation,elevation_locked")
SCAN_HEADER = "x,y,p"


class ConfigError(ValueError):
    """Malformed scenario file or unknown key."""


class InvariantViolation(RuntimeError):
    """A run produced values outside its contractual ranges."""


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    date: str = "2020-10-02"
    start_solar_hour: float = 8.0
    end_solar_hour: float = 16.0
    seed: int = 1
    latitude: float = 37.41
    longitude: float = -5.98
    true_rotation: float = 180.0
    believed_rotation: float = 180.0
    mode: str = "closed_loop"            # closed_loop | open_loop
    open_loop_period: float = 60.0
    beta: float = 0.5
    kp_azimuth: float = 0.4
    ki_azimuth: float = 0.25
    kp_elevation: float = 0.4
    ki_elevation: float = 0.25
    offset_clamp: float = 5.0
    deadband_azimuth: float = 0.03
    deadband_elevation: float = 0.06
    initial_offset_azimuth: float = 0.0
    initial_offset_elevation: float = 0.0
    offsets_file: str = ""
    threshold_fraction: float = 0.92
    low_efficiency_floor: float = 0.02
    min_samples: int = 15
    fir_taps: int = 11
    half_acceptance: float = 1.14
    eta_peak: float = 0.20
    rolloff_sharpness: float = 4.0
    misalignment_x: float = 0.0
    misalignment_y: float = 0.0
    dni_peak: float = 850.0
    clouds: str = ""                      # "start:end:attenuation;..." solar hours
    sensor_period: float = 0.125
    supervisory_period: float = 0.25
    inverter_startup_delay: float = 120.0
    inverter_dni_threshold: float = 100.0
    inverter_coupled: bool = True
    alpha_contraction: float = 0.85
    ripple_period: float = 600.0
    ripple_depth: float = 0.25
    ripple_duration: float = 10.0
    power_noise_frac: float = 0.01
    elevation_zero_offset: float = 0.0
    orientation_speed: float = 0.2
    elevation_speed: float = 0.1
    orientation_resolution: float = ENCODER_RESOLUTION_DEG
    elevation_resolution: float = 0.1
    orientation_accuracy: float = 0.02
    elevation_accuracy: float = 0.05
    orientation_min: float = -170.0
    orientation_max: float = 170.0
    elevation_min: float = 20.0
    elevation_max: float = 90.0
    ephemeris_variant: str = DEFAULT_VARIANT
    scan_mode: str = "resistive"          # resistive | inverter
    scan_half_width: float = 2.0
    scan_step: float = 0.05
    scan_solar_hour: float = 12.0
    scan_samples_per_point: int = 5

    def __post_init__(self):
        if self.mode not in ("closed_loop", "open_loop"):
            raise ConfigError(f"unknown controller mode {self.mode!r}")
        if self.scan_mode not in ("resistive", "inverter"):
            raise ConfigError(f"unknown scan mode {self.scan_mode!r}")
        if not self.beta < self.half_acceptance:
            raise ConfigError("beta must stay below the half-acceptance angle")
        if self.end_solar_hour <= self.start_solar_hour:
            raise ConfigError("scenario must end after it starts")


#: dotted config key -> ScenarioConfig field
_KEY_MAP = {
    "scenario.name": "name",
    "scenario.date": "date",
    "scenario.start_solar_hour": "start_solar_hour",
    "scenario.end_solar_hour": "end_solar_hour",
    "scenario.seed": "seed",
    "site.latitude": "latitude",
    "site.longitude": "longitude",
    "frames.true_rotation": "true_rotation",
    "frames.believed_rotation": "believed_rotation",
    "controller.mode": "mode",
    "controller.open_loop_period": "open_loop_period",
    "controller.beta": "beta",
    "controller.kp_azimuth": "kp_azimuth",
    "controller.ki_azimuth": "ki_azimuth",
    "controller.kp_elevation": "kp_elevation",
    "controller.ki_elevation": "ki_elevation",
    "controller.offset_clamp": "offset_clamp",
    "controller.deadband_azimuth": "deadband_azimuth",
    "controller.deadband_elevation": "deadband_elevation",
    "controller.initial_offset_azimuth": "initial_offset_azimuth",
    "controller.initial_offset_elevation": "initial_offset_elevation",
    "controller.offsets_file": "offsets_file",
    "analysis.threshold_fraction": "threshold_fraction",
    "analysis.low_efficiency_floor": "low_efficiency_floor",
    "analysis.min_samples": "min_samples",
    "dsp.fir_taps": "fir_taps",
    "optics.half_acceptance": "half_acceptance",
    "optics.eta_peak": "eta_peak",
    "optics.rolloff_sharpness": "rolloff_sharpness",
    "optics.misalignment_x": "misalignment_x",
    "optics.misalignment_y": "misalignment_y",
    "plant.dni_peak": "dni_peak",
    "plant.clouds": "clouds",
    "plant.sensor_period": "sensor_period",
    "plant.supervisory_period": "supervisory_period",
    "plant.inverter_startup_delay": "inverter_startup_delay",
    "plant.inverter_dni_threshold": "inverter_dni_threshold",
    "plant.inverter_coupled": "inverter_coupled",
    "plant.alpha_contraction": "alpha_contraction",
    "plant.ripple_period": "ripple_period",
    "plant.ripple_depth": "ripple_depth",
    "plant.ripple_duration": "ripple_duration",
    "plant.power_noise_frac": "power_noise_frac",
    "plant.elevation_zero_offset": "elevation_zero_offset",
    "kinematics.orientation_speed": "orientation_speed",
    "kinematics.elevation_speed": "elevation_speed",
    "kinematics.orientation_resolution": "orientation_resolution",
    "kinematics.elevation_resolution": "elevation_resolution",
    "kinematics.orientation_accuracy": "orientation_accuracy",
    "kinematics.elevation_accuracy": "elevation_accuracy",
    "kinematics.orientation_min": "orientation_min",
    "kinematics.orientation_max": "orientation_max",
    "kinematics.elevation_min": "elevation_min",
    "kinematics.elevation_max": "elevation_max",
    "ephemeris.variant": "ephemeris_variant",
    "scan.mode": "scan_mode",
    "scan.half_width": "scan_half_width",
    "scan.step": "scan_step",
    "scan.solar_hour": "scan_solar_hour",
    "scan.samples_per_point": "scan_samples_per_point",
}

_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _coerce(field_name: str, value: str):
    kind = _FIELD_TYPES[field_name]
    if kind in ("bool", bool):
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{field_name}: not a boolean: {value!r}")
    if kind in ("int", int):
        return int(value)
    if kind in ("float", float):
        return float(value)
    return value


def config_from_mapping(mapping: dict[str, str]) -> ScenarioConfig:
    kwargs = {}
    for key, value in mapping.items():
        if key not in _KEY_MAP:
            raise ConfigError(f"unknown configuration key {key!r}")
        name = _KEY_MAP[key]
        kwargs[name] = _coerce(name, value)
    return ScenarioConfig(**kwargs)


def load_scenario(path, overrides=()) -> ScenarioConfig:
    """Read a scenario file and apply ``key=value`` override strings."""
    with open(path, encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value: {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping)


def dump_config(cfg: ScenarioConfig) -> str:
    """Resolved configuration as scenario-file text (sorted, round-trips)."""
    inverse = {v: k for k, v in _KEY_MAP.items()}
    lines = []
    for f in sorted(fields(ScenarioConfig), key=lambda f: inverse[f.name]):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{inverse[f.name]} = {value}")
    return "\n".join(lines) + "\n"


def parse_cloud_spec(spec: str, day_midnight: float,
                     solar_offset: float) -> tuple[CloudEvent, ...]:
    """Cloud list 'start:end:attenuation;...' in solar hours to events."""
    events = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"cloud entry needs start:end:attenuation: {chunk!r}")
        start_h, end_h, att = (float(p) for p in parts)
        events.append(CloudEvent(start=day_midnight + start_h * 3600.0 - solar_offset,
                                 end=day_midnight + end_h * 3600.0 - solar_offset,
                                 attenuation=att))
    return tuple(events)


# -- scenario assembly ------------------------------------------------------


@dataclass(frozen=True)
class ScenarioWorld:
    """Everything a run needs, assembled from one ScenarioConfig."""

    cfg: ScenarioConfig
    plant: Plant
    controller: object
    t_start: float
    t_end: float
    location: ObserverLocation
    solar_offset: float


def build_world(cfg: ScenarioConfig) -> ScenarioWorld:
    location = ObserverLocation(cfg.latitude, cfg.longitude)
    solar_offset = solar_time_offset(location)
    midnight = utc_midnight(cfg.date)
    t_start = midnight + cfg.start_solar_hour * 3600.0 - solar_offset
    t_end = midnight + cfg.end_solar_hour * 3600.0 - solar_offset
    sunrise, sunset = daylight_window(midnight, location, cfg.ephemeris_variant)

    profile = IrradianceProfile(
        sunrise=sunrise, sunset=sunset, peak=cfg.dni_peak,
        clouds=parse_cloud_spec(cfg.clouds, midnight, solar_offset))
    optics = ConcentratorSpec(
        half_acceptance=cfg.half_acceptance, eta_peak=cfg.eta_peak,
        rolloff_sharpness=cfg.rolloff_sharpness,
        misalignment=(cfg.misalignment_x, cfg.misalignment_y))
    limits = TravelLimits(cfg.orientation_min, cfg.orientation_max,
                          cfg.elevation_min, cfg.elevation_max)
    tracker = Tracker(
        orientation_axis=AxisSpec(cfg.orientation_speed,
                                  cfg.orientation_resolution,
                                  cfg.orientation_accuracy),
        elevation_axis=AxisSpec(cfg.elevation_speed,
                                cfg.elevation_resolution,
                                cfg.elevation_accuracy),
        limits=limits,
        pose=TrackerPose(0.0, cfg.elevation_min))
    plant_cfg = PlantConfig(
        sensor_period=cfg.sensor_period,
        supervisory_period=cfg.supervisory_period,
        inverter_startup_delay=cfg.inverter_startup_delay,
        inverter_dni_threshold=cfg.inverter_dni_threshold,
        inverter_coupled=cfg.inverter_coupled,
        alpha_contraction=cfg.alpha_contraction,
        ripple=MpptRipple(cfg.ripple_period, cfg.ripple_depth,
                          cfg.ripple_duration),
        power_noise_frac=cfg.power_noise_frac,
        elevation_zero_offset=cfg.elevation_zero_offset)
    plant = Plant(plant_cfg, optics, PlatformFrame(cfg.true_rotation), profile,
                  tracker, location, start_time=t_start, seed=cfg.seed,
                  ephemeris_variant=cfg.ephemeris_variant)

    controller_cfg = ControllerConfig(
        location=location,
        believed_frame=PlatformFrame(cfg.believed_rotation),
        limits=limits, beta=cfg.beta,
        kp_azimuth=cfg.kp_azimuth, ki_azimuth=cfg.ki_azimuth,
        kp_elevation=cfg.kp_elevation, ki_elevation=cfg.ki_elevation,
        offset_clamp=cfg.offset_clamp,
        deadband_azimuth=cfg.deadband_azimuth,
        deadband_elevation=cfg.deadband_elevation,
        analyzer=AnalyzerConfig(threshold_fraction=cfg.threshold_fraction,
                                low_efficiency_floor=cfg.low_efficiency_floor,
                                min_samples=cfg.min_samples),
        fir_taps=cfg.fir_taps,
        park_pose=TrackerPose(0.0, cfg.elevation_min),
        supervisory_period=cfg.supervisory_period,
        sensor_period=cfg.sensor_period,
        ephemeris_variant=cfg.ephemeris_variant)
    if cfg.mode == "open_loop":
        controller = OpenLoopTracker(controller_cfg, cfg.open_loop_period)
    else:
        if cfg.offsets_file:
            initial = load_offsets(cfg.offsets_file)
        else:
            initial = Offsets(cfg.initial_offset_azimuth,
                              cfg.initial_offset_elevation)
        controller = ClosedLoopTracker(controller_cfg, initial)
    return ScenarioWorld(cfg=cfg, plant=plant, controller=controller,
                         t_start=t_start, t_end=t_end, location=location,
                         solar_offset=solar_offset)


# -- metrics ----------------------------------------------------------------


@dataclass(frozen=True)
class DayMetrics:
    mean_daylight_efficiency: float
    energy_wh: float
    movements_orientation: int
    movements_elevation: int
    cycles_total: int
    cycles_accepted: int
    offset_azimuth_final: float
    offset_elevation_final: float
    offset_azimuth_min: float
    offset_azimuth_max: float
    offset_elevation_min: float
    offset_elevation_max: float

    @property
    def movements_total(self) -> int:
        return self.movements_orientation + self.movements_elevation

    def as_text(self) -> str:
        pairs = [
            ("mean_daylight_efficiency", f"{self.mean_daylight_efficiency:.6f}"),
            ("energy_wh", f"{self.energy_wh:.3f}"),
            ("movements_orientation", str(self.movements_orientation)),
            ("movements_elevation", str(self.movements_elevation)),
            ("movements_total", str(self.movements_total)),
            ("cycles_total", str(self.cycles_total)),
            ("cycles_accepted", str(self.cycles_accepted)),
            ("offset_azimuth_final", f"{self.offset_azimuth_final:.6f}"),
            ("offset_elevation_final", f"{self.offset_elevation_final:.6f}"),
            ("offset_azimuth_min", f"{self.offset_azimuth_min:.6f}"),
            ("offset_azimuth_max", f"{self.offset_azimuth_max:.6f}"),
            ("offset_elevation_min", f"{self.offset_elevation_min:.6f}"),
            ("offset_elevation_max", f"{self.offset_elevation_max:.6f}"),
        ]
        return "\n".join(f"{k} {v}" for k, v in pairs) + "\n"


def metrics_from_plant_log(path, catchment_area: float = 9.3,
                           irradiance_floor: float = 50.0,
                           sensor_period: float = 0.125):
    """(mean daylight efficiency, energy Wh) recomputed from a plant log CSV."""
    etas = []
    energy = 0.0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != PLANT_LOG_HEADER:
            raise ValueError(f"unexpected plant log header: {header}")
        for line in fh:
            parts = line.split(",")
            dni = float(parts[1])
            power = float(parts[2])
            if dni > 0.0:
                etas.append(power / (dni * catchment_area)
                            if dni > irradiance_floor else 0.0)
            energy += power * sensor_period / 3600.0
    mean_eta = sum(etas) / len(etas) if etas else 0.0
    return mean_eta, energy


# -- the day loop ------------------------------------------------------------


def run_scenario(cfg: ScenarioConfig, out_dir) -> DayMetrics:
    """Simulate one day, write CSV artifacts, return the day's metrics."""
    world = build_world(cfg)
    plant, controller = world.plant, world.controller
    os.makedirs(out_dir, exist_ok=True)

    area = plant.config.catchment_area
    floor = controller.cfg.irradiance_floor
    sunrise, sunset = plant.profile.sunrise, plant.profile.sunset

    log_rows = [PLANT_LOG_HEADER]
    eta_sum = 0.0
    eta_count = 0
    energy_wh = 0.0
    dt = cfg.sensor_period
    n_ticks = round((world.t_end - world.t_start) / dt)

    def log_row(obs):
        off = controller.offsets
        true_pose = plant.tracker.pose
        return (f"{obs.t:.3f},{obs.dni:.6f},{obs.power:.6f},"
                f"{obs.pose.theta_ori:.6f},{obs.pose.theta_ele:.6f},"
                f"{off.azimuth:.6f},{off.elevation:.6f},"
                f"{true_pose.theta_ori:.6f},{true_pose.theta_ele:.6f},"
                f"{solar_hour(obs.t, world.location):.6f}")

    obs = plant.observe()
    log_rows.append(log_row(obs))
    for _ in range(n_ticks):
        obs = plant.tick()
        controller.on_tick(plant, obs)
        log_rows.append(log_row(obs))
        if sunrise < obs.t < sunset:
            eta_sum += (obs.power / (obs.dni * area)
                        if obs.dni > floor else 0.0)
            eta_count += 1
        energy_wh += obs.power * dt / 3600.0

    mean_eta = eta_sum / eta_count if eta_count else 0.0
    if not 0.0 <= mean_eta <= 1.0:
        raise InvariantViolation(f"mean efficiency {mean_eta} outside [0, 1]")

    offsets_seq = [(c.t_end, c.offset_azimuth, c.offset_elevation)
                   for c in controller.cycles]
    azi_values = [controller.offsets.azimuth] + [o[1] for o in offsets_seq]
    ele_values = [controller.offsets.elevation] + [o[2] for o in offsets_seq]
    accepted = sum(1 for c in controller.cycles
                   if c.label_ori.accepted or c.label_ele.accepted)
    metrics = DayMetrics(
        mean_daylight_efficiency=mean_eta,
        energy_wh=energy_wh,
        movements_orientation=controller.movement_counts[ORIENTATION],
        movements_elevation=controller.movement_counts[ELEVATION],
        cycles_total=len(controller.cycles),
        cycles_accepted=accepted,
        offset_azimuth_final=controller.offsets.azimuth,
        offset_elevation_final=controller.offsets.elevation,
        offset_azimuth_min=min(azi_values), offset_azimuth_max=max(azi_values),
        offset_elevation_min=min(ele_values),
        offset_elevation_max=max(ele_values))

    _write(out_dir, "plant_log.csv", "\n".join(log_rows) + "\n")
    write_tables_csv(os.path.join(out_dir, "trajectories.csv"),
                     controller.tables)
    _write(out_dir, "offsets.csv", _offsets_csv(cfg, world, controller))
    _write(out_dir, "movements.csv", _movements_csv(controller))
    _write(out_dir, "cycles.csv", _cycles_csv(controller))
    _write(out_dir, "metrics.txt", metrics.as_text())
    _write(out_dir, "config_resolved.cfg", dump_config(cfg))
    save_offsets(os.path.join(out_dir, "offsets.txt"), controller.offsets,
                 world.t_end)
    return metrics


def _write(out_dir, name, text) -> None:
    with open(os.path.join(out_dir, name), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(text)


def _offsets_csv(cfg, world, controller) -> str:
    rows = [OFFSET_LOG_HEADER,
            f"{world.t_start:.3f},{cfg.initial_offset_azimuth:.6f},"
            f"{cfg.initial_offset_elevation:.6f}"]
    for c in controller.cycles:
        rows.append(f"{c.t_end:.3f},{c.offset_azimuth:.6f},"
                    f"{c.offset_elevation:.6f}")
    return "\n".join(rows) + "\n"


def _movements_csv(controller) -> str:
    rows = [MOVEMENT_LOG_HEADER]
    for m in controller.movements:
        rows.append(f"{m.movement_index},{m.axis},{m.t_start:.3f},"
                    f"{m.t_end:.3f},{m.theta_start:.6f},{m.theta_target:.6f}")
    return "\n".join(rows) + "\n"


def _cycles_csv(controller) -> str:
    rows = [CYCLE_LOG_HEADER]
    for c in controller.cycles:
        def opt(x, spec="{:.6f}"):
            return spec.format(x) if x is not None else ""
        rows.append(
            f"{c.index},{c.t_start:.3f},{c.t_end:.3f},{c.label_ori.value},"
            f"{c.label_ele.value},{opt(c.theta_ori)},{opt(c.theta_ele)},"
            f"{opt(c.ts_hat, '{:.3f}')},{opt(c.error_azimuth)},"
            f"{opt(c.error_elevation)},{int(c.updated_azimuth)},"
            f"{int(c.updated_elevation)},{c.offset_azimuth:.6f},"
            f"{c.offset_elevation:.6f},{int(c.elevation_locked)}")
    return "\n".join(rows) + "\n"


# -- comparison --------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonResult:
    closed: DayMetrics
    open_60: DayMetrics
    open_120: DayMetrics

    @property
    def gain_vs_open_120(self) -> float:
        return (self.closed.mean_daylight_efficiency
                / self.open_120.mean_daylight_efficiency - 1.0)

    @property
    def gain_vs_open_60(self) -> float:
        return (self.closed.mean_daylight_efficiency
                / self.open_60.mean_daylight_efficiency - 1.0)

    @property
    def movement_ratio_vs_open_60(self) -> float:
        return self.closed.movements_total / self.open_60.movements_total

    def as_text(self) -> str:
        lines = [
            f"closed_mean_efficiency {self.closed.mean_daylight_efficiency:.6f}",
            f"open_60_mean_efficiency {self.open_60.mean_daylight_efficiency:.6f}",
            f"open_120_mean_efficiency {self.open_120.mean_daylight_efficiency:.6f}",
            f"relative_gain_vs_open_120 {self.gain_vs_open_120:.6f}",
            f"relative_gain_vs_open_60 {self.gain_vs_open_60:.6f}",
            "expected_gain_band_vs_open_120 [0.10, 0.35]",
            "reference_field_gain_inside_band 0.21",
            f"closed_movements {self.closed.movements_total}",
            f"open_60_movements {self.open_60.movements_total}",
            f"open_120_movements {self.open_120.movements_total}",
            f"movement_ratio_closed_over_open_60 {self.movement_ratio_vs_open_60:.6f}",
        ]
        return "\n".join(lines) + "\n"


def run_comparison(cfg: ScenarioConfig, out_dir) -> ComparisonResult:
    """Closed loop vs 60 s and 120 s open loop on the identical plant/seed."""
    os.makedirs(out_dir, exist_ok=True)
    closed = run_scenario(replace(cfg, mode="closed_loop"),
                          os.path.join(out_dir, "closed_loop"))
    open_60 = run_scenario(replace(cfg, mode="open_loop", open_loop_period=60.0),
                           os.path.join(out_dir, "open_loop_60"))
    open_120 = run_scenario(replace(cfg, mode="open_loop",
                                    open_loop_period=120.0),
                            os.path.join(out_dir, "open_loop_120"))
    result = ComparisonResult(closed, open_60, open_120)
    _write(out_dir, "comparison.txt", result.as_text())
    return result


# -- power-surface scan -------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    alpha_recovered: float
    alpha_x: float
    alpha_y: float
    peak_power: float
    xs: np.ndarray
    ys: np.ndarray
    power: np.ndarray  # shape (len(ys), len(xs))

    def as_text(self) -> str:
        return (f"alpha_recovered {self.alpha_recovered:.6f}\n"
                f"alpha_x {self.alpha_x:.6f}\n"
                f"alpha_y {self.alpha_y:.6f}\n"
                f"peak_power {self.peak_power:.6f}\n")


def _pose_for_projection(x_target, y_target, sun, frame):
    """Wing pose whose beam projection lands on (x_target, y_target)."""
    ideal = ConcentratorSpec()
    el = sun.elevation - y_target
    az = sun.azimuth - x_target / math.cos(math.radians(el))
    for _ in range(4):
        pose = TrackerPose(azimuth_to_orientation(az, frame), el)
        p = project_sun(sun, pose, frame, ideal)
        az -= (x_target - p.x) / math.cos(math.radians(el))
        el -= (y_target - p.y)
    return TrackerPose(azimuth_to_orientation(az, frame), el)


def _contour_half_width(axis_values, powers, level) -> float:
    """Half-width between the two crossings of ``level``, interpolated."""
    above = powers >= level
    if not above.any():
        raise InvariantViolation("no samples above the contour level")
    idx = np.flatnonzero(above)
    lo, hi = idx[0], idx[-1]
    if lo == 0 or hi == len(powers) - 1:
        raise InvariantViolation("contour leaves the scanned window")

    def crossing(i_out, i_in):
        p0, p1 = powers[i_out], powers[i_in]
        w = (level - p0) / (p1 - p0)
        return axis_values[i_out] + w * (axis_values[i_in] - axis_values[i_out])

    left = crossing(lo - 1, lo)
    right = crossing(hi + 1, hi)
    return (right - left) / 2.0


def run_surface_scan(cfg: ScenarioConfig, out_dir) -> ScanResult:
    """Raster the beam projection around the sun and recover the 90% contour.

    Characterization mode: a quasi-static scan of commanded wing poses at
    one instant. ``scan.mode = resistive`` bypasses the inverter (no
    start-up gate, ripple, or acceptance contraction); ``inverter`` keeps
    the coupled model so the contracted acceptance angle is visible.
    """
    os.makedirs(out_dir, exist_ok=True)
    coupled = cfg.scan_mode == "inverter"
    world = build_world(replace(cfg, inverter_coupled=coupled,
                                misalignment_x=0.0, misalignment_y=0.0,
                                elevation_zero_offset=0.0))
    plant = world.plant
    midnight = utc_midnight(cfg.date)
    t0 = midnight + cfg.scan_solar_hour * 3600.0 - world.solar_offset
    if coupled:
        # Warm start well past the start-up delay, outside a ripple dip.
        plant._dni_above_since = t0 - 4.0 * cfg.inverter_startup_delay
        plant._inverter_on_time = t0 - 2.0 * cfg.inverter_startup_delay - 130.0
    plant.t = t0

    sun = plant.sun_at(t0)
    frame = plant.true_frame
    n = int(round(cfg.scan_half_width / cfg.scan_step))
    axis_values = np.array([k * cfg.scan_step for k in range(-n, n + 1)])
    power = np.zeros((len(axis_values), len(axis_values)))
    rows = [SCAN_HEADER]
    n_avg = max(1, cfg.scan_samples_per_point)
    for iy, y in enumerate(axis_values):
        for ix, x in enumerate(axis_values):
            pose = _pose_for_projection(x, y, sun, frame)
            total = 0.0
            for _ in range(n_avg):
                draw = (plant.rng.standard_normal()
                        if plant.config.power_noise_frac > 0.0 else 0.0)
                total += plant.dc_power(t0, pose=pose, noise_draw=draw)
            power[iy, ix] = total / n_avg
            rows.append(f"{x:.4f},{y:.4f},{power[iy, ix]:.6f}")

    peak = float(power.max())
    mid = n  # index of the zero offset row/column
    alpha_x = _contour_half_width(axis_values, power[mid, :], 0.9 * peak)
    alpha_y = _contour_half_width(axis_values, power[:, mid], 0.9 * peak)
    result = ScanResult(alpha_recovered=(alpha_x + alpha_y) / 2.0,
                        alpha_x=alpha_x, alpha_y=alpha_y, peak_power=peak,
                        xs=axis_values, ys=axis_values, power=power)
    _write(out_dir, "scan.csv", "\n".join(rows) + "\n")
    _write(out_dir, "scan_summary.txt", result.as_text())
    _write(out_dir, "config_resolved.cfg", dump_config(cfg))
    return result
