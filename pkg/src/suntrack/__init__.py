"""Power-feedback sun tracking for HCPV concentrators, simulated at desk scale.

A dual-axis tracker points concentrator modules whose usable acceptance
half-angle is near one degree, so installation and assembly errors matter.
This package simulates the whole loop: an analytic sun-position
feed-forward, a plant with concentrator optics and an inverter, trajectory
recording and smoothing during pointing movements, shape classification of
the efficiency trajectories, and asynchronous PI corrections that absorb
mis-calibration without any explicit calibration step.
"""

from .analysis import (AnalyzerConfig, SunEstimate, TrajectoryLabel, analyze,
                       classify, combined_timestamp, estimate_theta)
from .controller import (ClosedLoopTracker, ControllerConfig, Offsets,
                         OpenLoopTracker, PiAccumulator, Prediction,
                         corrected_solar_pose, load_offsets, predict,
                         save_offsets)
from .dsp import (EfficiencyTrajectory, TrajectoryRecorder, TrajectoryTable,
                  efficiency, smooth)
from .ephemeris import (ObserverLocation, SolarAngles, TimestampRangeError,
                        daylight_window, solar_hour, solar_position,
                        solar_time_offset)
from .frames import (PlatformFrame, azimuth_to_orientation,
                     orientation_to_azimuth, wrap_degrees, wrap_signed)
from .harness import (ComparisonResult, DayMetrics, ScanResult,
                      ScenarioConfig, build_world, load_scenario,
                      run_comparison, run_scenario, run_surface_scan)
from .kinematics import (AxisSpec, LimitError, MotionPlan, Tracker,
                         TrackerPose, TravelLimits)
from .optics import (CellProjection, ConcentratorSpec, inside_region,
                     project_sun, relative_efficiency)
from .plant import (CloudEvent, IrradianceProfile, MpptRipple, Plant,
                    PlantConfig, PlantObservation)

__version__ = "0.1.0"
