"""Efficiency-trajectory classification and sun-coordinate estimation.

A movement's efficiency trajectory is sorted into one of four usable
shapes (or discarded):

* T1, off-center: the maximum sits at or adjacent to one end with a
  monotone approach; seen at start-up or after clouds. The estimate is
  the coordinate of the maximum.
* T2, centered with both ends below the threshold: the estimate is the
  midpoint of the two threshold crossings A and B.
* T3, centered with both ends above the threshold and a strictly larger
  interior maximum: A and B are the endpoints themselves.
* T4, half-centered: exactly one end below the threshold; A is the
  crossing iterated in from the low end, B the high endpoint.

The threshold is a fraction of the trajectory's own maximum, which makes
labels invariant to uniform irradiance scaling. Trajectories that are too
short, or match no shape, are rejected; trajectories whose maximum
efficiency sits below an absolute floor (inverter off, heavy clouds) are
flagged low-efficiency. Rejected and low-efficiency movements leave the
axis correction untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dsp import EfficiencyTrajectory, MIN_ANALYZABLE_SAMPLES


class TrajectoryLabel(str, Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"
    REJECTED = "rejected"
    LOW_EFFICIENCY = "low_efficiency"

    @property
    def accepted(self) -> bool:
        return self in _ACCEPTED


_ACCEPTED = {TrajectoryLabel.T1, TrajectoryLabel.T2,
             TrajectoryLabel.T3, TrajectoryLabel.T4}


@dataclass(frozen=True, slots=True)
class AnalyzerConfig:
    threshold_fraction: float = 0.92   # of the trajectory's own maximum
    low_efficiency_floor: float = 0.02
    min_samples: int = MIN_ANALYZABLE_SAMPLES
    endpoint_window: float = 0.10      # fraction of samples counting as "adjacent"
    monotone_drawdown: float = 0.10    # tolerated dip, fraction of the range

    def __post_init__(self):
        if not 0.90 <= self.threshold_fraction <= 0.95:
            raise ValueError("threshold fraction must be within [0.90, 0.95]")


@dataclass(frozen=True, slots=True)
class SunEstimate:
    """Estimated sun coordinate for one axis movement."""

    axis: str
    label: TrajectoryLabel
    theta: float | None = None   # degrees, within the trajectory's theta range
    ts: float | None = None      # sample timestamp at which theta was crossed

    @property
    def accepted(self) -> bool:
        return self.label.accepted


def _monotone_trend(values: np.ndarray, rising: bool, tolerance: float) -> bool:
    """True when values rise (or fall) without a dip beyond ``tolerance``."""
    if len(values) < 2:
        return True
    seq = values if rising else values[::-1]
    drawdown = float(np.max(np.maximum.accumulate(seq) - seq))
    return drawdown <= tolerance


def classify(traj: EfficiencyTrajectory, cfg: AnalyzerConfig) -> TrajectoryLabel:
    """Sort a trajectory into T1..T4, rejected, or low-efficiency."""
    n = len(traj)
    if n == 0:
        return TrajectoryLabel.LOW_EFFICIENCY
    eta = traj.eta
    peak = float(np.max(eta))
    if peak < cfg.low_efficiency_floor:
        return TrajectoryLabel.LOW_EFFICIENCY
    if n < cfg.min_samples:
        return TrajectoryLabel.REJECTED

    threshold = cfg.threshold_fraction * peak
    imax = int(np.argmax(eta))
    first, last = float(eta[0]), float(eta[-1])
    low_first = first < threshold
    low_last = last < threshold

    if low_first and low_last:
        # The maximum cannot sit on a sub-threshold endpoint.
        return TrajectoryLabel.T2

    if not low_first and not low_last:
        if 0 < imax < n - 1 and peak > max(first, last):
            return TrajectoryLabel.T3
        return TrajectoryLabel.REJECTED

    # Exactly one endpoint below the threshold.
    window = max(1, math.ceil(cfg.endpoint_window * n))
    tolerance = cfg.monotone_drawdown * (peak - float(np.min(eta)))
    if imax >= n - window and not low_last:
        if _monotone_trend(eta[:imax + 1], rising=True, tolerance=tolerance):
            return TrajectoryLabel.T1
        return TrajectoryLabel.REJECTED
    if imax < window and not low_first:
        if _monotone_trend(eta[imax:], rising=False, tolerance=tolerance):
            return TrajectoryLabel.T1
        return TrajectoryLabel.REJECTED
    if window <= imax < n - window:
        return TrajectoryLabel.T4
    return TrajectoryLabel.REJECTED


def estimate_theta(traj: EfficiencyTrajectory, label: TrajectoryLabel,
                   cfg: AnalyzerConfig) -> float | None:
    """Sun coordinate estimate for an accepted label.

    T1 takes the coordinate of the (earliest) maximum. T2, T3 and T4 share
    one rule: A is the first sample from the left at or above the
    threshold, B the first from the right, and the estimate is their theta
    midpoint. Never extrapolates beyond the sampled theta range.
    """
    if label not in _ACCEPTED:
        return None
    eta = traj.eta
    imax = int(np.argmax(eta))
    if label is TrajectoryLabel.T1:
        return float(traj.theta[imax])
    threshold = cfg.threshold_fraction * float(eta[imax])
    above = np.flatnonzero(eta >= threshold)
    if len(above) == 0:  # unreachable after classification; stay defensive
        return None
    a, b = int(above[0]), int(above[-1])
    return 0.5 * (float(traj.theta[a]) + float(traj.theta[b]))


def timestamp_at(traj: EfficiencyTrajectory, theta_hat: float) -> float:
    """Recorded sample timestamp nearest to the axis passing ``theta_hat``."""
    idx = int(np.argmin(np.abs(traj.theta - theta_hat)))
    return float(traj.ts[idx])


def analyze(traj: EfficiencyTrajectory, cfg: AnalyzerConfig) -> SunEstimate:
    """Classify and, when accepted, estimate the sun coordinate and time."""
    label = classify(traj, cfg)
    theta_hat = estimate_theta(traj, label, cfg)
    if theta_hat is None:
        if label in _ACCEPTED:  # estimation failed on an accepted shape
            label = TrajectoryLabel.REJECTED
        return SunEstimate(axis=traj.axis, label=label)
    return SunEstimate(axis=traj.axis, label=label, theta=theta_hat,
                       ts=timestamp_at(traj, theta_hat))


def combined_timestamp(orientation: SunEstimate | None,
                       elevation: SunEstimate | None) -> float | None:
    """Shared evaluation instant for the corrections.

    With both axes accepted it is the midpoint of the two per-axis
    crossing times; with one, that axis's time; with none, None (the
    correction stage is skipped).
    """
    ori_ok = orientation is not None and orientation.accepted
    ele_ok = elevation is not None and elevation.accepted
    if ori_ok and ele_ok:
        return orientation.ts + (elevation.ts - orientation.ts) / 2.0
    if ori_ok:
        return orientation.ts
    if ele_ok:
        return elevation.ts
    return None
