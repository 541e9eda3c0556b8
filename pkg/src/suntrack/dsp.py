"""Movement trajectory tables, zero-phase FIR smoothing, efficiency.

During each axis leg the supervisor records one sample per sensor period
into a per-axis table: timestamp, DC power, DNI and the moving-axis
coordinate. Tables are smoothed with a symmetric moving average applied
with edge replication (zero phase, unit DC gain) before the efficiency
trajectory eta = P / (DNI * area) is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DEFAULT_FIR_TAPS = 11
MIN_ANALYZABLE_SAMPLES = 15
IRRADIANCE_FLOOR = 50.0  # W/m^2; below it the efficiency is defined as zero


@dataclass(frozen=True)
class TrajectoryTable:
    """Samples recorded while one axis leg executed."""

    axis: str
    movement_index: int
    ts: np.ndarray       # POSIX seconds, strictly increasing
    power: np.ndarray    # W
    irradiance: np.ndarray  # W/m^2
    theta: np.ndarray    # moving-axis coordinate, degrees (measured)
    filtered: bool = False
    short: bool = False  # fewer samples than the analyzable minimum

    def __post_init__(self):
        n = len(self.ts)
        if not (len(self.power) == len(self.irradiance) == len(self.theta) == n):
            raise ValueError("table columns must share one length")
        if n > 1 and not np.all(np.diff(self.ts) > 0.0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.ts)


@dataclass(frozen=True)
class EfficiencyTrajectory:
    """Instantaneous efficiency along a movement, aligned with theta."""

    axis: str
    movement_index: int
    ts: np.ndarray
    eta: np.ndarray
    theta: np.ndarray

    def __len__(self):
        return len(self.ts)


class TrajectoryRecorder:
    """Accumulates one table for an executing leg, one row per sensor period."""

    def __init__(self, axis: str, movement_index: int,
                 min_samples: int = MIN_ANALYZABLE_SAMPLES):
        self.axis = axis
        self.movement_index = movement_index
        self.min_samples = min_samples
        self._ts: list[float] = []
        self._power: list[float] = []
        self._irradiance: list[float] = []
        self._theta: list[float] = []

    def add(self, t: float, power: float, irradiance: float,
            theta: float) -> None:
        self._ts.append(t)
        self._power.append(power)
        self._irradiance.append(irradiance)
        self._theta.append(theta)

    def __len__(self):
        return len(self._ts)

    def finish(self) -> TrajectoryTable:
        n = len(self._ts)
        return TrajectoryTable(
            axis=self.axis,
            movement_index=self.movement_index,
            ts=np.asarray(self._ts),
            power=np.asarray(self._power),
            irradiance=np.asarray(self._irradiance),
            theta=np.asarray(self._theta),
            short=n < self.min_samples,
        )


def _moving_average(values: np.ndarray, taps: int) -> np.ndarray:
    half = taps // 2
    padded = np.concatenate([np.full(half, values[0]), values,
                             np.full(half, values[-1])])
    kernel = np.full(taps, 1.0 / taps)
    return np.convolve(padded, kernel, mode="valid")


def smooth(table: TrajectoryTable, taps: int = DEFAULT_FIR_TAPS) -> TrajectoryTable:
    """Zero-phase FIR smoothing of the power and DNI columns.

    Symmetric moving-average kernel applied with edge replication, DC gain
    exactly one. Tables shorter than the kernel pass through unfiltered.
    """
    if taps < 1 or taps % 2 == 0:
        raise ValueError("taps must be a positive odd count")
    if len(table) < taps:
        return replace(table, filtered=False)
    return replace(table,
                   power=_moving_average(table.power, taps),
                   irradiance=_moving_average(table.irradiance, taps),
                   filtered=True)


def efficiency(table: TrajectoryTable, catchment_area: float,
               irradiance_floor: float = IRRADIANCE_FLOOR) -> EfficiencyTrajectory:
    """Efficiency trajectory eta = P / (DNI * area), zero under low DNI.

    Whenever the irradiance is at or below the floor the efficiency is
    defined as zero (also covering true zero-irradiance samples).
    """
    if catchment_area <= 0.0:
        raise ValueError("catchment area must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = table.power / (table.irradiance * catchment_area)
    eta = np.where(table.irradiance > irradiance_floor, raw, 0.0)
    eta = np.clip(eta, 0.0, 1.0)
    return EfficiencyTrajectory(axis=table.axis,
                                movement_index=table.movement_index,
                                ts=table.ts, eta=eta, theta=table.theta)


CSV_HEADER = "ts,P,Irr,theta,axis,movement_index"


def table_csv_rows(table: TrajectoryTable) -> list[str]:
    return [
        f"{t:.3f},{p:.6f},{irr:.6f},{th:.6f},{table.axis},{table.movement_index}"
        for t, p, irr, th in zip(table.ts, table.power,
                                 table.irradiance, table.theta)
    ]


def write_tables_csv(path, tables) -> None:
    """Serialize trajectory tables as UTF-8 CSV with a dot decimal separator."""
    lines = [CSV_HEADER]
    for table in tables:
        lines.extend(table_csv_rows(table))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_tables_csv(path) -> list[TrajectoryTable]:
    """Inverse of :func:`write_tables_csv`, mainly for tests and tooling."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        grouped: dict[tuple[str, int], list[tuple[float, float, float, float]]] = {}
        order: list[tuple[str, int]] = []
        for line in fh:
            ts, p, irr, theta, axis, idx = line.strip().split(",")
            key = (axis, int(idx))
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append((float(ts), float(p), float(irr), float(theta)))
    tables = []
    for axis, idx in order:
        rows = np.asarray(grouped[(axis, idx)])
        tables.append(TrajectoryTable(
            axis=axis, movement_index=idx,
            ts=rows[:, 0], power=rows[:, 1],
            irradiance=rows[:, 2], theta=rows[:, 3],
            short=len(rows) < MIN_ANALYZABLE_SAMPLES))
    return tables
