"""Analytic sun position: the feed-forward of the tracking loop.

Implements the PSA algorithm (Blanco-Muriel et al., Solar Energy 70(5),
2001), a compact fitted ephemeris returning geographic azimuth and
elevation from UTC time and observer coordinates. Two coefficient sets
are available:

* ``"psa2001"`` - the original fit (valid 1999-2050).
* ``"psa2020"`` - the refitted coefficients (Blanco et al., Solar Energy
  2020), tuned for 2020-2050 and about twice as accurate there.

The default set is chosen by validation against an independently written
astronomical oracle in the test suite (see ``tests/sun_oracle.py``); the
quantitative gate is a 0.02 degree agreement during daytime.

All functions are pure; timestamps are POSIX seconds (UTC) or timezone
aware ``datetime`` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

TWO_PI = 2.0 * math.pi

#: POSIX timestamp of the J2000.0 epoch (2000-01-01 12:00:00 UTC).
J2000_POSIX = 946728000.0

#: Coefficient validity window, as POSIX timestamps (1999-01-01 .. 2051-01-01).
VALID_FROM = 915148800.0
VALID_UNTIL = 2556144000.0

_EARTH_MEAN_RADIUS_KM = 6371.01
_ASTRONOMICAL_UNIT_KM = 149597890.0

#: Fitted coefficients, in radians except the sidereal-time pair (hours).
#: Order: ecliptic-node (omega0, omega1), mean longitude (l0, l1),
#: mean anomaly (g0, g1), ecliptic longitude corrections (c_sin_g,
#: c_sin_2g, c_const, c_sin_omega), obliquity (e0, e1, e_cos_omega),
#: sidereal time (s0, s1).
_COEFFS = {
    "psa2001": (
        2.1429, -0.0010394594,
        4.8950630, 0.017202791698,
        6.2400600, 0.0172019699,
        0.03341607, 0.00034894, -0.0001134, -0.0000203,
        0.4090928, -6.2140e-9, 0.0000396,
        6.6974243242, 0.0657098283,
    ),
    "psa2020": (
        2.267127827, -9.300339267e-4,
        4.895036035, 1.720279602e-2,
        6.239468336, 1.720200135e-2,
        3.338320972e-2, 3.497596876e-4, -1.544353226e-4, -8.689729360e-6,
        4.090904909e-1, -6.213605399e-9, 4.418094944e-5,
        6.697096103, 6.570984737e-2,
    ),
}

DEFAULT_VARIANT = "psa2020"


class TimestampRangeError(ValueError):
    """Raised for timestamps outside the fitted validity window."""


@dataclass(frozen=True, slots=True)
class ObserverLocation:
    """Geographic observer coordinates in degrees (north/east positive)."""

    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True, slots=True)
class SolarAngles:
    """Sun direction in the geographic frame.

    ``azimuth`` is measured clockwise from geographic north in [0, 360);
    ``elevation`` is degrees above the horizon (negative below).
    """

    azimuth: float
    elevation: float


def to_posix(when) -> float:
    """Coerce a datetime (timezone aware) or POSIX seconds to float seconds."""
    if isinstance(when, datetime):
        if when.tzinfo is None:
            raise ValueError("naive datetimes are ambiguous; attach a timezone")
        return when.timestamp()
    return float(when)


def solar_position(when, location: ObserverLocation,
                   variant: str = DEFAULT_VARIANT) -> SolarAngles:
    """Sun azimuth/elevation at ``when`` (UTC) for ``location``.

    Deterministic and continuous in time apart from the azimuth wrap at
    360 degrees. Includes the algorithm's topocentric parallax shift;
    no atmospheric refraction.

    Raises:
        TimestampRangeError: outside the 1999-2050 validity window.
    """
    t = to_posix(when)
    if not VALID_FROM <= t < VALID_UNTIL:
        raise TimestampRangeError(
            f"timestamp {t} outside the 1999-2050 validity window")
    (om0, om1, l0, l1, g0, g1,
     c1, c2, c3, c4, e0, e1, e2, s0, s1) = _COEFFS[variant]

    days = (t - J2000_POSIX) / 86400.0
    hours_utc = (t % 86400.0) / 3600.0

    omega = om0 + om1 * days
    mean_longitude = l0 + l1 * days
    mean_anomaly = g0 + g1 * days
    ecl_longitude = (mean_longitude
                     + c1 * math.sin(mean_anomaly)
                     + c2 * math.sin(2.0 * mean_anomaly)
                     + c3 + c4 * math.sin(omega))
    obliquity = e0 + e1 * days + e2 * math.cos(omega)

    sin_l = math.sin(ecl_longitude)
    right_ascension = math.atan2(math.cos(obliquity) * sin_l,
                                 math.cos(ecl_longitude))
    if right_ascension < 0.0:
        right_ascension += TWO_PI
    declination = math.asin(math.sin(obliquity) * sin_l)

    gmst_hours = s0 + s1 * days + hours_utc
    local_sidereal = math.radians(gmst_hours * 15.0 + location.longitude)
    hour_angle = local_sidereal - right_ascension

    lat = math.radians(location.latitude)
    cos_lat = math.cos(lat)
    sin_lat = math.sin(lat)
    cos_ha = math.cos(hour_angle)

    zenith = math.acos(cos_lat * cos_ha * math.cos(declination)
                       + math.sin(declination) * sin_lat)
    azimuth = math.atan2(-math.sin(hour_angle),
                         math.tan(declination) * cos_lat - sin_lat * cos_ha)
    if azimuth < 0.0:
        azimuth += TWO_PI

    # Mean-distance parallax shift toward the horizon.
    zenith += (_EARTH_MEAN_RADIUS_KM / _ASTRONOMICAL_UNIT_KM) * math.sin(zenith)

    return SolarAngles(azimuth=math.degrees(azimuth),
                       elevation=90.0 - math.degrees(zenith))


def solar_time_offset(location: ObserverLocation) -> float:
    """Seconds to add to UTC for local solar time (longitude / 15 h).

    Display convention only; no equation-of-time term.
    """
    return location.longitude / 15.0 * 3600.0


def solar_hour(t_posix: float, location: ObserverLocation) -> float:
    """Local solar time of day in hours, for plot axes and configs."""
    return ((t_posix + solar_time_offset(location)) % 86400.0) / 3600.0


def daylight_window(day_start_posix: float, location: ObserverLocation,
                    variant: str = DEFAULT_VARIANT,
                    coarse_step: float = 120.0) -> tuple[float, float]:
    """(sunrise, sunset) POSIX seconds for the day starting at ``day_start_posix``.

    Scans the 24 h span at ``coarse_step`` resolution and refines each
    horizon crossing by bisection to well under a second.
    """

    def elevation(t):
        return solar_position(t, location, variant).elevation

    ts = [day_start_posix + k * coarse_step
          for k in range(int(86400.0 / coarse_step) + 1)]
    crossings = []
    for t0, t1 in zip(ts, ts[1:]):
        e0, e1 = elevation(t0), elevation(t1)
        if (e0 < 0.0) != (e1 < 0.0):
            lo, hi = t0, t1
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if (elevation(lo) < 0.0) == (elevation(mid) < 0.0):
                    lo = mid
                else:
                    hi = mid
            crossings.append(0.5 * (lo + hi))
    if len(crossings) < 2:
        raise ValueError("no full daylight window in the given day span")
    return crossings[0], crossings[1]


def utc_midnight(date_iso: str) -> float:
    """POSIX seconds of UTC midnight for an ISO date string (YYYY-MM-DD)."""
    d = datetime.strptime(date_iso, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    return d.timestamp()
