"""Spherical geometry: great-circle distance, bearings, deflection angles.

Distances use the haversine formula on a sphere of radius 6371.0 km, which
is numerically stable at the short ranges typical of telemetry steps.
Angles follow the compass convention: bearings are measured from north,
positive clockwise, and a positive deflection is a clockwise turn.  All
angles are reported in (-pi, pi], with -pi mapped to pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CoincidentPoints

EARTH_RADIUS_KM = 6371.0

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LatLon:
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi], mapping the -pi boundary to pi."""
    w = math.remainder(theta, _TWO_PI)
    if w <= -math.pi:
        w += _TWO_PI
    return w


def great_circle_km(a: LatLon, b: LatLon) -> float:
    """Haversine distance between two points, in kilometres."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def forward_bearing(a: LatLon, b: LatLon) -> float:
    """Initial great-circle bearing from a toward b.

    Measured from north, positive clockwise, in (-pi, pi].
    """
    if a.lat == b.lat and a.lon == b.lon:
        raise CoincidentPoints(f"cannot take a bearing between coincident points {a}")
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlon = math.radians(b.lon - a.lon)
    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return wrap_angle(math.atan2(y, x))


def deflection_angle(p0: LatLon, p1: LatLon, p2: LatLon) -> float:
    """Change in travel direction at p1 along the path p0 -> p1 -> p2.

    Zero means straight ahead; positive means a clockwise turn.  Wrapped
    into (-pi, pi].
    """
    return wrap_angle(forward_bearing(p1, p2) - forward_bearing(p0, p1))
