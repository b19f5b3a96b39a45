"""Short-range geographic math on a local tangent plane.

Missions for a micro AUV span tens to hundreds of meters, so all distance,
bearing, and destination math uses an equirectangular projection about the
midpoint latitude with a spherical earth radius of 6 371 000 m.  Headings are
compass degrees: 0 north, 90 east, wrapped to [0, 360).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6371000.0


class DegenerateSegment(ValueError):
    """Raised when a bearing is requested between two coincident points."""


def normalize_heading(degrees: float) -> float:
    """Wrap a heading to [0, 360)."""
    return degrees % 360.0


def _normalize_lon(lon: float) -> float:
    # wrap to (-180, 180], keeping +180 for the antimeridian itself
    wrapped = ((lon + 180.0) % 360.0) - 180.0
    if wrapped == -180.0:
        wrapped = 180.0
    return wrapped


@dataclass(frozen=True)
class GeoPoint:
    """WGS-ish geographic coordinate in decimal degrees.

    Latitude must lie in [-90, 90]; longitude is normalized to (-180, 180].
    """

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        object.__setattr__(self, "lon", _normalize_lon(self.lon))


def wrap_angle_error(reference: float, actual: float) -> float:
    """Signed shortest angular error reference - actual, in (-180, 180].

    The result is what must be added to `actual` to reach `reference`
    (mod 360); a tie at half a turn resolves to +180.
    """
    err = (reference - actual) % 360.0
    if err > 180.0:
        err -= 360.0
    return err


def tangent_offset(a: GeoPoint, b: GeoPoint) -> tuple[float, float]:
    """East/north displacement in meters from a to b on the tangent plane."""
    lat_mid = math.radians((a.lat + b.lat) * 0.5)
    dlon = wrap_angle_error(b.lon, a.lon)
    east = math.radians(dlon) * math.cos(lat_mid) * EARTH_RADIUS_M
    north = math.radians(b.lat - a.lat) * EARTH_RADIUS_M
    return east, north


def offset_point(a: GeoPoint, east_m: float, north_m: float) -> GeoPoint:
    """Point displaced from a by the given east/north meters.

    Inverse of tangent_offset: the longitude scale uses the latitude midway
    between the start and end so the two functions round-trip exactly.
    """
    dlat = math.degrees(north_m / EARTH_RADIUS_M)
    lat_mid = math.radians(a.lat + dlat * 0.5)
    dlon = math.degrees(east_m / (EARTH_RADIUS_M * math.cos(lat_mid)))
    return GeoPoint(a.lat + dlat, a.lon + dlon)


def distance_m(a: GeoPoint, b: GeoPoint) -> float:
    """Planar distance in meters between two nearby points."""
    east, north = tangent_offset(a, b)
    return math.hypot(east, north)


def bearing_deg(a: GeoPoint, b: GeoPoint) -> float:
    """Initial compass bearing from a to b, in [0, 360).

    Raises DegenerateSegment when the points coincide to within 1e-9 degrees
    on both axes.
    """
    if abs(b.lat - a.lat) <= 1e-9 and abs(wrap_angle_error(b.lon, a.lon)) <= 1e-9:
        raise DegenerateSegment(f"bearing undefined between coincident points {a} and {b}")
    east, north = tangent_offset(a, b)
    return normalize_heading(math.degrees(math.atan2(east, north)))


def destination(a: GeoPoint, heading_deg: float, dist_m: float) -> GeoPoint:
    """Point reached from a by traveling dist_m along a compass heading."""
    h = math.radians(heading_deg)
    return offset_point(a, dist_m * math.sin(h), dist_m * math.cos(h))
