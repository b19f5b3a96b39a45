"""Kinematic vehicle simulation, bathymetry, and sensor sampling.

The vehicle model is deliberately simple: heading follows the commanded yaw
rate directly, forward speed approaches the commanded speed with a
first-order lag, and depth follows the commanded vertical rate.  Position
integrates speed along heading plus the ambient current.  Sensors are
sampled once per control tick with seeded Gaussian noise so identical seeds
reproduce identical runs bit for bit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geodesy import GeoPoint, distance_m, normalize_heading, offset_point


class InvalidDt(ValueError):
    """Raised for non-positive or absurdly large integration steps."""


class OutOfGrid(LookupError):
    """Raised when a position falls outside the loaded bathymetry grid."""


@dataclass(frozen=True)
class VehicleLimits:
    """Actuation limits and the forward-speed response time constant."""

    max_speed: float = 1.5            # m/s through water
    max_yaw_rate: float = 30.0        # deg/s
    max_vertical_rate: float = 0.3    # m/s, positive down
    speed_tau: float = 2.0            # s, first-order speed lag


@dataclass(frozen=True)
class ActuatorCommand:
    """Saturated actuator setpoints for one control tick."""

    target_speed: float
    yaw_rate: float
    vertical_rate: float

    @classmethod
    def clamped(cls, limits: VehicleLimits, target_speed: float, yaw_rate: float,
                vertical_rate: float) -> "ActuatorCommand":
        return cls(
            target_speed=min(max(target_speed, 0.0), limits.max_speed),
            yaw_rate=min(max(yaw_rate, -limits.max_yaw_rate), limits.max_yaw_rate),
            vertical_rate=min(max(vertical_rate, -limits.max_vertical_rate),
                              limits.max_vertical_rate),
        )


@dataclass(frozen=True)
class VehicleState:
    """True vehicle state. Depth is positive down, zero at the surface."""

    position: GeoPoint
    depth: float
    heading: float
    speed: float
    vertical_rate: float
    sim_time: float


@dataclass(frozen=True)
class SensorFrame:
    """One tick of sensor readings as the vehicle itself would see them.

    altitude is None when the altimeter gets no return (seabed beyond range
    or off the grid); gnss is None whenever the vehicle is submerged.
    """

    sim_time: float
    compass: float
    depth: float
    altitude: Optional[float]
    gnss: Optional[GeoPoint]
    image_ref: Optional[str] = None
    object_seen: bool = False


class BathymetryGrid:
    """Regular lat/lon grid of seabed depths with bilinear interpolation.

    Node (row i, col j) sits at (lat0 + i*dlat, lon0 + j*dlon); depths are
    meters below the surface, positive down.
    """

    def __init__(self, lat0: float, lon0: float, dlat: float, dlon: float,
                 depths: np.ndarray):
        depths = np.asarray(depths, dtype=float)
        if depths.ndim != 2 or depths.shape[0] < 2 or depths.shape[1] < 2:
            raise ValueError("bathymetry grid needs at least 2x2 nodes")
        if dlat <= 0 or dlon <= 0:
            raise ValueError("grid spacing must be positive")
        self.lat0 = lat0
        self.lon0 = lon0
        self.dlat = dlat
        self.dlon = dlon
        self.depths = depths

    @property
    def nrows(self) -> int:
        return self.depths.shape[0]

    @property
    def ncols(self) -> int:
        return self.depths.shape[1]

    def depth_at(self, p: GeoPoint) -> float:
        fi = (p.lat - self.lat0) / self.dlat
        fj = (p.lon - self.lon0) / self.dlon
        if not (0.0 <= fi <= self.nrows - 1 and 0.0 <= fj <= self.ncols - 1):
            raise OutOfGrid(f"{p} outside bathymetry grid")
        i0 = min(int(fi), self.nrows - 2)
        j0 = min(int(fj), self.ncols - 2)
        u = fi - i0
        v = fj - j0
        d = self.depths
        return float(
            d[i0, j0] * (1 - u) * (1 - v)
            + d[i0 + 1, j0] * u * (1 - v)
            + d[i0, j0 + 1] * (1 - u) * v
            + d[i0 + 1, j0 + 1] * u * v
        )

    @classmethod
    def uniform(cls, center: GeoPoint, depth: float, half_extent_deg: float = 0.05,
                nodes: int = 2) -> "BathymetryGrid":
        """Flat seabed covering a square around center."""
        span = 2 * half_extent_deg
        return cls(
            lat0=center.lat - half_extent_deg,
            lon0=center.lon - half_extent_deg,
            dlat=span / (nodes - 1) if nodes > 1 else span,
            dlon=span / (nodes - 1) if nodes > 1 else span,
            depths=np.full((max(nodes, 2), max(nodes, 2)), depth),
        )

    @classmethod
    def from_text(cls, text: str) -> "BathymetryGrid":
        """Parse the on-disk grid format.

        First line: `ncols nrows lat0 lon0 dlat dlon`; remaining whitespace-
        separated values are depths in meters, row-major, nrows*ncols of them.
        """
        tokens = text.split()
        if len(tokens) < 6:
            raise ValueError("bathymetry header truncated")
        ncols, nrows = int(tokens[0]), int(tokens[1])
        lat0, lon0, dlat, dlon = (float(t) for t in tokens[2:6])
        values = [float(t) for t in tokens[6:]]
        if len(values) != nrows * ncols:
            raise ValueError(
                f"expected {nrows * ncols} depth values, got {len(values)}")
        depths = np.array(values, dtype=float).reshape(nrows, ncols)
        return cls(lat0, lon0, dlat, dlon, depths)

    def to_text(self) -> str:
        header = f"{self.ncols} {self.nrows} {self.lat0!r} {self.lon0!r} {self.dlat!r} {self.dlon!r}"
        rows = [" ".join(repr(v) for v in row) for row in self.depths.tolist()]
        return "\n".join([header] + rows) + "\n"


@dataclass(frozen=True)
class UniformCurrent:
    """Constant current field, meters/second east and north."""

    east: float = 0.0
    north: float = 0.0

    def __call__(self, p: GeoPoint) -> tuple[float, float]:
        return self.east, self.north


@dataclass(frozen=True)
class LinearCurrent:
    """Current varying linearly with northward distance from an origin."""

    origin: GeoPoint
    base_east: float = 0.0
    base_north: float = 0.0
    east_per_m_north: float = 0.0
    north_per_m_north: float = 0.0

    def __call__(self, p: GeoPoint) -> tuple[float, float]:
        from .geodesy import tangent_offset

        _, dn = tangent_offset(self.origin, p)
        return (self.base_east + self.east_per_m_north * dn,
                self.base_north + self.north_per_m_north * dn)


@dataclass(frozen=True)
class DetectionRegion:
    """Circular patch in which frames carry an object-seen flag."""

    center: GeoPoint
    radius: float

    def contains(self, p: GeoPoint) -> bool:
        return distance_m(self.center, p) <= self.radius


@dataclass
class Environment:
    """Everything outside the hull: water, seabed, and sensor behavior."""

    bathymetry: Optional[BathymetryGrid] = None
    current: Callable[[GeoPoint], tuple[float, float]] = field(default_factory=UniformCurrent)
    compass_bias: float = 0.0
    compass_noise_sigma: float = 0.0
    depth_noise_sigma: float = 0.0
    altimeter_noise_sigma: float = 0.0
    gnss_noise_sigma: float = 0.0
    surface_threshold: float = 0.3     # m; GNSS available at or above this depth
    altimeter_max_range: float = 50.0  # m; deeper water gives no return
    photo_interval: float = 1.0        # s between image placeholders; <=0 disables
    detection_region: Optional[DetectionRegion] = None


def seabed_depth_at(env: Environment, p: GeoPoint) -> float:
    """Interpolated seabed depth at p; OutOfGrid without coverage."""
    if env.bathymetry is None:
        raise OutOfGrid("no bathymetry loaded")
    return env.bathymetry.depth_at(p)


def step(state: VehicleState, cmd: ActuatorCommand, env: Environment, dt: float,
         limits: VehicleLimits = VehicleLimits()) -> VehicleState:
    """Advance the vehicle one tick.

    Position integrates the post-lag speed along the heading held at the
    start of the tick, plus the current sampled at the start position.
    Depth is clamped to [0, seabed - 0.1 m] where bathymetry exists.
    """
    if not 0.0 < dt <= 1.0:
        raise InvalidDt(f"dt must be in (0, 1] s, got {dt}")

    new_heading = normalize_heading(state.heading + cmd.yaw_rate * dt)
    alpha = 1.0 - math.exp(-dt / limits.speed_tau)
    new_speed = state.speed + (cmd.target_speed - state.speed) * alpha

    cur_east, cur_north = env.current(state.position)
    h = math.radians(state.heading)
    east = (new_speed * math.sin(h) + cur_east) * dt
    north = (new_speed * math.cos(h) + cur_north) * dt
    new_position = offset_point(state.position, east, north)

    new_depth = max(0.0, state.depth + cmd.vertical_rate * dt)
    if env.bathymetry is not None:
        try:
            seabed = env.bathymetry.depth_at(new_position)
        except OutOfGrid:
            seabed = None
        if seabed is not None:
            new_depth = min(new_depth, max(0.0, seabed - 0.1))

    return VehicleState(
        position=new_position,
        depth=new_depth,
        heading=new_heading,
        speed=new_speed,
        vertical_rate=cmd.vertical_rate,
        sim_time=state.sim_time + dt,
    )


def _photo_due(sim_time: float, interval: float) -> bool:
    if interval <= 0:
        return False
    frac = sim_time / interval
    return abs(frac - round(frac)) < 1e-6


def sample_sensors(state: VehicleState, env: Environment, rng_seed: int) -> SensorFrame:
    """Sample one sensor frame. Deterministic for a given (state, env, seed).

    GNSS is present exactly when true depth <= surface_threshold; the
    altimeter returns None beyond its range or off the bathymetry grid.
    """
    rng = random.Random(rng_seed)

    compass = state.heading + env.compass_bias
    if env.compass_noise_sigma > 0:
        compass += rng.gauss(0.0, env.compass_noise_sigma)
    compass = normalize_heading(compass)

    depth = state.depth
    if env.depth_noise_sigma > 0:
        depth += rng.gauss(0.0, env.depth_noise_sigma)
    depth = max(0.0, depth)

    altitude: Optional[float] = None
    if env.bathymetry is not None:
        try:
            true_alt = env.bathymetry.depth_at(state.position) - state.depth
        except OutOfGrid:
            true_alt = None
        if true_alt is not None and 0.0 <= true_alt <= env.altimeter_max_range:
            altitude = true_alt
            if env.altimeter_noise_sigma > 0:
                altitude = max(0.0, altitude + rng.gauss(0.0, env.altimeter_noise_sigma))

    gnss: Optional[GeoPoint] = None
    if state.depth <= env.surface_threshold:
        gnss = state.position
        if env.gnss_noise_sigma > 0:
            gnss = offset_point(gnss, rng.gauss(0.0, env.gnss_noise_sigma),
                                rng.gauss(0.0, env.gnss_noise_sigma))

    image_ref = None
    if _photo_due(state.sim_time, env.photo_interval):
        image_ref = f"img_{round(state.sim_time * 1000):09d}"

    object_seen = bool(env.detection_region is not None
                       and env.detection_region.contains(state.position))

    return SensorFrame(
        sim_time=state.sim_time,
        compass=compass,
        depth=depth,
        altitude=altitude,
        gnss=gnss,
        image_ref=image_ref,
        object_seen=object_seen,
    )
