"""Mission types and planners: single lines, lawnmower sites, circles.

A line is flown on heading and depth/altitude references only; its end
condition is a timeout, so the planner derives the timeout from line length
and an assumed through-water speed.  A site expands to alternating parallel
lines centered on the site point.  A circle is driven open-loop by a
feed-forward yaw rate so it needs no position feedback underwater.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from .envsim import BathymetryGrid, OutOfGrid
from .geodesy import GeoPoint, bearing_deg, destination, normalize_heading, offset_point


class DepthMode(str, Enum):
    DEPTH = "depth"        # hold meters below surface
    ALTITUDE = "altitude"  # hold meters above seabed


class Direction(str, Enum):
    CW = "cw"
    CCW = "ccw"


class InvalidTimeout(ValueError):
    """Line timeout must be positive and finite."""


class InvalidParams(ValueError):
    """Mission parameters out of range."""


class RadiusTooTight(ValueError):
    """Circle demands more yaw rate than the vehicle can turn."""


@dataclass(frozen=True)
class DepthRef:
    """Vertical reference: either a depth below surface or an altitude above seabed."""

    mode: DepthMode
    value: float  # meters, must be > 0 for planned missions


@dataclass(frozen=True)
class LineMission:
    """Straight survey line: hold heading and depth ref until timeout.

    rendezvous is where the vehicle sails on the surface after the line;
    lead_in is a straight surface run-up before diving.
    """

    start: GeoPoint
    heading: float
    timeout: float
    depth_ref: DepthRef
    rendezvous: GeoPoint
    lead_in: float = 0.0
    assumed_speed: float = 1.0


@dataclass(frozen=True)
class SiteMission:
    """Lawnmower coverage of a rectangular site centered on `center`.

    `lines` holds the derived per-line missions in execution order.
    """

    center: GeoPoint
    num_lines: int
    line_length: float
    spacing: float
    orientation: float
    depth_ref: DepthRef
    lines: tuple[LineMission, ...]
    lead_in: float = 10.0
    assumed_speed: float = 1.0


@dataclass(frozen=True)
class CircleMission:
    """Constant-rate turn at fixed speed; optional depth spiral."""

    center: GeoPoint
    radius: float
    speed: float
    depth_ref: DepthRef
    duration: float
    spiral_rate: float = 0.0   # m/s added to the depth reference
    direction: Direction = Direction.CW


MissionPlan = Union[LineMission, SiteMission, CircleMission]


def line_end(line: LineMission) -> GeoPoint:
    """Nominal far end of the line (assumed speed over the timeout)."""
    return destination(line.start, line.heading, line.assumed_speed * line.timeout)


def plan_line(start: GeoPoint, heading: float, timeout: float, depth_ref: DepthRef,
              rendezvous: Optional[GeoPoint] = None, lead_in: float = 0.0,
              assumed_speed: float = 1.0) -> LineMission:
    """Build a single-line mission. Rendezvous defaults to the start point."""
    if not (timeout > 0 and math.isfinite(timeout)):
        raise InvalidTimeout(f"timeout must be positive, got {timeout}")
    if assumed_speed <= 0:
        raise InvalidParams(f"assumed_speed must be positive, got {assumed_speed}")
    if lead_in < 0:
        raise InvalidParams(f"lead_in must be non-negative, got {lead_in}")
    if depth_ref.value <= 0:
        raise InvalidParams(f"depth reference must be positive, got {depth_ref.value}")
    return LineMission(
        start=start,
        heading=normalize_heading(heading),
        timeout=timeout,
        depth_ref=depth_ref,
        rendezvous=rendezvous if rendezvous is not None else start,
        lead_in=lead_in,
        assumed_speed=assumed_speed,
    )


def plan_site(center: GeoPoint, num_lines: int, line_length: float, spacing: float,
              orientation: float, depth_ref: DepthRef, lead_in: float = 10.0,
              assumed_speed: float = 1.0) -> SiteMission:
    """Expand a site into alternating parallel lines.

    Line i runs along `orientation` (reversed on odd lines), offset
    perpendicular so the full pattern is centered on `center`.  Each derived
    line's rendezvous is the next line's start; the last returns to center.
    """
    if num_lines < 1:
        raise InvalidParams(f"num_lines must be >= 1, got {num_lines}")
    if line_length <= 0:
        raise InvalidParams(f"line_length must be positive, got {line_length}")
    if spacing <= 0:
        raise InvalidParams(f"spacing must be positive, got {spacing}")
    if assumed_speed <= 0:
        raise InvalidParams(f"assumed_speed must be positive, got {assumed_speed}")
    if depth_ref.value <= 0:
        raise InvalidParams(f"depth reference must be positive, got {depth_ref.value}")

    orientation = normalize_heading(orientation)
    along = math.radians(orientation)
    across = math.radians(orientation + 90.0)
    ua = (math.sin(along), math.cos(along))      # east/north unit along the lines
    ux = (math.sin(across), math.cos(across))    # east/north unit across the pattern

    half = line_length / 2.0
    starts_ends = []
    for i in range(num_lines):
        d = (i - (num_lines - 1) / 2.0) * spacing
        mid = offset_point(center, ux[0] * d, ux[1] * d)
        a = offset_point(mid, -ua[0] * half, -ua[1] * half)
        b = offset_point(mid, ua[0] * half, ua[1] * half)
        if i % 2 == 0:
            starts_ends.append((a, b))
        else:
            starts_ends.append((b, a))

    timeout = line_length / assumed_speed
    lines = []
    for i, (a, b) in enumerate(starts_ends):
        rendezvous = starts_ends[i + 1][0] if i + 1 < num_lines else center
        lines.append(LineMission(
            start=a,
            heading=bearing_deg(a, b),
            timeout=timeout,
            depth_ref=depth_ref,
            rendezvous=rendezvous,
            lead_in=lead_in,
            assumed_speed=assumed_speed,
        ))

    return SiteMission(
        center=center,
        num_lines=num_lines,
        line_length=line_length,
        spacing=spacing,
        orientation=orientation,
        depth_ref=depth_ref,
        lines=tuple(lines),
        lead_in=lead_in,
        assumed_speed=assumed_speed,
    )


def feedforward_yaw_rate(circle: CircleMission) -> float:
    """Signed open-loop yaw rate in deg/s that traces the circle."""
    rate = math.degrees(circle.speed / circle.radius)
    return rate if circle.direction is Direction.CW else -rate


def plan_circle(center: GeoPoint, radius: float, speed: float, depth_ref: DepthRef,
                duration: float, spiral_rate: float = 0.0,
                direction: Direction = Direction.CW,
                max_yaw_rate: float = 30.0) -> CircleMission:
    """Build a circle mission, rejecting radii the vehicle cannot turn."""
    if radius <= 0:
        raise InvalidParams(f"radius must be positive, got {radius}")
    if speed <= 0:
        raise InvalidParams(f"speed must be positive, got {speed}")
    if duration <= 0:
        raise InvalidParams(f"duration must be positive, got {duration}")
    if depth_ref.value <= 0:
        raise InvalidParams(f"depth reference must be positive, got {depth_ref.value}")
    if math.degrees(speed / radius) > max_yaw_rate:
        raise RadiusTooTight(
            f"radius {radius} m at {speed} m/s needs "
            f"{math.degrees(speed / radius):.1f} deg/s > {max_yaw_rate} deg/s")
    return CircleMission(
        center=center,
        radius=radius,
        speed=speed,
        depth_ref=depth_ref,
        duration=duration,
        spiral_rate=spiral_rate,
        direction=direction,
    )


def _track_sample_points(plan: MissionPlan, step_m: float = 5.0) -> list[GeoPoint]:
    """Points along the planned track, for feasibility checks."""
    pts: list[GeoPoint] = []
    if isinstance(plan, LineMission):
        length = plan.assumed_speed * plan.timeout
        n = max(2, int(length / step_m) + 1)
        lead_start = destination(plan.start, plan.heading, -plan.lead_in)
        pts.append(lead_start)
        for k in range(n + 1):
            pts.append(destination(plan.start, plan.heading, length * k / n))
        pts.append(plan.rendezvous)
    elif isinstance(plan, SiteMission):
        for line in plan.lines:
            pts.extend(_track_sample_points(line, step_m))
    elif isinstance(plan, CircleMission):
        circumference = 2 * math.pi * plan.radius
        n = max(8, int(circumference / step_m))
        for k in range(n):
            ang = 360.0 * k / n
            pts.append(destination(plan.center, ang, plan.radius))
        pts.append(plan.center)
    return pts


def validate(plan: MissionPlan, bathymetry: Optional[BathymetryGrid] = None) -> list[str]:
    """Return a list of human-readable violations; empty means launchable.

    Never raises: parameter problems and seabed conflicts all come back as
    strings so a station or UI can show them inline.
    """
    violations: list[str] = []

    def check_common(depth_ref: DepthRef, assumed_speed: float, lead_in: float):
        if depth_ref.value <= 0:
            violations.append(f"depth reference must be positive, got {depth_ref.value}")
        if assumed_speed <= 0:
            violations.append(f"assumed speed must be positive, got {assumed_speed}")
        if lead_in < 0:
            violations.append(f"lead-in must be non-negative, got {lead_in}")

    if isinstance(plan, LineMission):
        if plan.timeout <= 0:
            violations.append(f"timeout must be positive, got {plan.timeout}")
        check_common(plan.depth_ref, plan.assumed_speed, plan.lead_in)
    elif isinstance(plan, SiteMission):
        if plan.num_lines < 1:
            violations.append(f"number of lines must be >= 1, got {plan.num_lines}")
        if plan.line_length <= 0:
            violations.append(f"line length must be positive, got {plan.line_length}")
        if plan.spacing <= 0:
            violations.append(f"line spacing must be positive, got {plan.spacing}")
        check_common(plan.depth_ref, plan.assumed_speed, plan.lead_in)
    elif isinstance(plan, CircleMission):
        if plan.radius <= 0:
            violations.append(f"radius must be positive, got {plan.radius}")
        if plan.speed <= 0:
            violations.append(f"speed must be positive, got {plan.speed}")
        if plan.duration <= 0:
            violations.append(f"duration must be positive, got {plan.duration}")
        if plan.radius > 0 and plan.speed > 0 and math.degrees(plan.speed / plan.radius) > 30.0:
            violations.append(
                f"circle needs {math.degrees(plan.speed / plan.radius):.1f} deg/s, "
                "beyond the vehicle's yaw rate")
        check_common(plan.depth_ref, plan.speed, 0.0)
    else:
        violations.append(f"unknown plan type {type(plan).__name__}")
        return violations

    if bathymetry is not None and not violations:
        ref = plan.depth_ref
        min_seabed = math.inf
        off_grid = False
        for p in _track_sample_points(plan):
            try:
                min_seabed = min(min_seabed, bathymetry.depth_at(p))
            except OutOfGrid:
                off_grid = True
        if off_grid:
            violations.append("planned track leaves bathymetry coverage")
        if min_seabed is not math.inf:
            if ref.mode is DepthMode.DEPTH and ref.value >= min_seabed:
                violations.append(
                    f"planned depth {ref.value} m reaches the seabed "
                    f"(shallowest point {min_seabed:.1f} m)")
            if ref.mode is DepthMode.ALTITUDE and ref.value >= min_seabed:
                violations.append(
                    f"planned altitude {ref.value} m cannot fit under the surface "
                    f"(shallowest point {min_seabed:.1f} m)")

    return violations


# --- canonical document form -------------------------------------------------
#
# Plans travel between station and UI as JSON with sorted keys; serializing,
# parsing, and re-serializing a document is byte-identical.

def _point_doc(p: GeoPoint) -> dict:
    return {"lat": p.lat, "lon": p.lon}


def _point_from(doc: dict) -> GeoPoint:
    return GeoPoint(float(doc["lat"]), float(doc["lon"]))


def _depth_ref_doc(ref: DepthRef) -> dict:
    return {"mode": ref.mode.value, "value_m": ref.value}


def _depth_ref_from(doc: dict) -> DepthRef:
    return DepthRef(DepthMode(doc["mode"]), float(doc["value_m"]))


def plan_to_document(plan: MissionPlan) -> dict:
    if isinstance(plan, LineMission):
        return {
            "type": "line",
            "start": _point_doc(plan.start),
            "heading_deg": plan.heading,
            "timeout_s": plan.timeout,
            "depth_ref": _depth_ref_doc(plan.depth_ref),
            "rendezvous": _point_doc(plan.rendezvous),
            "lead_in_m": plan.lead_in,
            "assumed_speed_mps": plan.assumed_speed,
        }
    if isinstance(plan, SiteMission):
        return {
            "type": "site",
            "center": _point_doc(plan.center),
            "num_lines": plan.num_lines,
            "line_length_m": plan.line_length,
            "spacing_m": plan.spacing,
            "orientation_deg": plan.orientation,
            "depth_ref": _depth_ref_doc(plan.depth_ref),
            "lead_in_m": plan.lead_in,
            "assumed_speed_mps": plan.assumed_speed,
            "lines": [plan_to_document(line) for line in plan.lines],
        }
    if isinstance(plan, CircleMission):
        return {
            "type": "circle",
            "center": _point_doc(plan.center),
            "radius_m": plan.radius,
            "speed_mps": plan.speed,
            "depth_ref": _depth_ref_doc(plan.depth_ref),
            "duration_s": plan.duration,
            "spiral_rate_mps": plan.spiral_rate,
            "direction": plan.direction.value,
        }
    raise InvalidParams(f"unknown plan type {type(plan).__name__}")


def plan_from_document(doc: dict) -> MissionPlan:
    """Rebuild a plan from its document form.

    Site documents are rebuilt from their parameters; the derived lines are
    recomputed (the derivation is deterministic, so round-trips are stable).
    """
    kind = doc.get("type")
    if kind == "line":
        return plan_line(
            start=_point_from(doc["start"]),
            heading=float(doc["heading_deg"]),
            timeout=float(doc["timeout_s"]),
            depth_ref=_depth_ref_from(doc["depth_ref"]),
            rendezvous=_point_from(doc["rendezvous"]) if "rendezvous" in doc else None,
            lead_in=float(doc.get("lead_in_m", 0.0)),
            assumed_speed=float(doc.get("assumed_speed_mps", 1.0)),
        )
    if kind == "site":
        return plan_site(
            center=_point_from(doc["center"]),
            num_lines=int(doc["num_lines"]),
            line_length=float(doc["line_length_m"]),
            spacing=float(doc["spacing_m"]),
            orientation=float(doc["orientation_deg"]),
            depth_ref=_depth_ref_from(doc["depth_ref"]),
            lead_in=float(doc.get("lead_in_m", 10.0)),
            assumed_speed=float(doc.get("assumed_speed_mps", 1.0)),
        )
    if kind == "circle":
        return plan_circle(
            center=_point_from(doc["center"]),
            radius=float(doc["radius_m"]),
            speed=float(doc["speed_mps"]),
            depth_ref=_depth_ref_from(doc["depth_ref"]),
            duration=float(doc["duration_s"]),
            spiral_rate=float(doc.get("spiral_rate_mps", 0.0)),
            direction=Direction(doc.get("direction", "cw")),
        )
    raise InvalidParams(f"unknown plan document type {kind!r}")


def plan_to_json(plan: MissionPlan) -> str:
    return json.dumps(plan_to_document(plan), sort_keys=True, indent=2) + "\n"


def plan_from_json(text: str) -> MissionPlan:
    return plan_from_document(json.loads(text))
