"""Mission executor: the phase state machine that flies a plan.

Lines are flown on heading and depth references alone and end on a timeout.
After every underwater run the vehicle ascends, reacquires GNSS, and only
then transits on the surface: to the next line of a site, or back to the
agreed rendezvous point.  Every submerged-to-surface transition passes
through Ascend.

The executor consumes one sensor frame per tick and produces the mission's
navigation reference.  When a backseat override is driving the vehicle the
caller passes overridden=True and the executor freezes: no timers advance
and no transitions fire, so a resumed mission continues with its remaining
run time intact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .control import NavReference, RefSource
from .envsim import Environment, SensorFrame, VehicleState
from .geodesy import GeoPoint, bearing_deg, distance_m, normalize_heading
from .mission_plan import (
    CircleMission,
    DepthMode,
    DepthRef,
    LineMission,
    MissionPlan,
    SiteMission,
    feedforward_yaw_rate,
    validate,
)

log = logging.getLogger(__name__)

# vertical reference used for all surface phases; mission depth refs are
# validated strictly positive, zero is reserved for "go to the surface"
SURFACE_REF = DepthRef(DepthMode.DEPTH, 0.0)


class ExecPhase(str, Enum):
    IDLE = "Idle"
    LEAD_IN = "LeadIn"
    DIVE = "Dive"
    RUN_LINE = "RunLine"
    RUN_CIRCLE = "RunCircle"
    ASCEND = "Ascend"
    RETURN_TRANSIT = "ReturnTransit"
    TRANSIT_TO_NEXT_LINE = "TransitToNextLine"
    LOITER = "Loiter"
    COMPLETE = "Complete"
    ABORTED = "Aborted"


SUBMERGED_PHASES = frozenset({ExecPhase.DIVE, ExecPhase.RUN_LINE,
                              ExecPhase.RUN_CIRCLE, ExecPhase.ASCEND})
TERMINAL_PHASES = frozenset({ExecPhase.COMPLETE, ExecPhase.ABORTED})


class InvalidPlan(ValueError):
    """Plan failed validation at start."""


class NotAtSurface(RuntimeError):
    """Operation requires the vehicle on the surface."""


@dataclass(frozen=True)
class ExecutorConfig:
    arrival_radius: float = 5.0       # m, surface transit arrival
    loiter_radius: float = 10.0       # m, allowed drift before re-approach
    loiter_inner_radius: float = 2.0  # m, stop driving once back this close
    depth_band: float = 0.3           # m, capture band around the vertical ref
    capture_ticks: int = 3            # consecutive in-band ticks to capture
    giveup_factor: float = 2.0        # x expected transit time before loitering
    min_transit_expected: float = 10.0  # s, floor for the give-up budget


@dataclass
class ExecState:
    """Mutable executor state; one instance per launched mission."""

    plan: MissionPlan
    phase: ExecPhase
    line_index: int = 0
    phase_entry_time: float = 0.0
    phase_elapsed: float = 0.0
    ref_heading: float = 0.0
    ref_depth: DepthRef = SURFACE_REF
    speed_command: float = 0.0
    start_fix: Optional[GeoPoint] = None
    transit_target: Optional[GeoPoint] = None
    transit_expected: float = 0.0
    capture_count: int = 0
    abort_requested: bool = False
    end_requested: bool = False
    giveup_flagged: bool = False
    loiter_anchor: Optional[GeoPoint] = None
    loiter_moving: bool = False


def active_line(exec_state: ExecState) -> Optional[LineMission]:
    plan = exec_state.plan
    if isinstance(plan, LineMission):
        return plan
    if isinstance(plan, SiteMission):
        return plan.lines[exec_state.line_index]
    return None


def mission_speed(exec_state: ExecState) -> float:
    plan = exec_state.plan
    if isinstance(plan, CircleMission):
        return plan.speed
    line = active_line(exec_state)
    return line.assumed_speed if line is not None else 1.0


def mission_rendezvous(plan: MissionPlan) -> GeoPoint:
    if isinstance(plan, LineMission):
        return plan.rendezvous
    if isinstance(plan, SiteMission):
        return plan.lines[-1].rendezvous
    return plan.center


def start(plan: MissionPlan, state: VehicleState, env: Environment,
          cfg: ExecutorConfig = ExecutorConfig(), now: float = 0.0) -> ExecState:
    """Begin a mission. The vehicle must be on the surface with a valid plan."""
    violations = validate(plan, bathymetry=env.bathymetry)
    if violations:
        raise InvalidPlan("; ".join(violations))
    if state.depth > env.surface_threshold:
        raise NotAtSurface(f"cannot launch at {state.depth:.2f} m depth")

    ex = ExecState(plan=plan, phase=ExecPhase.IDLE, phase_entry_time=now,
                   start_fix=state.position)
    if isinstance(plan, CircleMission):
        ex.ref_heading = state.heading
        ex.ref_depth = plan.depth_ref
        ex.speed_command = plan.speed
        _enter(ex, ExecPhase.DIVE, now)
    else:
        line = active_line(ex)
        ex.ref_heading = line.heading
        ex.speed_command = line.assumed_speed
        if line.lead_in > 0:
            ex.ref_depth = SURFACE_REF
            _enter(ex, ExecPhase.LEAD_IN, now)
        else:
            ex.ref_depth = line.depth_ref
            _enter(ex, ExecPhase.DIVE, now)
    return ex


def _enter(ex: ExecState, phase: ExecPhase, now: float) -> None:
    log.info("phase %s -> %s at t=%.1f", ex.phase.value, phase.value, now)
    ex.phase = phase
    ex.phase_entry_time = now
    ex.phase_elapsed = 0.0
    ex.capture_count = 0


def _current_ref(ex: ExecState, now: float) -> NavReference:
    return NavReference(heading=ex.ref_heading, depth_ref=ex.ref_depth,
                        source=RefSource.MISSION, issued_at=now)


def _begin_surface_leg(ex: ExecState, frame: SensorFrame, now: float,
                       cfg: ExecutorConfig, phase: ExecPhase, target: GeoPoint) -> None:
    ex.transit_target = target
    here = frame.gnss if frame.gnss is not None else None
    dist = distance_m(here, target) if here is not None else 0.0
    ex.transit_expected = max(dist / mission_speed(ex), cfg.min_transit_expected)
    if here is not None and dist > cfg.arrival_radius / 2:
        ex.ref_heading = bearing_deg(here, target)
    ex.ref_depth = SURFACE_REF
    ex.speed_command = mission_speed(ex)
    _enter(ex, phase, now)


def _enter_loiter(ex: ExecState, anchor: GeoPoint, now: float) -> None:
    ex.loiter_anchor = anchor
    ex.loiter_moving = False
    ex.speed_command = 0.0
    ex.ref_depth = SURFACE_REF
    _enter(ex, ExecPhase.LOITER, now)


def _after_ascend(ex: ExecState, frame: SensorFrame, now: float,
                  cfg: ExecutorConfig) -> None:
    """Pick the surface leg once the vehicle has reacquired GNSS."""
    if ex.abort_requested:
        ex.speed_command = 0.0
        _enter(ex, ExecPhase.ABORTED, now)
        return
    plan = ex.plan
    if (isinstance(plan, SiteMission) and not ex.end_requested
            and ex.line_index + 1 < plan.num_lines):
        # current line's rendezvous is the next line's start
        target = plan.lines[ex.line_index].rendezvous
        _begin_surface_leg(ex, frame, now, cfg, ExecPhase.TRANSIT_TO_NEXT_LINE, target)
    else:
        _begin_surface_leg(ex, frame, now, cfg, ExecPhase.RETURN_TRANSIT,
                           mission_rendezvous(plan))


def _capture_measured(ex: ExecState, frame: SensorFrame) -> Optional[float]:
    if ex.ref_depth.mode is DepthMode.DEPTH:
        return frame.depth
    return frame.altitude


def tick(ex: ExecState, frame: SensorFrame, now: float, dt: float,
         cfg: ExecutorConfig = ExecutorConfig(), *,
         overridden: bool = False) -> tuple[ExecState, NavReference]:
    """Advance the state machine one tick and return the mission reference.

    With overridden=True (a fresh backseat reference is steering) the
    machine freezes in place; only an abort still acts.
    """
    surfaced = frame.gnss is not None

    # abort wins over everything, including overrides
    if ex.abort_requested and ex.phase not in TERMINAL_PHASES:
        if ex.phase in SUBMERGED_PHASES:
            if ex.phase is not ExecPhase.ASCEND:
                ex.ref_depth = SURFACE_REF
                _enter(ex, ExecPhase.ASCEND, now)
        else:
            ex.speed_command = 0.0
            _enter(ex, ExecPhase.ABORTED, now)

    if overridden and ex.phase not in TERMINAL_PHASES:
        return ex, _current_ref(ex, now)

    if ex.phase in TERMINAL_PHASES or ex.phase is ExecPhase.IDLE:
        ex.speed_command = 0.0
        return ex, _current_ref(ex, now)

    ex.phase_elapsed += dt
    plan = ex.plan

    if ex.phase is ExecPhase.LEAD_IN:
        line = active_line(ex)
        if ex.end_requested:
            _begin_surface_leg(ex, frame, now, cfg, ExecPhase.RETURN_TRANSIT,
                               mission_rendezvous(plan))
        elif ex.phase_elapsed + 1e-6 >= line.lead_in / line.assumed_speed:
            ex.ref_depth = line.depth_ref
            _enter(ex, ExecPhase.DIVE, now)

    elif ex.phase is ExecPhase.DIVE:
        if ex.end_requested:
            ex.ref_depth = SURFACE_REF
            _enter(ex, ExecPhase.ASCEND, now)
        else:
            measured = _capture_measured(ex, frame)
            if measured is not None and abs(measured - ex.ref_depth.value) <= cfg.depth_band:
                ex.capture_count += 1
            else:
                ex.capture_count = 0
            if ex.capture_count >= cfg.capture_ticks:
                run = (ExecPhase.RUN_CIRCLE if isinstance(plan, CircleMission)
                       else ExecPhase.RUN_LINE)
                _enter(ex, run, now)

    elif ex.phase is ExecPhase.RUN_LINE:
        line = active_line(ex)
        if ex.end_requested or ex.phase_elapsed + 1e-6 >= line.timeout:
            ex.ref_depth = SURFACE_REF
            _enter(ex, ExecPhase.ASCEND, now)

    elif ex.phase is ExecPhase.RUN_CIRCLE:
        ex.ref_heading = normalize_heading(
            ex.ref_heading + feedforward_yaw_rate(plan) * dt)
        if plan.spiral_rate != 0.0:
            value = plan.depth_ref.value + plan.spiral_rate * ex.phase_elapsed
            ex.ref_depth = DepthRef(plan.depth_ref.mode, max(value, 0.2))
        if ex.end_requested or ex.phase_elapsed + 1e-6 >= plan.duration:
            ex.ref_depth = SURFACE_REF
            _enter(ex, ExecPhase.ASCEND, now)

    elif ex.phase is ExecPhase.ASCEND:
        ex.ref_depth = SURFACE_REF
        if surfaced:
            _after_ascend(ex, frame, now, cfg)

    elif ex.phase in (ExecPhase.RETURN_TRANSIT, ExecPhase.TRANSIT_TO_NEXT_LINE):
        target = ex.transit_target
        if surfaced:
            dist = distance_m(frame.gnss, target)
            if dist <= cfg.arrival_radius:
                if ex.phase is ExecPhase.RETURN_TRANSIT:
                    ex.speed_command = 0.0
                    _enter(ex, ExecPhase.COMPLETE, now)
                else:
                    ex.line_index += 1
                    line = active_line(ex)
                    ex.ref_heading = line.heading
                    ex.speed_command = line.assumed_speed
                    if line.lead_in > 0:
                        ex.ref_depth = SURFACE_REF
                        _enter(ex, ExecPhase.LEAD_IN, now)
                    else:
                        ex.ref_depth = line.depth_ref
                        _enter(ex, ExecPhase.DIVE, now)
                return ex, _current_ref(ex, now)
            if dist > cfg.arrival_radius / 2:
                ex.ref_heading = bearing_deg(frame.gnss, target)
        if ex.phase_elapsed > cfg.giveup_factor * ex.transit_expected:
            ex.giveup_flagged = True
            anchor = frame.gnss if frame.gnss is not None else target
            log.warning("transit gave up after %.0f s; loitering", ex.phase_elapsed)
            _enter_loiter(ex, anchor, now)

    elif ex.phase is ExecPhase.LOITER:
        if surfaced:
            dist = distance_m(frame.gnss, ex.loiter_anchor)
            if ex.loiter_moving:
                if dist <= cfg.loiter_inner_radius:
                    ex.loiter_moving = False
                    ex.speed_command = 0.0
                elif dist > cfg.arrival_radius / 2:
                    ex.ref_heading = bearing_deg(frame.gnss, ex.loiter_anchor)
            elif dist > cfg.loiter_radius:
                ex.loiter_moving = True
                ex.speed_command = mission_speed(ex)
                ex.ref_heading = bearing_deg(frame.gnss, ex.loiter_anchor)

    return ex, _current_ref(ex, now)


def command_abort(ex: ExecState) -> ExecState:
    """Request an abort: ascend if submerged, then Aborted."""
    ex.abort_requested = True
    return ex


def command_end(ex: ExecState) -> ExecState:
    """End the mission early but normally: ascend, return, Complete."""
    ex.end_requested = True
    return ex


def command_loiter(ex: ExecState, frame: SensorFrame,
                   cfg: ExecutorConfig = ExecutorConfig()) -> ExecState:
    """Hold position at the current GNSS fix. Surface only."""
    if frame.gnss is None:
        raise NotAtSurface("loiter requires a surface GNSS fix")
    _enter_loiter(ex, frame.gnss, frame.sim_time)
    return ex
