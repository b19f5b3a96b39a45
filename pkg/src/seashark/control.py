"""Heading and vertical PID controllers plus reference arbitration.

Both controllers are plain PIDs with clamped integrators.  The heading loop
works on the shortest signed angular error so reference 10 deg from a
measured 350 deg turns 20 degrees clockwise, not 340 the other way.  The
vertical loop accepts either a depth or an altitude reference; on altimeter
dropout it falls back to holding the depth it last saw.

Arbitration decides per tick whether the mission's reference or a backseat
override drives the vehicle: the backseat wins only while its reference is
fresh.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .envsim import SensorFrame
from .geodesy import wrap_angle_error
from .mission_plan import DepthMode, DepthRef

log = logging.getLogger(__name__)


class RefSource(str, Enum):
    MISSION = "mission"
    BACKSEAT = "backseat"


@dataclass(frozen=True)
class NavReference:
    """Navigation reference broadcast to the control loops."""

    heading: float
    depth_ref: DepthRef
    source: RefSource
    issued_at: float


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float
    integrator_limit: float


@dataclass(frozen=True)
class ControllerGains:
    heading: PidGains = PidGains(kp=1.2, ki=0.02, kd=0.3, integrator_limit=50.0)
    vertical: PidGains = PidGains(kp=0.5, ki=0.01, kd=0.1, integrator_limit=5.0)


@dataclass
class PidState:
    integral: float = 0.0
    prev_error: Optional[float] = None


@dataclass
class VerticalState(PidState):
    hold_depth: Optional[float] = None   # engaged on altimeter dropout
    fallback_warned: bool = False


def _pid(error: float, gains: PidGains, dt: float, state: PidState,
         output_limit: float, wrap_derivative: bool) -> float:
    if state.prev_error is None:
        derivative = 0.0
    else:
        delta = error - state.prev_error
        if wrap_derivative:
            delta = wrap_angle_error(error, state.prev_error)
        derivative = delta / dt
    state.prev_error = error

    state.integral += error * dt
    state.integral = min(max(state.integral, -gains.integrator_limit),
                         gains.integrator_limit)

    out = gains.kp * error + gains.ki * state.integral + gains.kd * derivative
    return min(max(out, -output_limit), output_limit)


def heading_control(ref_heading: float, measured_heading: float, gains: PidGains,
                    dt: float, state: PidState, max_yaw_rate: float = 30.0) -> float:
    """Yaw-rate command in deg/s toward the reference heading."""
    error = wrap_angle_error(ref_heading, measured_heading)
    return _pid(error, gains, dt, state, max_yaw_rate, wrap_derivative=True)


def vertical_control(ref: DepthRef, frame: SensorFrame, gains: PidGains, dt: float,
                     state: VerticalState, max_vertical_rate: float = 0.3) -> float:
    """Vertical-rate command in m/s (positive down) toward the reference.

    Altitude mode dives when the vehicle sits higher above the seabed than
    referenced.  Without an altimeter return the controller holds the depth
    at which the return was lost (warned once per dropout).
    """
    if ref.mode is DepthMode.DEPTH:
        state.hold_depth = None
        state.fallback_warned = False
        error = ref.value - frame.depth
    elif frame.altitude is not None:
        state.hold_depth = None
        state.fallback_warned = False
        error = frame.altitude - ref.value
    else:
        if state.hold_depth is None:
            state.hold_depth = frame.depth
        if not state.fallback_warned:
            log.warning("altimeter lost at %.1f s; holding depth %.2f m",
                        frame.sim_time, state.hold_depth)
            state.fallback_warned = True
        error = state.hold_depth - frame.depth
    return _pid(error, gains, dt, state, max_vertical_rate, wrap_derivative=False)


def arbitrate(mission_ref: NavReference, backseat_ref: Optional[NavReference],
              now: float, stale_timeout: float = 5.0) -> NavReference:
    """Pick the reference to apply this tick.

    A backseat reference wins while fresh (now - issued_at <= stale_timeout);
    otherwise the mission reference applies.  Deterministic and pure.
    """
    if backseat_ref is not None and now - backseat_ref.issued_at <= stale_timeout:
        return backseat_ref
    return mission_ref
