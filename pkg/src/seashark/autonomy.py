"""Event-based autonomy: sensor-triggered rules and the backseat channel.

Rules watch sensor frames and fire actions such as switching missions or
broadcasting override references; they are edge-triggered with a debounce,
so a condition must hold for N consecutive frames to fire and must go false
before it can fire again.

The backseat channel carries line-delimited JSON messages from a payload
computer or science process.  A message only needs the fields it wants to
steer: heading and/or a depth or altitude reference; anything missing
inherits the mission's current reference.  Backseat depth requests are
clamped to a safety envelope.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from .control import NavReference, RefSource
from .envsim import SensorFrame
from .mission_plan import DepthMode, DepthRef

log = logging.getLogger(__name__)

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}

# frame fields a rule may test; altitude may be None (no return), which
# makes any comparison on it false for that frame
_RULE_FIELDS = ("depth", "altitude", "compass", "object_seen", "sim_time")


class MalformedMessage(ValueError):
    """Backseat message missing required content."""


@dataclass(frozen=True)
class RuleClause:
    field: str
    op: str
    value: float

    def __post_init__(self) -> None:
        if self.field not in _RULE_FIELDS:
            raise ValueError(f"unknown rule field {self.field!r}")
        if self.op not in _OPS:
            raise ValueError(f"unknown comparator {self.op!r}")

    def holds(self, frame: SensorFrame) -> bool:
        raw = getattr(frame, self.field)
        if raw is None:
            return False
        return _OPS[self.op](float(raw), self.value)


@dataclass(frozen=True)
class SwitchMission:
    plan_id: str


@dataclass(frozen=True)
class EndMission:
    pass


@dataclass(frozen=True)
class SetRefs:
    """Override references; unset fields inherit the mission's current ones."""

    heading: Optional[float] = None
    depth_ref: Optional[DepthRef] = None


@dataclass(frozen=True)
class ResumePrevious:
    pass


Action = Union[SwitchMission, EndMission, SetRefs, ResumePrevious]


@dataclass(frozen=True)
class EventRule:
    """All clauses must hold (conjunction) for `debounce` consecutive frames."""

    rule_id: str
    clauses: tuple[RuleClause, ...]
    action: Action
    debounce: int = 1

    def __post_init__(self) -> None:
        if self.debounce < 1:
            raise ValueError("debounce must be >= 1")
        if not self.clauses:
            raise ValueError("rule needs at least one clause")


@dataclass
class RuleState:
    consecutive: int = 0
    latched: bool = False


def evaluate_events(rules: list[EventRule], frame: SensorFrame,
                    rule_state: dict[str, RuleState]) -> list[EventRule]:
    """Return the rules that fire on this frame, in rule-list order.

    A rule fires once when its condition has held for `debounce` consecutive
    frames, then stays latched until the condition breaks.
    """
    fired = []
    for rule in rules:
        st = rule_state.setdefault(rule.rule_id, RuleState())
        if all(clause.holds(frame) for clause in rule.clauses):
            st.consecutive += 1
            if st.consecutive >= rule.debounce and not st.latched:
                st.latched = True
                log.info("rule %s fired at t=%.1f", rule.rule_id, frame.sim_time)
                fired.append(rule)
        else:
            st.consecutive = 0
            st.latched = False
    return fired


@dataclass(frozen=True)
class BackseatMessage:
    session: str
    timestamp: float
    heading: Optional[float] = None
    depth_ref: Optional[DepthRef] = None


def parse_backseat_line(line: str) -> BackseatMessage:
    """Parse one line of the backseat wire format.

    JSON object with `session`, `timestamp`, and at least one of
    `heading_deg`, `depth_m`, `altitude_m` (the last two are exclusive).
    """
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as err:
        raise MalformedMessage(f"not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise MalformedMessage("message must be a JSON object")
    if "session" not in doc or "timestamp" not in doc:
        raise MalformedMessage("message needs session and timestamp")
    has_heading = "heading_deg" in doc
    has_depth = "depth_m" in doc
    has_altitude = "altitude_m" in doc
    if has_depth and has_altitude:
        raise MalformedMessage("depth_m and altitude_m are exclusive")
    if not (has_heading or has_depth or has_altitude):
        raise MalformedMessage("message steers nothing")
    depth_ref = None
    if has_depth:
        depth_ref = DepthRef(DepthMode.DEPTH, float(doc["depth_m"]))
    elif has_altitude:
        depth_ref = DepthRef(DepthMode.ALTITUDE, float(doc["altitude_m"]))
    return BackseatMessage(
        session=str(doc["session"]),
        timestamp=float(doc["timestamp"]),
        heading=float(doc["heading_deg"]) if has_heading else None,
        depth_ref=depth_ref,
    )


def ingest_backseat(msg: BackseatMessage, mission_ref: NavReference, now: float,
                    max_depth: Optional[float] = None) -> NavReference:
    """Turn a backseat message into an override reference.

    Missing fields inherit the mission reference; depth requests beyond the
    safety envelope are clamped (and logged).
    """
    heading = msg.heading if msg.heading is not None else mission_ref.heading
    depth_ref = msg.depth_ref if msg.depth_ref is not None else mission_ref.depth_ref
    if (max_depth is not None and depth_ref.mode is DepthMode.DEPTH
            and depth_ref.value > max_depth):
        log.warning("backseat depth %.1f m clamped to %.1f m envelope",
                    depth_ref.value, max_depth)
        depth_ref = DepthRef(DepthMode.DEPTH, max_depth)
    return NavReference(heading=heading, depth_ref=depth_ref,
                        source=RefSource.BACKSEAT, issued_at=now)
