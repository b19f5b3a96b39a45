"""Closed-loop mission harness: one object that flies the simulated vehicle.

Each tick samples sensors, evaluates autonomy rules, advances the mission
state machine, arbitrates mission-versus-backseat references, runs the PID
loops, updates the navigation estimate, appends a log record, and steps the
vehicle.  The station service drives this at a paced rate; tests and the
headless CLI drive it as fast as they like.

Determinism: sensor noise seeds derive from a master seed and the tick
index, so identical configurations replay identical runs bit for bit.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import autonomy, executor, mission_log
from .autonomy import (
    Action,
    BackseatMessage,
    EndMission,
    EventRule,
    ResumePrevious,
    RuleState,
    SetRefs,
    SwitchMission,
)
from .control import (
    ControllerGains,
    NavReference,
    PidState,
    RefSource,
    VerticalState,
    arbitrate,
    heading_control,
    vertical_control,
)
from .envsim import (
    ActuatorCommand,
    Environment,
    SensorFrame,
    VehicleLimits,
    VehicleState,
    sample_sensors,
    step,
)
from .executor import ExecPhase, ExecState, ExecutorConfig, SURFACE_REF
from .mission_log import LogRecord, MissionLog
from .mission_plan import MissionPlan, plan_to_document
from .navigation import DeadReckoner, EstimateSource, NavEstimate

log = logging.getLogger(__name__)


class InvalidState(RuntimeError):
    """Command does not apply in the vehicle's current state."""


@dataclass(frozen=True)
class RunnerConfig:
    dt: float = 0.1
    seed: int = 0
    stale_timeout: float = 5.0    # s before a backseat reference goes stale
    max_depth: float = 30.0       # safety envelope for backseat depth requests
    field_mode: bool = False      # drop true state from log records
    limits: VehicleLimits = VehicleLimits()
    gains: ControllerGains = ControllerGains()
    executor: ExecutorConfig = ExecutorConfig()


@dataclass
class MissionContext:
    """Everything owned by one launched mission."""

    mission_id: str
    exec_state: ExecState
    log: MissionLog
    reckoner: DeadReckoner
    active: bool = True


class MissionRunner:
    def __init__(self, env: Environment, initial_state: VehicleState,
                 cfg: RunnerConfig = RunnerConfig(),
                 rules: Optional[list[EventRule]] = None,
                 plans: Optional[dict[str, MissionPlan]] = None):
        self.env = env
        self.state = initial_state
        self.cfg = cfg
        self.rules = list(rules or [])
        self.rule_state: dict[str, RuleState] = {}
        self.plans = dict(plans or {})

        self.mission: Optional[MissionContext] = None
        self.completed: list[MissionContext] = []
        self._mission_counter = 0

        self.heading_pid = PidState()
        self.vertical_pid = VerticalState()
        self.backseat_ref: Optional[NavReference] = None
        self.override_ref: Optional[NavReference] = None  # rule-driven SetRefs
        self._resume_stack: list[ExecState] = []
        self._hold_heading = initial_state.heading
        self._tick_index = 0
        self.last_frame: Optional[SensorFrame] = None
        self.last_applied: Optional[NavReference] = None

    # -- commands (applied between ticks) ------------------------------------

    def launch(self, plan: MissionPlan, mission_id: Optional[str] = None) -> MissionContext:
        """Start a mission. The vehicle must be idle or done with the last one."""
        if self.mission is not None and self.mission.active \
                and self.mission.exec_state.phase not in executor.TERMINAL_PHASES \
                and self.mission.exec_state.phase is not ExecPhase.LOITER:
            raise InvalidState(
                f"mission {self.mission.mission_id} still running "
                f"({self.mission.exec_state.phase.value})")
        ex = executor.start(plan, self.state, self.env, self.cfg.executor,
                            now=self.state.sim_time)
        self._mission_counter += 1
        mid = mission_id or f"m{self._mission_counter:04d}"
        if self.mission is not None:
            self._retire_mission()
        ctx = MissionContext(
            mission_id=mid,
            exec_state=ex,
            log=MissionLog(plan_doc=plan_to_document(plan)),
            reckoner=DeadReckoner(),
        )
        self.mission = ctx
        self.heading_pid = PidState()
        self.vertical_pid = VerticalState()
        self.backseat_ref = None
        self.override_ref = None
        self._resume_stack.clear()
        return ctx

    def abort(self) -> None:
        ctx = self._require_live_mission()
        executor.command_abort(ctx.exec_state)

    def loiter_here(self) -> None:
        """Hold the current surface position (post-mission station keeping)."""
        ctx = self.mission
        if ctx is None:
            raise InvalidState("no mission context to loiter in")
        if ctx.exec_state.phase is ExecPhase.ABORTED:
            raise InvalidState("vehicle aborted; launch a new mission instead")
        frame = sample_sensors(self.state, self.env, self._seed())
        executor.command_loiter(ctx.exec_state, frame, self.cfg.executor)

    def receive_backseat(self, msg: BackseatMessage) -> None:
        ctx = self._require_live_mission()
        mission_ref = NavReference(
            heading=ctx.exec_state.ref_heading,
            depth_ref=ctx.exec_state.ref_depth,
            source=RefSource.MISSION,
            issued_at=self.state.sim_time,
        )
        self.backseat_ref = autonomy.ingest_backseat(
            msg, mission_ref, self.state.sim_time, max_depth=self.cfg.max_depth)

    def apply_action(self, action: Action) -> None:
        """Apply an autonomy action (also used directly by scenario harnesses)."""
        now = self.state.sim_time
        if isinstance(action, SetRefs):
            ctx = self._require_live_mission()
            ex = ctx.exec_state
            self.override_ref = NavReference(
                heading=action.heading if action.heading is not None else ex.ref_heading,
                depth_ref=action.depth_ref if action.depth_ref is not None else ex.ref_depth,
                source=RefSource.BACKSEAT,
                issued_at=now,
            )
        elif isinstance(action, ResumePrevious):
            self.override_ref = None
            self.backseat_ref = None
            if self._resume_stack and self.mission is not None:
                self.mission.exec_state = self._resume_stack.pop()
        elif isinstance(action, EndMission):
            ctx = self._require_live_mission()
            executor.command_end(ctx.exec_state)
        elif isinstance(action, SwitchMission):
            self._switch_mission(action.plan_id)
        else:
            raise ValueError(f"unknown action {action!r}")

    def _switch_mission(self, plan_id: str) -> None:
        if plan_id not in self.plans:
            raise InvalidState(f"unknown plan id {plan_id!r}")
        ctx = self._require_live_mission()
        plan = self.plans[plan_id]
        self._resume_stack.append(copy.deepcopy(ctx.exec_state))
        if self.state.depth <= self.env.surface_threshold:
            ctx.exec_state = executor.start(plan, self.state, self.env,
                                            self.cfg.executor, now=self.state.sim_time)
        else:
            # switching underwater: enter the new plan's dive directly
            ex = ExecState(plan=plan, phase=ExecPhase.IDLE,
                           start_fix=self.state.position)
            ex.ref_heading = self.state.heading
            ex.ref_depth = plan.depth_ref if hasattr(plan, "depth_ref") else SURFACE_REF
            ex.speed_command = executor.mission_speed(ex)
            executor._enter(ex, ExecPhase.DIVE, self.state.sim_time)
            ctx.exec_state = ex

    # -- the loop -------------------------------------------------------------

    def tick(self) -> Optional[LogRecord]:
        """Run one control tick; returns the log record if a mission is active."""
        now = self.state.sim_time
        dt = self.cfg.dt
        frame = sample_sensors(self.state, self.env, self._seed())
        self.last_frame = frame

        for rule in autonomy.evaluate_events(self.rules, frame, self.rule_state):
            try:
                self.apply_action(rule.action)
            except InvalidState as err:
                # e.g. fired with no live mission; rules must not kill the loop
                log.warning("rule %s action skipped: %s", rule.rule_id, err)

        # the executor keeps steering after its log closes (post-mission loiter)
        ctx = self.mission

        override = self._active_override(now)
        overridden = override is not None and ctx is not None and ctx.active

        if ctx is not None:
            _, mission_ref = executor.tick(ctx.exec_state, frame, now, dt,
                                           self.cfg.executor, overridden=overridden)
        else:
            mission_ref = NavReference(self._hold_heading, SURFACE_REF,
                                       RefSource.MISSION, now)

        applied = override if overridden else mission_ref
        self.last_applied = applied

        yaw = heading_control(applied.heading, frame.compass, self.cfg.gains.heading,
                              dt, self.heading_pid, self.cfg.limits.max_yaw_rate)
        vr = vertical_control(applied.depth_ref, frame, self.cfg.gains.vertical,
                              dt, self.vertical_pid, self.cfg.limits.max_vertical_rate)
        speed = ctx.exec_state.speed_command if ctx is not None else 0.0
        cmd = ActuatorCommand.clamped(self.cfg.limits, speed, yaw, vr)

        record = None
        if ctx is not None and ctx.active:
            est = ctx.reckoner.update(frame, speed, dt)
            if est.source is EstimateSource.GNSS_FIX and not ctx.log.fixes:
                mission_log.add_fix(ctx.log, est)
            record = LogRecord(
                sim_time=now,
                phase=ctx.exec_state.phase,
                state=None if self.cfg.field_mode else self.state,
                frame=frame,
                ref=applied,
                estimate=est,
            )
            mission_log.append(ctx.log, record)
            if ctx.exec_state.phase in executor.TERMINAL_PHASES:
                self._retire_mission()

        self.state = step(self.state, cmd, self.env, dt, self.cfg.limits)
        self._tick_index += 1
        return record

    def run_ticks(self, n: int) -> list[LogRecord]:
        records = []
        for _ in range(n):
            rec = self.tick()
            if rec is not None:
                records.append(rec)
        return records

    def run_until(self, stop: Callable[["MissionRunner"], bool],
                  max_ticks: int = 200_000) -> list[LogRecord]:
        """Tick until `stop(self)` holds; raises if it never does."""
        records = []
        for _ in range(max_ticks):
            rec = self.tick()
            if rec is not None:
                records.append(rec)
            if stop(self):
                return records
        raise TimeoutError(f"condition not reached within {max_ticks} ticks")

    def run_mission(self, max_ticks: int = 200_000) -> MissionContext:
        """Tick until the active mission reaches Complete or Aborted."""
        ctx = self._require_live_mission()
        self.run_until(lambda r: not ctx.active, max_ticks)
        return ctx

    # -- helpers ---------------------------------------------------------------

    def phase(self) -> ExecPhase:
        if self.mission is None:
            return ExecPhase.IDLE
        return self.mission.exec_state.phase

    def _active_override(self, now: float) -> Optional[NavReference]:
        if self.override_ref is not None:
            # rule-driven overrides stay active until explicitly resumed
            return replace(self.override_ref, issued_at=now)
        if self.backseat_ref is not None and \
                now - self.backseat_ref.issued_at <= self.cfg.stale_timeout:
            return self.backseat_ref
        return None

    def _require_live_mission(self) -> MissionContext:
        if self.mission is None or not self.mission.active \
                or self.mission.exec_state.phase in executor.TERMINAL_PHASES:
            raise InvalidState("no active mission")
        return self.mission

    def _retire_mission(self) -> None:
        """Close out the active mission's log and reconstruction."""
        ctx = self.mission
        if ctx is None or not ctx.active:
            return
        for seg in ctx.reckoner.closed_segments():
            mission_log.add_segment(ctx.log, seg)
        open_seg = ctx.reckoner.open_segment()
        if open_seg is not None:
            log.warning("mission %s log ends submerged; flagging gap", ctx.mission_id)
            mission_log.add_segment(ctx.log, open_seg)
        mission_log.finalize(ctx.log)
        ctx.active = False
        self.completed.append(ctx)
        self._hold_heading = self.state.heading

    def _seed(self) -> int:
        return (self.cfg.seed * 1_000_003 + self._tick_index) & 0x7FFFFFFF
