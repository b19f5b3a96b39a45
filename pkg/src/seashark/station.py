"""Control-station core: one simulated vehicle, a command queue, telemetry.

The station owns the closed-loop runner and drives it either manually
(tests call step()) or from a paced background thread at dt / time_scale
wall seconds per tick.  Commands arrive concurrently, are applied strictly
in arrival order at tick boundaries, and each gets exactly one
acknowledgment carrying its request id.

Telemetry fans out through keep-latest(1) buffers per subscriber, so a slow
reader drops to the freshest frame and can never stall the control loop.
While the vehicle is submerged only a heartbeat (time and connection state)
is published, mirroring a real surface-only radio link; the
`omniscient_link` setting disables that gating for debugging.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Optional

from .autonomy import MalformedMessage, parse_backseat_line
from .config import AppConfig, StationSettings
from .executor import ExecPhase, InvalidPlan, NotAtSurface
from .mission_log import (
    LogWriter,
    ReconstructionMissing,
    _est_doc,
    _frame_doc,
    _ref_doc,
    export,
    quickview_at,
    record_doc,
    to_text,
)
from .mission_plan import plan_from_document, plan_to_document, validate
from .runner import InvalidState, MissionContext, MissionRunner


class StationError(Exception):
    """Command or query failure with a machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def doc(self) -> dict:
        return {"code": self.code, "message": self.message}


@dataclass(frozen=True)
class StationCommand:
    kind: str          # create_plan | validate | launch | abort | loiter |
    payload: dict      # backseat | set_config
    request_id: str


QUEUED_KINDS = frozenset({"launch", "abort", "loiter", "backseat", "set_config"})
SYNC_KINDS = frozenset({"create_plan", "validate"})


@dataclass
class _Pending:
    command: StationCommand
    done: threading.Event = field(default_factory=threading.Event)
    ack: Optional[dict] = None


class Subscription:
    """Keep-latest(1) telemetry buffer; get() blocks for the next frame."""

    def __init__(self, hub: "TelemetryHub"):
        self._hub = hub
        self._cond = threading.Condition()
        self._slot: Optional[dict] = None
        self._closed = False
        self.dropped = 0

    def push(self, doc: dict) -> None:
        with self._cond:
            if self._closed:
                return
            if self._slot is not None:
                self.dropped += 1
            self._slot = doc
            self._cond.notify()

    def get(self, timeout: Optional[float] = None) -> Optional[dict]:
        """Next unseen frame, or None on timeout / closed subscription."""
        with self._cond:
            if self._slot is None and not self._closed:
                self._cond.wait(timeout)
            doc, self._slot = self._slot, None
            return doc

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()
        self._hub.unsubscribe(self)

    @property
    def closed(self) -> bool:
        return self._closed


class TelemetryHub:
    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []

    def subscribe(self) -> Subscription:
        sub = Subscription(self)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, doc: dict) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            sub.push(doc)

    @property
    def subscriber_count(self) -> int:
        with self._lock:
            return len(self._subs)


class Station:
    def __init__(self, cfg: AppConfig, log_dir: Optional[Path] = None):
        self.cfg = cfg
        self.settings: StationSettings = cfg.station
        self.runner = MissionRunner(cfg.env, cfg.start, cfg.runner,
                                    rules=cfg.rules, plans=dict(cfg.plans))
        self.plans: dict[str, Any] = dict(cfg.plans)
        self.missions: dict[str, MissionContext] = {}
        self.hub = TelemetryHub()
        self.log_dir = Path(log_dir) if log_dir is not None else None

        self._lock = threading.RLock()
        self._queue: "queue.Queue[_Pending]" = queue.Queue()
        self._seq = 0
        self._plan_counter = 0
        self._writer: Optional[LogWriter] = None
        self._writer_ctx: Optional[MissionContext] = None
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._tick_walltimes: deque[float] = deque(maxlen=100_000)
        self.last_telemetry: Optional[dict] = None

    # -- lifecycle -------------------------------------------------------------

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(self) -> None:
        """Run the paced loop in a background thread."""
        if self.running:
            raise InvalidState("station loop already running")
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, name="station-loop",
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None
        if self._writer is not None and self._writer_ctx is not None:
            self._writer.close(self._writer_ctx.log)
            self._writer = None

    def _loop(self) -> None:
        period = self.cfg.runner.dt / self.settings.time_scale
        deadline = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            if now < deadline:
                self._stop.wait(deadline - now)
                if self._stop.is_set():
                    break
            self._tick_walltimes.append(time.monotonic())
            self.step()
            new_period = self.cfg.runner.dt / self.settings.time_scale
            if new_period != period:
                period = new_period
                self._tick_walltimes.clear()
                deadline = time.monotonic() + period
                continue
            deadline += period
            if time.monotonic() - deadline > 10 * period:
                # fell far behind (host stall): resynchronize instead of rushing
                deadline = time.monotonic() + period

    def tick_intervals(self) -> list[float]:
        """Wall-clock gaps between paced ticks (jitter instrumentation)."""
        stamps = list(self._tick_walltimes)
        return [b - a for a, b in zip(stamps, stamps[1:])]

    # -- command front-end -------------------------------------------------------

    def submit(self, kind: str, payload: Optional[dict] = None,
               request_id: Optional[str] = None,
               timeout: float = 30.0) -> dict:
        """Submit one command; returns its single acknowledgment document.

        Plan creation/validation run synchronously.  Vehicle commands apply
        at the next tick boundary; with the paced loop stopped they apply
        immediately (any moment between manual steps is a boundary).
        """
        cmd = StationCommand(kind=kind, payload=payload or {},
                             request_id=request_id or uuid.uuid4().hex[:12])
        if kind in SYNC_KINDS:
            return self._execute(cmd)
        if kind not in QUEUED_KINDS:
            return self._ack_error(cmd, StationError(
                "UnknownCommand", f"unknown command kind {kind!r}"))
        if kind == "backseat":
            # parse errors are caller errors; fail fast without queueing
            try:
                self._parse_backseat(cmd.payload)
            except StationError as err:
                with self._lock:
                    return self._ack_error(cmd, err)
        if not self.running:
            return self._execute(cmd)
        pending = _Pending(cmd)
        self._queue.put(pending)
        if not pending.done.wait(timeout):
            raise TimeoutError(f"command {cmd.request_id} not applied in time")
        return pending.ack

    def _ack_ok(self, cmd: StationCommand, result: dict) -> dict:
        self._seq += 1
        return {"request_id": cmd.request_id, "ok": True, "seq": self._seq,
                "sim_time": self.runner.state.sim_time, "result": result}

    def _ack_error(self, cmd: StationCommand, err: StationError) -> dict:
        self._seq += 1
        return {"request_id": cmd.request_id, "ok": False, "seq": self._seq,
                "sim_time": self.runner.state.sim_time, "error": err.doc()}

    def _execute(self, cmd: StationCommand) -> dict:
        with self._lock:
            try:
                handler = getattr(self, f"_cmd_{cmd.kind}")
                return self._ack_ok(cmd, handler(cmd.payload))
            except StationError as err:
                return self._ack_error(cmd, err)

    # -- individual commands ----------------------------------------------------

    def _cmd_create_plan(self, payload: dict) -> dict:
        doc = payload.get("plan")
        if not isinstance(doc, dict):
            raise StationError("ValidationFailed", "payload needs a plan document")
        try:
            plan = plan_from_document(doc)
        except Exception as err:
            raise StationError("ValidationFailed", str(err)) from err
        self._plan_counter += 1
        plan_id = payload.get("plan_id") or f"p{self._plan_counter:04d}"
        self.plans[plan_id] = plan
        self.runner.plans[plan_id] = plan
        violations = validate(plan, bathymetry=self.runner.env.bathymetry)
        return {"plan_id": plan_id, "plan": plan_to_document(plan),
                "violations": violations}

    def _cmd_validate(self, payload: dict) -> dict:
        plan = self._plan_or_raise(payload.get("plan_id"))
        violations = validate(plan, bathymetry=self.runner.env.bathymetry)
        return {"plan_id": payload.get("plan_id"), "violations": violations}

    def _cmd_launch(self, payload: dict) -> dict:
        plan = self._plan_or_raise(payload.get("plan_id"))
        try:
            ctx = self.runner.launch(plan, mission_id=payload.get("mission_id"))
        except InvalidPlan as err:
            raise StationError("ValidationFailed", str(err)) from err
        except (InvalidState, NotAtSurface) as err:
            raise StationError("InvalidState", str(err)) from err
        self.missions[ctx.mission_id] = ctx
        self._open_writer(ctx)
        return {"mission_id": ctx.mission_id, "phase": ctx.exec_state.phase.value}

    def _cmd_abort(self, payload: dict) -> dict:
        ctx = self._live_mission_or_raise(payload.get("mission_id"))
        try:
            self.runner.abort()
        except InvalidState as err:
            raise StationError("InvalidState", str(err)) from err
        return {"mission_id": ctx.mission_id, "phase": ctx.exec_state.phase.value}

    def _cmd_loiter(self, payload: dict) -> dict:
        ctx = self._mission_or_default(payload.get("mission_id"))
        try:
            self.runner.loiter_here()
        except (InvalidState, NotAtSurface) as err:
            raise StationError("InvalidState", str(err)) from err
        return {"mission_id": ctx.mission_id if ctx else None,
                "phase": self.runner.phase().value}

    def _cmd_backseat(self, payload: dict) -> dict:
        msg = self._parse_backseat(payload)
        try:
            self.runner.receive_backseat(msg)
        except InvalidState as err:
            raise StationError("InvalidState", str(err)) from err
        return {"session": msg.session, "applied_at": self.runner.state.sim_time}

    def _cmd_set_config(self, payload: dict) -> dict:
        allowed = {"time_scale", "decimation", "omniscient_link"}
        unknown = set(payload) - allowed
        if unknown:
            raise StationError("ConfigError",
                               f"unknown settings: {sorted(unknown)}")
        updates: dict[str, Any] = {}
        if "time_scale" in payload:
            ts = float(payload["time_scale"])
            if ts <= 0:
                raise StationError("ConfigError", "time_scale must be positive")
            updates["time_scale"] = ts
        if "decimation" in payload:
            dec = int(payload["decimation"])
            if dec < 1:
                raise StationError("ConfigError", "decimation must be >= 1")
            updates["decimation"] = dec
        if "omniscient_link" in payload:
            updates["omniscient_link"] = bool(payload["omniscient_link"])
        self.settings = replace(self.settings, **updates)
        return {"settings": {
            "time_scale": self.settings.time_scale,
            "decimation": self.settings.decimation,
            "omniscient_link": self.settings.omniscient_link,
        }}

    def _parse_backseat(self, payload: dict):
        import json
        line = payload.get("line")
        if line is None:
            line = json.dumps(payload)
        try:
            return parse_backseat_line(line)
        except MalformedMessage as err:
            raise StationError("MalformedMessage", str(err)) from err

    def _plan_or_raise(self, plan_id):
        if plan_id is None or plan_id not in self.plans:
            raise StationError("UnknownPlan", f"no plan {plan_id!r}")
        return self.plans[plan_id]

    def _mission_or_raise(self, mission_id) -> MissionContext:
        if mission_id is None or mission_id not in self.missions:
            raise StationError("UnknownMission", f"no mission {mission_id!r}")
        return self.missions[mission_id]

    def _live_mission_or_raise(self, mission_id) -> MissionContext:
        ctx = (self._mission_or_raise(mission_id) if mission_id is not None
               else self.runner.mission)
        if ctx is None:
            raise StationError("InvalidState", "no mission running")
        if self.runner.mission is not ctx or not ctx.active:
            raise StationError("InvalidState",
                               f"mission {ctx.mission_id} is not active")
        return ctx

    def _mission_or_default(self, mission_id) -> Optional[MissionContext]:
        if mission_id is not None:
            return self._mission_or_raise(mission_id)
        return self.runner.mission

    # -- the loop body ------------------------------------------------------------

    def step(self) -> None:
        """Apply queued commands at the boundary, then run one control tick."""
        with self._lock:
            while True:
                try:
                    pending = self._queue.get_nowait()
                except queue.Empty:
                    break
                pending.ack = self._execute(pending.command)
                pending.done.set()
            record = self.runner.tick()
            if record is not None and self._writer is not None:
                self._writer.append(record)
            if (self._writer_ctx is not None and not self._writer_ctx.active
                    and self._writer is not None):
                self._writer.close(self._writer_ctx.log)
                self._writer = None
                self._writer_ctx = None
            tick_index = self.runner._tick_index - 1  # index of the tick just run
            if tick_index % self.settings.decimation == 0:
                doc = self._telemetry_doc(record, tick_index)
                self.last_telemetry = doc
                self.hub.publish(doc)

    def _open_writer(self, ctx: MissionContext) -> None:
        if self.log_dir is None:
            return
        if self._writer is not None and self._writer_ctx is not None:
            self._writer.close(self._writer_ctx.log)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self._writer = LogWriter(self.log_dir / f"{ctx.mission_id}.log",
                                 ctx.log.plan_doc)
        self._writer_ctx = ctx

    def _telemetry_doc(self, record, seq: int) -> dict:
        frame = self.runner.last_frame
        surfaced = frame is not None and frame.gnss is not None
        ctx = self.runner.mission
        doc = {
            "sim_time": frame.sim_time if frame is not None else 0.0,
            "seq": seq,
            "connection": "surface" if surfaced else "submerged",
            "mission_id": ctx.mission_id if ctx is not None else None,
        }
        if surfaced or self.settings.omniscient_link:
            doc["phase"] = self.runner.phase().value
            doc["frame"] = _frame_doc(frame)
            if self.runner.last_applied is not None:
                doc["ref"] = _ref_doc(self.runner.last_applied)
            if record is not None:
                doc["estimate"] = _est_doc(record.estimate)
        return doc

    # -- queries (read-only) -------------------------------------------------------

    def list_missions(self) -> list[dict]:
        with self._lock:
            out = []
            for ctx in self.missions.values():
                recs = ctx.log.records
                out.append({
                    "mission_id": ctx.mission_id,
                    "plan": ctx.log.plan_doc,
                    "phase": ctx.exec_state.phase.value,
                    "active": ctx.active,
                    "start_time": recs[0].sim_time if recs else None,
                    "end_time": recs[-1].sim_time if recs else None,
                    "records": len(recs),
                    "finalized": ctx.log.finalized,
                })
            return out

    def get_log_text(self, mission_id: str) -> str:
        with self._lock:
            ctx = self._mission_or_raise(mission_id)
            return to_text(ctx.log)

    def quickview(self, mission_id: str, t: float) -> dict:
        with self._lock:
            ctx = self._mission_or_raise(mission_id)
            try:
                rec = quickview_at(ctx.log, t)
            except ValueError as err:
                raise StationError("InvalidState", str(err)) from err
            return {"mission_id": mission_id, "record": record_doc(rec)}

    def export_mission(self, mission_id: str, fmt: str) -> str:
        with self._lock:
            ctx = self._mission_or_raise(mission_id)
            try:
                return export(ctx.log, fmt)
            except ReconstructionMissing as err:
                raise StationError("ReconstructionMissing", str(err)) from err
            except ValueError as err:
                raise StationError("UnknownFormat", str(err)) from err

    def status(self) -> dict:
        with self._lock:
            ctx = self.runner.mission
            return {
                "scenario": self.cfg.scenario,
                "sim_time": self.runner.state.sim_time,
                "phase": self.runner.phase().value,
                "mission_id": ctx.mission_id if ctx is not None else None,
                "running": self.running,
                "plans": sorted(self.plans),
                "settings": {
                    "time_scale": self.settings.time_scale,
                    "decimation": self.settings.decimation,
                    "omniscient_link": self.settings.omniscient_link,
                    "dt": self.cfg.runner.dt,
                },
                "subscribers": self.hub.subscriber_count,
            }

    def stream(self, poll_timeout: float = 1.0) -> Iterator[dict]:
        """Subscribe and yield telemetry docs until the subscription closes."""
        sub = self.hub.subscribe()
        try:
            while True:
                doc = sub.get(timeout=poll_timeout)
                if doc is not None:
                    yield doc
                elif sub.closed:
                    return
        finally:
            sub.close()
