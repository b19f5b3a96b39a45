"""Pre-canned worlds and demonstration harnesses.

Each scenario bundles an environment, a vehicle start state, a small plan
library, and optional event rules, so the CLI (and tests) can bring up a
recognizable situation with one flag: a flat test basin, a shore-to-sea
slope, a harbor wall, and a circle-search-and-inspect setup with a
detection region standing in for an onboard object detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .autonomy import EventRule, ResumePrevious, RuleClause, SetRefs, SwitchMission
from .envsim import (
    BathymetryGrid,
    DetectionRegion,
    Environment,
    UniformCurrent,
    VehicleState,
)
from .executor import ExecPhase
from .geodesy import GeoPoint, destination
from .mission_plan import (
    CircleMission,
    DepthMode,
    DepthRef,
    MissionPlan,
    plan_circle,
    plan_line,
    plan_site,
)
from .mission_log import MissionLog
from .runner import MissionRunner, RunnerConfig


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    env: Environment
    start: VehicleState
    plans: dict[str, MissionPlan] = field(default_factory=dict)
    rules: list[EventRule] = field(default_factory=list)


def _start(point: GeoPoint, heading: float = 0.0) -> VehicleState:
    return VehicleState(position=point, depth=0.0, heading=heading,
                        speed=0.0, vertical_rate=0.0, sim_time=0.0)


def flat_scenario() -> Scenario:
    origin = GeoPoint(55.0, 12.0)
    env = Environment(bathymetry=BathymetryGrid.uniform(origin, 20.0))
    plans = {
        "survey": plan_site(origin, num_lines=3, line_length=60.0, spacing=12.0,
                            orientation=90.0, depth_ref=DepthRef(DepthMode.DEPTH, 5.0)),
        "line": plan_line(origin, 90.0, 60.0, DepthRef(DepthMode.DEPTH, 5.0),
                          lead_in=10.0),
    }
    return Scenario("flat", "calm 20 m test basin", env, _start(origin, 90.0),
                    plans)


def shore_scenario() -> Scenario:
    """Sloping seabed, 1 m at the south edge to 30 m offshore to the north."""
    origin = GeoPoint(55.0, 12.0)
    grid = BathymetryGrid(
        lat0=54.99, lon0=11.9, dlat=0.01, dlon=0.2,
        depths=np.array([[1.0, 1.0], [8.0, 8.0], [15.0, 15.0],
                         [22.0, 22.0], [30.0, 30.0]]),
    )
    env = Environment(bathymetry=grid, current=UniformCurrent(east=0.05))
    plans = {
        # shore-to-sea transects holding a low altitude over the slope
        "transects": plan_site(destination(origin, 0.0, 300.0), num_lines=3,
                               line_length=400.0, spacing=20.0, orientation=0.0,
                               depth_ref=DepthRef(DepthMode.ALTITUDE, 2.0),
                               assumed_speed=1.2),
    }
    return Scenario("shore", "shore-to-sea slope with offshore transects",
                    env, _start(origin), plans)


def wall_scenario() -> Scenario:
    """Harbor wall: a sharp shelf break, with a line run along the deep side."""
    origin = GeoPoint(55.0, 12.0)
    grid = BathymetryGrid(
        lat0=54.95, lon0=11.999, dlat=0.1, dlon=0.0005,
        depths=np.array([[2.0, 2.0, 25.0, 25.0], [2.0, 2.0, 25.0, 25.0]]),
    )
    wall_line = GeoPoint(55.0, 12.0003)  # just east of the break
    env = Environment(bathymetry=grid)
    plans = {
        "wall_run": plan_line(wall_line, 0.0, 120.0, DepthRef(DepthMode.DEPTH, 8.0),
                              lead_in=10.0),
    }
    return Scenario("wall", "harbor wall with a parallel inspection line",
                    env, _start(wall_line), plans)


def ghostnet_scenario() -> Scenario:
    """Circle search with a detection region that triggers an inspection."""
    origin = GeoPoint(55.0, 12.0)
    region = DetectionRegion(center=destination(origin, 90.0, 25.0), radius=12.0)
    env = Environment(bathymetry=BathymetryGrid.uniform(origin, 20.0),
                      detection_region=region)
    search = plan_circle(origin, radius=15.0, speed=1.0,
                         depth_ref=DepthRef(DepthMode.DEPTH, 6.0), duration=180.0)
    inspect = plan_circle(region.center, radius=8.0, speed=0.8,
                          depth_ref=DepthRef(DepthMode.DEPTH, 5.0), duration=60.0)
    # depth clause sits between the two circle depths so the trigger can only
    # fire while searching, not while the inspection itself is in the region
    rules = [EventRule(
        rule_id="object-detected",
        clauses=(RuleClause("object_seen", "==", 1.0),
                 RuleClause("depth", ">", 5.5)),
        action=SwitchMission("inspect"),
        debounce=3,
    )]
    return Scenario("ghostnet", "circle search that switches to inspection on "
                    "detection", env, _start(origin),
                    {"search": search, "inspect": inspect}, rules)


SCENARIOS: dict[str, Callable[[], Scenario]] = {
    "flat": flat_scenario,
    "shore": shore_scenario,
    "wall": wall_scenario,
    "ghostnet": ghostnet_scenario,
}


def build_scenario(name: str) -> Scenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from "
                       f"{sorted(SCENARIOS)}") from None
    return factory()


# --- circle-search / follow / resume demonstration ----------------------------

@dataclass(frozen=True)
class FollowPlan:
    """Backseat-style leg flown when the detection rule fires."""

    heading: float
    depth_ref: Optional[DepthRef] = None   # None: keep the mission's depth
    duration: float = 30.0


def run_scenario_ghostnet(initial: CircleMission, detect_rule: EventRule,
                          follow: FollowPlan, env: Environment,
                          start: Optional[VehicleState] = None,
                          cfg: RunnerConfig = RunnerConfig(),
                          max_ticks: int = 200_000) -> MissionLog:
    """Fly a circle search; on detection, follow the object line, then resume.

    The detect rule's action is overridden with the follow references so the
    behavior is always: trigger -> steer along `follow` for its duration ->
    resume the circle with its remaining time intact.
    """
    rule = replace(detect_rule,
                   action=SetRefs(heading=follow.heading,
                                  depth_ref=follow.depth_ref))
    runner = MissionRunner(env, start or _start(initial.center), cfg,
                           rules=[rule])
    ctx = runner.launch(initial)

    follow_until: Optional[float] = None
    for _ in range(max_ticks):
        if follow_until is None and runner.override_ref is not None:
            follow_until = runner.state.sim_time + follow.duration
        elif follow_until is not None and runner.state.sim_time >= follow_until:
            runner.apply_action(ResumePrevious())
            follow_until = None
        runner.tick()
        if not ctx.active:
            return ctx.log
    raise TimeoutError(f"scenario did not finish within {max_ticks} ticks")


def scenario_phase_labels(log: MissionLog) -> list[str]:
    """Operator-level phase labels with backseat-driven stretches as Follow."""
    from .control import RefSource

    labels = []
    for rec in log.records:
        if rec.phase is ExecPhase.RUN_CIRCLE:
            label = ("Follow" if rec.ref.source is RefSource.BACKSEAT
                     else "Circle")
        else:
            label = rec.phase.value
        if not labels or labels[-1] != label:
            labels.append(label)
    return labels
