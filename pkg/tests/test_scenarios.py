"""Canned scenarios and the circle-search/follow/resume demonstration."""

import pytest

from seashark.autonomy import EventRule, RuleClause, SwitchMission
from seashark.envsim import DetectionRegion, Environment, BathymetryGrid
from seashark.executor import ExecPhase
from seashark.geodesy import GeoPoint, destination
from seashark.mission_plan import DepthMode, DepthRef, plan_circle
from seashark.runner import MissionRunner
from seashark.scenarios import (
    SCENARIOS,
    FollowPlan,
    build_scenario,
    run_scenario_ghostnet,
    scenario_phase_labels,
)

ORIGIN = GeoPoint(55.0, 12.0)


def detect_rule():
    return EventRule(
        rule_id="detect",
        clauses=(RuleClause("object_seen", "==", 1.0),
                 RuleClause("depth", ">", 4.0)),
        action=SwitchMission("unused"),  # replaced by the harness
        debounce=3,
    )


def search_circle(duration=120.0):
    return plan_circle(ORIGIN, radius=15.0, speed=1.0,
                       depth_ref=DepthRef(DepthMode.DEPTH, 5.0),
                       duration=duration)


def env_with_region(center, radius=12.0):
    return Environment(bathymetry=BathymetryGrid.uniform(ORIGIN, 20.0),
                       detection_region=DetectionRegion(center, radius))


def test_all_scenarios_build_and_validate():
    from seashark.mission_plan import validate
    for name in SCENARIOS:
        sc = build_scenario(name)
        assert sc.name == name
        assert sc.env.bathymetry is not None
        for plan_id, plan in sc.plans.items():
            assert validate(plan, bathymetry=sc.env.bathymetry) == [], plan_id
        # the start state sits inside the bathymetry grid, on the surface
        sc.env.bathymetry.depth_at(sc.start.position)
        assert sc.start.depth == 0.0


def test_unknown_scenario_name():
    with pytest.raises(KeyError):
        build_scenario("atlantis")


def test_follow_resume_label_sequence():
    # region on the eastern arc of the traced circle
    region_center = destination(ORIGIN, 90.0, 25.0)
    log = run_scenario_ghostnet(search_circle(), detect_rule(),
                                FollowPlan(heading=150.0, duration=20.0),
                                env_with_region(region_center))
    labels = scenario_phase_labels(log)
    joined = ",".join(labels)
    assert "Circle,Follow,Circle" in joined
    assert labels[-1] == "Complete"


def test_region_off_the_path_never_follows():
    region_center = destination(ORIGIN, 90.0, 500.0)
    log = run_scenario_ghostnet(search_circle(duration=60.0), detect_rule(),
                                FollowPlan(heading=150.0, duration=20.0),
                                env_with_region(region_center))
    assert "Follow" not in scenario_phase_labels(log)


def test_follow_pauses_circle_clock():
    # total circle time (mission-sourced run records) equals the plan duration
    from seashark.control import RefSource
    duration = 90.0
    region_center = destination(ORIGIN, 90.0, 25.0)
    log = run_scenario_ghostnet(search_circle(duration), detect_rule(),
                                FollowPlan(heading=150.0, duration=15.0),
                                env_with_region(region_center))
    circle_ticks = sum(1 for r in log.records
                       if r.phase is ExecPhase.RUN_CIRCLE
                       and r.ref.source is RefSource.MISSION)
    assert abs(circle_ticks - duration / 0.1) <= 1


def test_switch_mission_scenario_runs_inspection():
    sc = build_scenario("ghostnet")
    runner = MissionRunner(sc.env, sc.start, rules=sc.rules, plans=sc.plans)
    runner.launch(sc.plans["search"])
    records = runner.run_until(lambda r: r.mission is not None
                               and not r.mission.active, max_ticks=100_000)
    # the detection switched plans mid-flight: the log's own plan is the
    # search circle, but the flight ends on the inspection circle's center
    from seashark.geodesy import distance_m
    assert distance_m(records[-1].frame.gnss,
                      sc.env.detection_region.center) <= 5.0
