"""Closed-loop mission execution: phase sequences, timing, abort, loiter."""

import random

import pytest
from helpers import (
    ORIGIN,
    calm_env,
    compressed_phases,
    make_runner,
    phase_spans,
    surfacing_respects_ascend,
    vehicle_at,
)

from seashark import executor
from seashark.autonomy import BackseatMessage, EndMission, ResumePrevious, SetRefs
from seashark.control import RefSource
from seashark.envsim import UniformCurrent, VehicleState
from seashark.executor import ExecPhase, InvalidPlan, NotAtSurface
from seashark.geodesy import destination, distance_m
from seashark.mission_plan import DepthMode, DepthRef, plan_circle, plan_line, plan_site

DT = 0.1
DEPTH5 = DepthRef(DepthMode.DEPTH, 5.0)


def line_plan(heading=90.0, timeout=30.0, lead_in=10.0, depth=DEPTH5, **kw):
    return plan_line(ORIGIN, heading, timeout, depth, lead_in=lead_in, **kw)


def test_line_mission_full_phase_sequence():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan())
    ctx = runner.run_mission()

    assert compressed_phases(ctx.log.records) == [
        ExecPhase.LEAD_IN, ExecPhase.DIVE, ExecPhase.RUN_LINE,
        ExecPhase.ASCEND, ExecPhase.RETURN_TRANSIT, ExecPhase.COMPLETE,
    ]
    assert surfacing_respects_ascend(ctx.log.records)
    # rendezvous defaults to the start point; arrival radius is 5 m
    last = ctx.log.records[-1]
    assert distance_m(last.frame.gnss, ORIGIN) <= 5.0
    assert last.state.depth <= 0.3


def test_one_record_per_tick():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=10.0))
    ctx = runner.run_mission()
    times = [r.sim_time for r in ctx.log.records]
    assert times[0] == 0.0
    for a, b in zip(times, times[1:]):
        assert b - a == pytest.approx(DT, abs=1e-9)


def test_run_duration_matches_timeout_exactly():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=30.0))
    ctx = runner.run_mission()
    run_records = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_LINE]
    assert len(run_records) == round(30.0 / DT)


def test_run_duration_randomized_timeouts():
    rng = random.Random(7)
    for _ in range(5):
        timeout = round(rng.uniform(5.0, 25.0), 1)
        runner = make_runner(heading=rng.uniform(0, 360))
        runner.launch(line_plan(heading=runner.state.heading, timeout=timeout,
                                lead_in=0.0))
        runner.run_until(lambda r: r.phase() is ExecPhase.RETURN_TRANSIT)
        runner.abort()
        ctx = runner.run_mission()
        n_run = sum(1 for r in ctx.log.records if r.phase is ExecPhase.RUN_LINE)
        assert abs(n_run - timeout / DT) <= 1


def test_zero_lead_in_dives_immediately():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=5.0))
    ctx = runner.run_mission()
    assert compressed_phases(ctx.log.records)[0] is ExecPhase.DIVE


def test_depth_held_during_run():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=20.0))
    ctx = runner.run_mission()
    for rec in ctx.log.records:
        if rec.phase is ExecPhase.RUN_LINE:
            assert abs(rec.frame.depth - 5.0) <= 0.6


def test_dive_capture_needs_consecutive_in_band_ticks():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=5.0))
    ctx = runner.run_mission()
    first_run = next(i for i, r in enumerate(ctx.log.records)
                     if r.phase is ExecPhase.RUN_LINE)
    # capture needs 3 consecutive in-band frames; the third is the entry tick
    for rec in ctx.log.records[first_run - 2:first_run + 1]:
        assert abs(rec.frame.depth - 5.0) <= 0.3


def test_altitude_mode_line():
    # 20 m seabed, hold 15 m altitude -> roughly 5 m depth
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=15.0,
                            depth=DepthRef(DepthMode.ALTITUDE, 15.0)))
    ctx = runner.run_mission()
    run = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_LINE]
    assert run
    for rec in run:
        assert abs(rec.frame.altitude - 15.0) <= 0.6


def test_site_mission_line_count_and_transits():
    plan = plan_site(ORIGIN, num_lines=2, line_length=30.0, spacing=10.0,
                     orientation=0.0, depth_ref=DEPTH5)
    runner = make_runner(heading=plan.lines[0].heading)
    runner.launch(plan)
    ctx = runner.run_mission(max_ticks=60_000)

    assert compressed_phases(ctx.log.records) == [
        ExecPhase.LEAD_IN, ExecPhase.DIVE, ExecPhase.RUN_LINE, ExecPhase.ASCEND,
        ExecPhase.TRANSIT_TO_NEXT_LINE,
        ExecPhase.LEAD_IN, ExecPhase.DIVE, ExecPhase.RUN_LINE, ExecPhase.ASCEND,
        ExecPhase.RETURN_TRANSIT, ExecPhase.COMPLETE,
    ]
    assert surfacing_respects_ascend(ctx.log.records)
    spans = [s for s in phase_spans(ctx.log.records) if s[0] is ExecPhase.RUN_LINE]
    for _, t0, t1 in spans:
        # 30 m at 1 m/s: timeout 30 s, span covers timeout/dt records
        assert abs((t1 - t0 + DT) - 30.0) <= DT + 1e-9
    assert distance_m(ctx.log.records[-1].frame.gnss, ORIGIN) <= 5.0


def test_site_gnss_only_at_surface():
    plan = plan_site(ORIGIN, num_lines=2, line_length=20.0, spacing=8.0,
                     orientation=45.0, depth_ref=DEPTH5)
    runner = make_runner(heading=plan.lines[0].heading)
    runner.launch(plan)
    ctx = runner.run_mission(max_ticks=60_000)
    for rec in ctx.log.records:
        assert (rec.frame.gnss is not None) == (rec.state.depth <= 0.3)


def test_circle_mission_sequence_and_turning():
    plan = plan_circle(ORIGIN, radius=15.0, speed=1.0, depth_ref=DEPTH5,
                       duration=60.0)
    runner = make_runner()
    runner.launch(plan)
    ctx = runner.run_mission(max_ticks=60_000)

    assert compressed_phases(ctx.log.records) == [
        ExecPhase.DIVE, ExecPhase.RUN_CIRCLE, ExecPhase.ASCEND,
        ExecPhase.RETURN_TRANSIT, ExecPhase.COMPLETE,
    ]
    run = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_CIRCLE]
    assert abs(len(run) - 60.0 / DT) <= 1
    # reference heading marches at speed/radius: 60 s * 3.82 deg/s > 180 deg
    headings = {round(r.ref.heading) % 360 for r in run}
    assert len(headings) > 180


def test_circle_spiral_deepens_reference():
    plan = plan_circle(ORIGIN, radius=15.0, speed=1.0, depth_ref=DEPTH5,
                       duration=40.0, spiral_rate=0.05)
    runner = make_runner()
    runner.launch(plan)
    ctx = runner.run_mission(max_ticks=60_000)
    run = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_CIRCLE]
    values = [r.ref.depth_ref.value for r in run]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(5.0 + 0.05 * 40.0, abs=0.1)


def test_abort_underwater_ascends_first():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=60.0))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE and
                     r.state.depth > 4.0)
    runner.abort()
    ctx = runner.run_mission()
    phases = compressed_phases(ctx.log.records)
    assert phases[-2:] == [ExecPhase.ASCEND, ExecPhase.ABORTED]
    assert ExecPhase.RETURN_TRANSIT not in phases
    assert ctx.log.records[-1].state.depth <= 0.3
    assert sum(1 for r in ctx.log.records if r.phase is ExecPhase.ABORTED) == 1


def test_abort_at_surface_is_immediate():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(timeout=30.0))  # 10 m lead-in on the surface
    runner.run_ticks(20)
    assert runner.phase() is ExecPhase.LEAD_IN
    runner.abort()
    ctx = runner.run_mission()
    assert compressed_phases(ctx.log.records) == [ExecPhase.LEAD_IN,
                                                  ExecPhase.ABORTED]


def test_end_mission_skips_remaining_lines():
    plan = plan_site(ORIGIN, num_lines=3, line_length=25.0, spacing=10.0,
                     orientation=0.0, depth_ref=DEPTH5)
    runner = make_runner(heading=plan.lines[0].heading)
    runner.launch(plan)
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE and
                     r.mission.exec_state.line_index == 1)
    runner.apply_action(EndMission())
    ctx = runner.run_mission(max_ticks=60_000)

    assert ctx.exec_state.line_index == 1
    tail = compressed_phases(ctx.log.records)[-3:]
    assert tail == [ExecPhase.ASCEND, ExecPhase.RETURN_TRANSIT, ExecPhase.COMPLETE]
    # ends at the site-level rendezvous (the last line's), not the next line
    target = plan.lines[-1].rendezvous
    assert distance_m(ctx.log.records[-1].frame.gnss, target) <= 5.0


def test_backseat_steers_within_one_tick():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=60.0))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE)
    runner.receive_backseat(BackseatMessage(session="bs", timestamp=0.0,
                                            heading=150.0))
    rec = runner.tick()
    assert rec.ref.source is RefSource.BACKSEAT
    assert rec.ref.heading == 150.0


def test_backseat_pause_and_stale_revert():
    timeout = 20.0
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=timeout))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE)
    runner.run_ticks(20)
    frozen = runner.mission.exec_state.phase_elapsed

    # stream messages for 10 s, one per second
    last_issued = None
    for i in range(100):
        if i % 10 == 0:
            runner.receive_backseat(BackseatMessage(session="bs", timestamp=0.0,
                                                    heading=150.0))
            last_issued = runner.state.sim_time
        runner.tick()
    assert runner.mission.exec_state.phase is ExecPhase.RUN_LINE
    assert runner.mission.exec_state.phase_elapsed == frozen
    assert abs(runner.last_frame.compass - 150.0) < 3.0

    # silence: reverts to the mission reference after the 5 s staleness window
    revert_rec = runner.run_until(
        lambda r: r.last_applied.source is RefSource.MISSION)[-1]
    assert revert_rec.sim_time == pytest.approx(last_issued + 5.0, abs=2 * DT)

    ctx = runner.run_mission()
    mission_run = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_LINE
                   and r.ref.source is RefSource.MISSION]
    assert abs(len(mission_run) - timeout / DT) <= 1
    assert compressed_phases(ctx.log.records)[-1] is ExecPhase.COMPLETE


def test_setrefs_resume_restores_exact_state():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=20.0))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE)
    runner.run_ticks(50)
    ex = runner.mission.exec_state
    frozen_elapsed = ex.phase_elapsed

    runner.apply_action(SetRefs(heading=45.0))
    runner.run_ticks(200)
    assert ex.phase is ExecPhase.RUN_LINE
    assert ex.phase_elapsed == frozen_elapsed
    assert abs(runner.last_frame.compass - 45.0) < 3.0

    runner.apply_action(ResumePrevious())
    runner.run_ticks(10)
    assert ex.phase_elapsed == pytest.approx(frozen_elapsed + 10 * DT, abs=1e-9)

    ctx = runner.run_mission()
    mission_run = [r for r in ctx.log.records if r.phase is ExecPhase.RUN_LINE
                   and r.ref.source is RefSource.MISSION]
    assert abs(len(mission_run) - 20.0 / DT) <= 1


def test_loiter_bounded_under_current():
    env = calm_env(current=UniformCurrent(east=0.2))
    runner = make_runner(env=env, heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=5.0))
    runner.run_mission()
    runner.loiter_here()
    anchor = runner.mission.exec_state.loiter_anchor

    max_dist = 0.0
    approaches = 0
    outside = False
    for _ in range(3000):
        runner.tick()
        d = distance_m(runner.state.position, anchor)
        max_dist = max(max_dist, d)
        if not outside and d > 10.0:
            outside = True
        elif outside and d <= 2.5:
            outside = False
            approaches += 1
    assert max_dist <= 15.0
    assert approaches >= 2


def test_loiter_requires_surface():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=60.0))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE)
    with pytest.raises(NotAtSurface):
        runner.loiter_here()


def test_transit_give_up_falls_back_to_loiter():
    # current outruns the vehicle on the way home: never arrives, loiters
    env = calm_env(current=UniformCurrent(east=-1.2))
    rendezvous = destination(ORIGIN, 90.0, 20.0)
    plan = plan_line(ORIGIN, 0.0, 5.0, DEPTH5, rendezvous=rendezvous)
    runner = make_runner(env=env, heading=0.0)
    runner.launch(plan)
    runner.run_until(lambda r: r.phase() is ExecPhase.RETURN_TRANSIT)
    expected = runner.mission.exec_state.transit_expected
    runner.run_until(lambda r: r.phase() is ExecPhase.LOITER,
                     max_ticks=int(4 * expected / DT) + 2000)
    assert runner.mission.exec_state.giveup_flagged
    transit = [s for s in phase_spans(runner.mission.log.records)
               if s[0] is ExecPhase.RETURN_TRANSIT]
    _, t0, t1 = transit[-1]
    assert (t1 - t0) == pytest.approx(2.0 * expected, abs=2 * DT)


def test_launch_rejects_invalid_plan():
    runner = make_runner()
    too_deep = plan_line(ORIGIN, 90.0, 30.0, DepthRef(DepthMode.DEPTH, 25.0))
    with pytest.raises(InvalidPlan):
        runner.launch(too_deep)


def test_start_rejects_submerged_vehicle():
    env = calm_env()
    sunk = VehicleState(position=ORIGIN, depth=5.0, heading=0.0, speed=0.0,
                        vertical_rate=0.0, sim_time=0.0)
    with pytest.raises(NotAtSurface):
        executor.start(line_plan(), sunk, env)


def test_relaunch_after_completion():
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=5.0))
    first = runner.run_mission()
    second = runner.launch(line_plan(lead_in=0.0, timeout=5.0))
    runner.run_mission()
    assert first.mission_id != second.mission_id
    assert len(runner.completed) == 2
    assert second.log.records[0].sim_time > first.log.records[-1].sim_time


def test_launch_rejected_while_running():
    from seashark.runner import InvalidState
    runner = make_runner(heading=90.0)
    runner.launch(line_plan(lead_in=0.0, timeout=60.0))
    runner.run_until(lambda r: r.phase() is ExecPhase.RUN_LINE)
    with pytest.raises(InvalidState):
        runner.launch(line_plan())


def test_same_seed_replays_identical_log():
    from seashark.mission_log import to_text
    from seashark.runner import RunnerConfig

    def fly(seed):
        env = calm_env(current=UniformCurrent(east=0.05, north=-0.03),
                       compass_noise_sigma=0.5, depth_noise_sigma=0.03,
                       gnss_noise_sigma=0.5)
        runner = make_runner(env=env, heading=90.0,
                             cfg=RunnerConfig(seed=seed))
        runner.launch(line_plan(timeout=15.0))
        return runner.run_mission(max_ticks=30_000)

    a, b = fly(42), fly(42)
    assert to_text(a.log) == to_text(b.log)
