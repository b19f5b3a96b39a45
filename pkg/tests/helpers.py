"""Shared builders for closed-loop tests: calm flat-bottom world, runners."""

from seashark.envsim import BathymetryGrid, Environment, VehicleState
from seashark.executor import ExecPhase
from seashark.geodesy import GeoPoint
from seashark.runner import MissionRunner, RunnerConfig

ORIGIN = GeoPoint(55.0, 12.0)
SURFACE_THRESHOLD = 0.3


def calm_env(depth=20.0, **kwargs) -> Environment:
    """Flat seabed, no current, noiseless sensors, ~5 km of grid coverage."""
    return Environment(bathymetry=BathymetryGrid.uniform(ORIGIN, depth), **kwargs)


def vehicle_at(point=ORIGIN, heading=0.0, speed=0.0) -> VehicleState:
    return VehicleState(position=point, depth=0.0, heading=heading, speed=speed,
                        vertical_rate=0.0, sim_time=0.0)


def make_runner(env=None, heading=0.0, cfg=None, point=ORIGIN, **runner_kwargs) -> MissionRunner:
    return MissionRunner(env or calm_env(), vehicle_at(point, heading),
                         cfg or RunnerConfig(), **runner_kwargs)


def compressed_phases(records) -> list[ExecPhase]:
    """Phase sequence with consecutive duplicates collapsed."""
    out = []
    for rec in records:
        if not out or out[-1] is not rec.phase:
            out.append(rec.phase)
    return out


def phase_spans(records) -> list[tuple[ExecPhase, float, float]]:
    """(phase, first_t, last_t) for each contiguous phase stretch."""
    spans = []
    for rec in records:
        if spans and spans[-1][0] is rec.phase:
            spans[-1][2] = rec.sim_time
        else:
            spans.append([rec.phase, rec.sim_time, rec.sim_time])
    return [tuple(s) for s in spans]


def surfacing_respects_ascend(records) -> bool:
    """Every true submerged-to-surface crossing happens in the Ascend phase."""
    for a, b in zip(records, records[1:]):
        if a.state.depth > SURFACE_THRESHOLD >= b.state.depth:
            if a.phase is not ExecPhase.ASCEND:
                return False
    return True
