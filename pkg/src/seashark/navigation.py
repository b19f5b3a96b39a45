"""Dead-reckoned navigation and GNSS-anchored track reconstruction.

The vehicle measures no water-relative velocity, so underwater position is
dead-reckoned from compass heading and the commanded (assumed) speed, with
no way to observe drift.  GNSS fixes taken at the surface before and after
each underwater run anchor the segment: the dead-reckoned track is
translated onto the entry fix and the closing residual is distributed
linearly in time, which reproduces the true track exactly when the drift
current was constant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .envsim import SensorFrame
from .geodesy import GeoPoint, destination, offset_point, tangent_offset


class EstimateSource(str, Enum):
    DEAD_RECKONED = "dr"
    GNSS_FIX = "gnss"


class TimeOrderViolation(ValueError):
    """Track or fix timestamps out of order."""


class DegenerateDuration(ValueError):
    """A reconstruction or drift estimate needs a non-zero time span."""


@dataclass(frozen=True)
class NavEstimate:
    """Position estimate at one tick.

    heading_used and speed_used record the inputs of the step that produced
    a dead-reckoned estimate (for a GNSS fix they record the tick's compass
    and commanded speed, for bookkeeping).
    """

    sim_time: float
    position: GeoPoint
    source: EstimateSource
    heading_used: float
    speed_used: float


@dataclass(frozen=True)
class Track:
    """Time-ordered sequence of estimates."""

    points: tuple[NavEstimate, ...]

    def __post_init__(self) -> None:
        times = [p.sim_time for p in self.points]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TimeOrderViolation("track times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def first(self) -> NavEstimate:
        return self.points[0]

    @property
    def last(self) -> NavEstimate:
        return self.points[-1]

    def to_text(self) -> str:
        """Line-delimited `time_s lat lon source` dump, degrees to 1e-6."""
        lines = [f"{p.sim_time:.3f} {p.position.lat:.6f} {p.position.lon:.6f} "
                 f"{p.source.value}" for p in self.points]
        return "\n".join(lines) + "\n"


def dead_reckon_step(prev: NavEstimate, compass: float, assumed_speed: float,
                     dt: float) -> NavEstimate:
    """One dead-reckoning step: advance along the compass at assumed speed."""
    pos = destination(prev.position, compass, assumed_speed * dt)
    return NavEstimate(
        sim_time=prev.sim_time + dt,
        position=pos,
        source=EstimateSource.DEAD_RECKONED,
        heading_used=compass,
        speed_used=assumed_speed,
    )


def reconstruct_track(dr: Track, fix_before: NavEstimate,
                      fix_after: NavEstimate) -> Track:
    """Anchor a dead-reckoned track between two GNSS fixes.

    Translates the track so its first point sits on fix_before, then adds
    the closing residual to fix_after scaled linearly in time.  Endpoints
    therefore match the fixes exactly; a constant drift current is removed
    entirely.  Sources stay dead-reckoned.
    """
    if len(dr) == 0:
        raise ValueError("empty dead-reckoned track")
    if fix_before.source is not EstimateSource.GNSS_FIX \
            or fix_after.source is not EstimateSource.GNSS_FIX:
        raise ValueError("anchors must be GNSS fixes")
    if fix_before.sim_time > dr.first.sim_time or fix_after.sim_time < dr.last.sim_time:
        raise TimeOrderViolation("fixes must bracket the dead-reckoned track in time")
    t0, t1 = dr.first.sim_time, dr.last.sim_time
    if t1 <= t0:
        raise DegenerateDuration("dead-reckoned track spans zero time")

    shift_e, shift_n = tangent_offset(dr.first.position, fix_before.position)
    translated = [offset_point(p.position, shift_e, shift_n) for p in dr.points]
    res_e, res_n = tangent_offset(translated[-1], fix_after.position)

    out = []
    for p, pos in zip(dr.points, translated):
        w = (p.sim_time - t0) / (t1 - t0)
        out.append(replace(p, position=offset_point(pos, res_e * w, res_n * w)))
    return Track(tuple(out))


def estimate_drift(fix_before: NavEstimate, fix_after: NavEstimate,
                   dr: Track) -> tuple[float, float]:
    """Mean drift (east, north m/s) over a segment from its closing residual.

    Depends only on the fixes and the track endpoints, so any two tracks
    sharing endpoints give the same estimate.
    """
    duration = fix_after.sim_time - fix_before.sim_time
    if duration <= 0:
        raise DegenerateDuration("fixes must span a positive duration")
    dr_e, dr_n = tangent_offset(dr.first.position, dr.last.position)
    fx_e, fx_n = tangent_offset(fix_before.position, fix_after.position)
    return (fx_e - dr_e) / duration, (fx_n - dr_n) / duration


@dataclass
class UnderwaterSegment:
    """One submerged run: entry fix, dead-reckoned chain, exit fix.

    fix_after is None when the run never closed with a surface fix (for
    example a log that stops mid-water); such segments are flagged gaps and
    cannot be reconstructed.
    """

    fix_before: NavEstimate
    dr: Track
    fix_after: Optional[NavEstimate] = None

    @property
    def is_gap(self) -> bool:
        return self.fix_after is None


class DeadReckoner:
    """Online estimator fed one sensor frame per tick.

    Publishes a GNSS estimate whenever a fix is available and a dead-
    reckoned estimate otherwise.  Internally it also propagates the
    dead-reckoned chain through the tick on which GNSS reappears, so each
    closed UnderwaterSegment spans fix-to-fix and can be reconstructed
    without re-deriving anything from logs.

    Each step uses the compass and commanded speed from the previous tick:
    those are the values in force while the vehicle covered the interval.
    """

    def __init__(self) -> None:
        self._chain: list[NavEstimate] = []
        self._pending: Optional[tuple[float, float]] = None  # heading, speed
        self._segments: list[UnderwaterSegment] = []
        self._seed_fix: Optional[NavEstimate] = None
        self.last_estimate: Optional[NavEstimate] = None

    def update(self, frame: SensorFrame, assumed_speed: float, dt: float) -> NavEstimate:
        chained: Optional[NavEstimate] = None
        if self._chain and self._pending is not None:
            heading, speed = self._pending
            chained = dead_reckon_step(self._chain[-1], heading, speed, dt)

        if frame.gnss is not None:
            est = NavEstimate(frame.sim_time, frame.gnss, EstimateSource.GNSS_FIX,
                              frame.compass, assumed_speed)
            if chained is not None and len(self._chain) > 1 and self._seed_fix is not None:
                self._segments.append(UnderwaterSegment(
                    fix_before=self._seed_fix,
                    dr=Track(tuple(self._chain) + (chained,)),
                    fix_after=est,
                ))
            # reseed the chain at the fix
            self._chain = [NavEstimate(frame.sim_time, frame.gnss,
                                       EstimateSource.DEAD_RECKONED,
                                       frame.compass, assumed_speed)]
            self._seed_fix = est
        else:
            if chained is None:
                raise ValueError("dead reckoning needs a surface fix to seed from")
            est = chained
            self._chain.append(chained)

        self._pending = (frame.compass, assumed_speed)
        self.last_estimate = est
        return est

    def closed_segments(self) -> list[UnderwaterSegment]:
        return list(self._segments)

    def open_segment(self) -> Optional[UnderwaterSegment]:
        """The in-progress submerged run, if any (a gap if never closed)."""
        if len(self._chain) > 1 and self._seed_fix is not None:
            return UnderwaterSegment(fix_before=self._seed_fix,
                                     dr=Track(tuple(self._chain)), fix_after=None)
        return None
