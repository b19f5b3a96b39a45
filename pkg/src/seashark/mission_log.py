"""Append-only mission log: one record per control tick, plus exports.

On disk a log is line-delimited JSON under a versioned header line.  The
first payload line holds the plan document; each record line captures the
tick's phase, true vehicle state (unless field mode suppresses it), sensor
frame, applied navigation reference, and position estimate.  GNSS fixes and
underwater dead-reckoning segments follow the records, and a finalized log
carries the reconstructed tracks so reloaded logs can be exported directly.

Writes preserve every float bit-for-bit (JSON shortest round-trip), so a
written and reloaded log compares equal field for field.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO, Union

from .control import NavReference, RefSource
from .envsim import SensorFrame, VehicleState
from .executor import ExecPhase
from .geodesy import GeoPoint
from .mission_plan import DepthMode, DepthRef
from .navigation import (
    EstimateSource,
    NavEstimate,
    TimeOrderViolation,
    Track,
    UnderwaterSegment,
    reconstruct_track,
)

LOG_FORMAT_HEADER = "seashark-log v1"


class ReconstructionMissing(RuntimeError):
    """Track exports need a finalized log."""


@dataclass(frozen=True)
class LogRecord:
    sim_time: float
    phase: ExecPhase
    state: Optional[VehicleState]   # None in field mode
    frame: SensorFrame
    ref: NavReference
    estimate: NavEstimate


@dataclass
class MissionLog:
    plan_doc: dict
    records: list[LogRecord] = field(default_factory=list)
    fixes: list[NavEstimate] = field(default_factory=list)
    segments: list[UnderwaterSegment] = field(default_factory=list)
    reconstructed: Optional[list[Optional[Track]]] = None
    _times: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def finalized(self) -> bool:
        return self.reconstructed is not None


def append(log: MissionLog, record: LogRecord) -> MissionLog:
    """Append one record; times must strictly increase."""
    if log.records and record.sim_time <= log.records[-1].sim_time:
        raise TimeOrderViolation(
            f"record at {record.sim_time} not after {log.records[-1].sim_time}")
    log.records.append(record)
    log._times.append(record.sim_time)
    return log


def add_fix(log: MissionLog, fix: NavEstimate) -> None:
    """Record a GNSS anchor fix (deduplicated by time)."""
    if not any(f.sim_time == fix.sim_time for f in log.fixes):
        log.fixes.append(fix)
        log.fixes.sort(key=lambda f: f.sim_time)


def add_segment(log: MissionLog, segment: UnderwaterSegment) -> None:
    log.segments.append(segment)
    add_fix(log, segment.fix_before)
    if segment.fix_after is not None:
        add_fix(log, segment.fix_after)


def quickview_at(log: MissionLog, t: float) -> LogRecord:
    """The record in force at time t: the latest record with time <= t.

    Queries before the first record clamp to the first record, queries past
    the end clamp to the last, so a review scrubber can never miss.
    """
    if not log.records:
        raise ValueError("empty log")
    idx = max(bisect_right(log._times, t) - 1, 0)
    return log.records[idx]


def finalize(log: MissionLog) -> MissionLog:
    """Run track reconstruction over all closed underwater segments.

    Segments without a closing fix (the vehicle never resurfaced in the
    log) stay as flagged gaps with no reconstruction.
    """
    tracks: list[Optional[Track]] = []
    for seg in log.segments:
        if seg.is_gap:
            tracks.append(None)
        else:
            tracks.append(reconstruct_track(seg.dr, seg.fix_before, seg.fix_after))
    log.reconstructed = tracks
    return log


def _merged_positions(log: MissionLog) -> list[tuple[float, GeoPoint, str]]:
    """Per-record best positions: GNSS at the surface, reconstruction below."""
    recon_map: dict[float, GeoPoint] = {}
    for seg, track in zip(log.segments, log.reconstructed):
        chain = track if track is not None else seg.dr  # gaps keep raw DR
        for p in chain.points:
            recon_map[p.sim_time] = p.position
    out = []
    for rec in log.records:
        if rec.estimate.source is EstimateSource.GNSS_FIX:
            out.append((rec.sim_time, rec.estimate.position, "gnss"))
        else:
            pos = recon_map.get(rec.sim_time, rec.estimate.position)
            out.append((rec.sim_time, pos, "dr"))
    return out


def export(log: MissionLog, fmt: str) -> str:
    """Export the log: `records` (full dump), `track`, or `geotrack`.

    Track formats need a finalized log and use reconstructed positions for
    underwater stretches, raw GNSS estimates at the surface.
    """
    if fmt == "records":
        return to_text(log)
    if fmt not in ("track", "geotrack"):
        raise ValueError(f"unknown export format {fmt!r}")
    if not log.finalized:
        raise ReconstructionMissing("finalize the log before exporting tracks")
    merged = _merged_positions(log)
    if fmt == "track":
        lines = [f"{t:.3f} {p.lat:.6f} {p.lon:.6f} {src}" for t, p, src in merged]
        return "\n".join(lines) + "\n"
    # geotrack: minimal KML path for earth viewers (lon,lat order)
    coords = "\n".join(f"{p.lon:.6f},{p.lat:.6f},0" for _, p, _ in merged)
    name = log.plan_doc.get("type", "mission")
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<kml xmlns="http://www.opengis.net/kml/2.2">\n'
        "  <Document>\n"
        f"    <name>{name} mission track</name>\n"
        "    <Placemark>\n"
        "      <LineString>\n"
        "        <coordinates>\n"
        f"{coords}\n"
        "        </coordinates>\n"
        "      </LineString>\n"
        "    </Placemark>\n"
        "  </Document>\n"
        "</kml>\n"
    )


# --- line serialization -------------------------------------------------------

def _point_doc(p: GeoPoint) -> list[float]:
    return [p.lat, p.lon]


def _point_from(doc: list[float]) -> GeoPoint:
    return GeoPoint(doc[0], doc[1])


def _state_doc(s: VehicleState) -> dict:
    return {"pos": _point_doc(s.position), "depth": s.depth, "heading": s.heading,
            "speed": s.speed, "vr": s.vertical_rate}


def _state_from(doc: dict, t: float) -> VehicleState:
    return VehicleState(position=_point_from(doc["pos"]), depth=doc["depth"],
                        heading=doc["heading"], speed=doc["speed"],
                        vertical_rate=doc["vr"], sim_time=t)


def _frame_doc(f: SensorFrame) -> dict:
    return {"compass": f.compass, "depth": f.depth, "altitude": f.altitude,
            "gnss": _point_doc(f.gnss) if f.gnss is not None else None,
            "image": f.image_ref, "object_seen": f.object_seen}


def _frame_from(doc: dict, t: float) -> SensorFrame:
    return SensorFrame(sim_time=t, compass=doc["compass"], depth=doc["depth"],
                       altitude=doc["altitude"],
                       gnss=_point_from(doc["gnss"]) if doc["gnss"] is not None else None,
                       image_ref=doc["image"], object_seen=doc["object_seen"])


def _ref_doc(r: NavReference) -> dict:
    return {"heading": r.heading, "mode": r.depth_ref.mode.value,
            "value": r.depth_ref.value, "source": r.source.value,
            "issued_at": r.issued_at}


def _ref_from(doc: dict) -> NavReference:
    return NavReference(heading=doc["heading"],
                        depth_ref=DepthRef(DepthMode(doc["mode"]), doc["value"]),
                        source=RefSource(doc["source"]), issued_at=doc["issued_at"])


def _est_doc(e: NavEstimate) -> dict:
    return {"t": e.sim_time, "pos": _point_doc(e.position), "source": e.source.value,
            "heading_used": e.heading_used, "speed_used": e.speed_used}


def _est_from(doc: dict) -> NavEstimate:
    return NavEstimate(sim_time=doc["t"], position=_point_from(doc["pos"]),
                       source=EstimateSource(doc["source"]),
                       heading_used=doc["heading_used"], speed_used=doc["speed_used"])


def record_doc(rec: LogRecord) -> dict:
    return {
        "t": rec.sim_time,
        "phase": rec.phase.value,
        "state": _state_doc(rec.state) if rec.state is not None else None,
        "frame": _frame_doc(rec.frame),
        "ref": _ref_doc(rec.ref),
        "est": _est_doc(rec.estimate),
    }


def record_from_doc(doc: dict) -> LogRecord:
    t = doc["t"]
    return LogRecord(
        sim_time=t,
        phase=ExecPhase(doc["phase"]),
        state=_state_from(doc["state"], t) if doc["state"] is not None else None,
        frame=_frame_from(doc["frame"], t),
        ref=_ref_from(doc["ref"]),
        estimate=_est_from(doc["est"]),
    )


def _segment_doc(seg: UnderwaterSegment) -> dict:
    return {
        "fix_before": _est_doc(seg.fix_before),
        "fix_after": _est_doc(seg.fix_after) if seg.fix_after is not None else None,
        "dr": [_est_doc(p) for p in seg.dr.points],
    }


def _segment_from(doc: dict) -> UnderwaterSegment:
    return UnderwaterSegment(
        fix_before=_est_from(doc["fix_before"]),
        fix_after=_est_from(doc["fix_after"]) if doc["fix_after"] is not None else None,
        dr=Track(tuple(_est_from(p) for p in doc["dr"])),
    )


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def to_text(log: MissionLog) -> str:
    """Serialize the whole log in its on-disk line format."""
    lines = [LOG_FORMAT_HEADER, _dump({"plan": log.plan_doc})]
    lines.extend(_dump({"record": record_doc(r)}) for r in log.records)
    lines.extend(_dump({"fix": _est_doc(f)}) for f in log.fixes)
    lines.extend(_dump({"segment": _segment_doc(s)}) for s in log.segments)
    if log.finalized:
        tracks = [[_est_doc(p) for p in t.points] if t is not None else None
                  for t in log.reconstructed]
        lines.append(_dump({"reconstructed": tracks}))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> MissionLog:
    lines = text.splitlines()
    if not lines or lines[0] != LOG_FORMAT_HEADER:
        raise ValueError(f"missing log header {LOG_FORMAT_HEADER!r}")
    if len(lines) < 2:
        raise ValueError("log has no plan line")
    plan_line = json.loads(lines[1])
    log = MissionLog(plan_doc=plan_line["plan"])
    for raw in lines[2:]:
        if not raw.strip():
            continue
        doc = json.loads(raw)
        if "record" in doc:
            append(log, record_from_doc(doc["record"]))
        elif "fix" in doc:
            log.fixes.append(_est_from(doc["fix"]))
        elif "segment" in doc:
            log.segments.append(_segment_from(doc["segment"]))
        elif "reconstructed" in doc:
            log.reconstructed = [
                Track(tuple(_est_from(p) for p in t)) if t is not None else None
                for t in doc["reconstructed"]]
        else:
            raise ValueError(f"unknown log line {raw[:60]!r}")
    return log


def write_log(log: MissionLog, path: Union[str, Path]) -> None:
    Path(path).write_text(to_text(log))


def load_log(path: Union[str, Path]) -> MissionLog:
    return from_text(Path(path).read_text())


class LogWriter:
    """Streams a log to disk as it grows; each record is flushed on append."""

    def __init__(self, path: Union[str, Path], plan_doc: dict):
        self._path = Path(path)
        self._fh: Optional[TextIO] = open(self._path, "w")
        self._fh.write(LOG_FORMAT_HEADER + "\n")
        self._fh.write(_dump({"plan": plan_doc}) + "\n")
        self._fh.flush()

    def append(self, record: LogRecord) -> None:
        self._fh.write(_dump({"record": record_doc(record)}) + "\n")
        self._fh.flush()

    def close(self, log: MissionLog) -> None:
        """Append the log's fixes, segments, and reconstruction, then close."""
        for f in log.fixes:
            self._fh.write(_dump({"fix": _est_doc(f)}) + "\n")
        for s in log.segments:
            self._fh.write(_dump({"segment": _segment_doc(s)}) + "\n")
        if log.finalized:
            tracks = [[_est_doc(p) for p in t.points] if t is not None else None
                      for t in log.reconstructed]
            self._fh.write(_dump({"reconstructed": tracks}) + "\n")
        self._fh.close()
        self._fh = None
