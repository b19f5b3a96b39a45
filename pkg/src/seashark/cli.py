"""Command-line entry point for the station service.

Serves the HTTP API by default; with --headless it runs the paced
simulation loop alone, optionally auto-launching one of the scenario's
plans, which is handy for scripted demos and smoke tests.
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path
from typing import Optional

from .api import create_app
from .config import load_config
from .station import Station

log = logging.getLogger("seashark.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seashark-station",
        description="desk-scale AUV control station and simulator",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="YAML configuration file")
    parser.add_argument("--scenario", default=None,
                        help="pre-canned environment (flat, shore, wall, ghostnet)")
    parser.add_argument("--time-scale", type=float, default=None,
                        help="simulated seconds per wall second")
    parser.add_argument("--headless", action="store_true",
                        help="run the simulation loop without the HTTP API")
    parser.add_argument("--launch", metavar="PLAN_ID", default=None,
                        help="launch this scenario plan at startup")
    parser.add_argument("--duration", type=float, default=None,
                        help="headless: stop after this many simulated seconds")
    parser.add_argument("--log-dir", type=Path, default=None,
                        help="stream mission logs into this directory")
    parser.add_argument("--frontend", type=Path, default=None,
                        help="serve a built UI from this directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _run_headless(station: Station, duration: Optional[float]) -> None:
    station.start()
    last_phase = None
    try:
        while True:
            time.sleep(0.2)
            phase = station.runner.phase()
            if phase is not last_phase:
                log.info("t=%8.1f  phase %s", station.runner.state.sim_time,
                         phase.value)
                last_phase = phase
            if duration is not None and station.runner.state.sim_time >= duration:
                return
    except KeyboardInterrupt:
        log.info("interrupted")
    finally:
        station.stop()


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
    )

    cfg = load_config(args.config, scenario=args.scenario,
                      time_scale=args.time_scale)
    station = Station(cfg, log_dir=args.log_dir)
    log.info("scenario %s, %d plan(s), time scale x%g", cfg.scenario,
             len(cfg.plans), cfg.station.time_scale)

    if args.launch is not None:
        ack = station.submit("launch", {"plan_id": args.launch})
        if not ack["ok"]:
            log.error("launch failed: %s", ack["error"])
            return 1
        log.info("launched mission %s", ack["result"]["mission_id"])

    if args.headless:
        _run_headless(station, args.duration)
        for m in station.list_missions():
            log.info("mission %s: %s, %d records", m["mission_id"], m["phase"],
                     m["records"])
        return 0

    import uvicorn

    app = create_app(station, static_dir=args.frontend)
    station.start()
    try:
        uvicorn.run(app, host=cfg.station.host, port=cfg.station.port,
                    log_level="warning")
    finally:
        station.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
