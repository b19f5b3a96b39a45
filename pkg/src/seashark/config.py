"""Station configuration: a YAML file merged over a scenario's defaults.

The file is entirely optional; every section is optional; unknown keys are
rejected so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Union

import yaml

from .autonomy import EventRule
from .control import ControllerGains, PidGains
from .envsim import BathymetryGrid, Environment, UniformCurrent, VehicleLimits, VehicleState
from .executor import ExecutorConfig
from .geodesy import GeoPoint
from .mission_plan import MissionPlan
from .runner import RunnerConfig
from .scenarios import Scenario, build_scenario


@dataclass(frozen=True)
class StationSettings:
    host: str = "127.0.0.1"
    port: int = 8000
    time_scale: float = 1.0     # 10 = ten simulated seconds per wall second
    decimation: int = 1         # publish every Nth telemetry frame
    omniscient_link: bool = False  # debug: stream position even submerged


@dataclass(frozen=True)
class AppConfig:
    runner: RunnerConfig
    station: StationSettings
    env: Environment
    start: VehicleState
    plans: dict[str, MissionPlan]
    rules: list[EventRule]
    scenario: str


class ConfigError(ValueError):
    """Unusable configuration file."""


def _section(doc: dict, name: str) -> dict:
    sub = doc.get(name, {})
    if sub is None:
        return {}
    if not isinstance(sub, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(sub)


def _build(cls, doc: dict, what: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} keys: {sorted(unknown)}")
    return cls(**doc)


def _point(doc: dict, what: str) -> GeoPoint:
    try:
        return GeoPoint(float(doc["lat"]), float(doc["lon"]))
    except KeyError as err:
        raise ConfigError(f"{what} needs lat and lon") from err


def _merge_environment(env: Environment, doc: dict) -> Environment:
    doc = dict(doc)
    if "bathymetry_file" in doc:
        env = replace(env, bathymetry=BathymetryGrid.from_text(
            Path(doc.pop("bathymetry_file")).read_text()))
    elif "seabed_depth" in doc:
        origin = (_point(doc.pop("origin"), "environment.origin")
                  if "origin" in doc else GeoPoint(55.0, 12.0))
        env = replace(env, bathymetry=BathymetryGrid.uniform(
            origin, float(doc.pop("seabed_depth"))))
    if "current" in doc:
        cur = doc.pop("current") or {}
        env = replace(env, current=UniformCurrent(
            east=float(cur.get("east", 0.0)), north=float(cur.get("north", 0.0))))
    scalar_keys = ("compass_bias", "compass_noise_sigma", "depth_noise_sigma",
                   "altimeter_noise_sigma", "gnss_noise_sigma",
                   "surface_threshold", "altimeter_max_range", "photo_interval")
    unknown = set(doc) - set(scalar_keys)
    if unknown:
        raise ConfigError(f"unknown environment keys: {sorted(unknown)}")
    if doc:
        env = replace(env, **{k: float(v) for k, v in doc.items()})
    return env


def load_config(path: Optional[Union[str, Path]] = None,
                scenario: Optional[str] = None,
                time_scale: Optional[float] = None) -> AppConfig:
    """Assemble the full station configuration.

    Precedence: CLI arguments, then the YAML file, then the scenario's
    defaults (scenario `flat` if nothing names one).
    """
    doc = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text())
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config top level must be a mapping")
        doc = loaded

    known = {"scenario", "sim", "vehicle", "gains", "environment", "executor",
             "safety", "station", "start"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    scenario_name = scenario or doc.get("scenario") or "flat"
    base: Scenario = build_scenario(scenario_name)

    sim = _section(doc, "sim")
    safety = _section(doc, "safety")
    limits = _build(VehicleLimits, _section(doc, "vehicle"), "vehicle")
    gains_doc = _section(doc, "gains")
    gains = ControllerGains(
        heading=_build(PidGains, gains_doc.get("heading", {}), "gains.heading")
        if gains_doc.get("heading") else ControllerGains().heading,
        vertical=_build(PidGains, gains_doc.get("vertical", {}), "gains.vertical")
        if gains_doc.get("vertical") else ControllerGains().vertical,
    )
    executor_cfg = _build(ExecutorConfig, _section(doc, "executor"), "executor")

    runner_doc = {**sim, **safety}
    allowed = {"dt", "seed", "stale_timeout", "max_depth", "field_mode"}
    unknown = set(runner_doc) - allowed
    if unknown:
        raise ConfigError(f"unknown sim/safety keys: {sorted(unknown)}")
    runner = RunnerConfig(limits=limits, gains=gains, executor=executor_cfg,
                          **runner_doc)

    env = _merge_environment(base.env, _section(doc, "environment"))

    start = base.start
    start_doc = _section(doc, "start")
    if start_doc:
        heading = float(start_doc.pop("heading", start.heading))
        point = _point(start_doc, "start") if start_doc else start.position
        start = replace(start, position=point, heading=heading)

    station = _build(StationSettings, _section(doc, "station"), "station")
    if time_scale is not None:
        station = replace(station, time_scale=time_scale)

    return AppConfig(runner=runner, station=station, env=env, start=start,
                     plans=dict(base.plans), rules=list(base.rules),
                     scenario=scenario_name)
