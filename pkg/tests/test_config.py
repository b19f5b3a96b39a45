"""Configuration loading: defaults, overrides, and typo rejection."""

import pytest

from seashark.config import ConfigError, load_config
from seashark.envsim import UniformCurrent


def test_defaults_without_file():
    cfg = load_config()
    assert cfg.scenario == "flat"
    assert cfg.runner.dt == 0.1
    assert cfg.station.port == 8000
    assert cfg.station.time_scale == 1.0
    assert "survey" in cfg.plans


def test_full_file_round_trip(tmp_path):
    text = """
scenario: flat
sim: {dt: 0.05, seed: 7}
vehicle: {max_speed: 2.0}
gains:
  heading: {kp: 1.5, ki: 0.0, kd: 0.2, integrator_limit: 40}
environment:
  seabed_depth: 12
  origin: {lat: 54.5, lon: 11.5}
  current: {east: 0.1, north: -0.05}
  compass_noise_sigma: 0.5
executor: {arrival_radius: 3.0}
safety: {stale_timeout: 8.0, max_depth: 25.0, field_mode: true}
station: {port: 9001, time_scale: 20, omniscient_link: true}
start: {lat: 54.5, lon: 11.5, heading: 45}
"""
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.runner.dt == 0.05
    assert cfg.runner.seed == 7
    assert cfg.runner.limits.max_speed == 2.0
    assert cfg.runner.gains.heading.kp == 1.5
    assert cfg.runner.gains.vertical.kp == 0.5  # untouched default
    assert cfg.runner.executor.arrival_radius == 3.0
    assert cfg.runner.stale_timeout == 8.0
    assert cfg.runner.field_mode is True
    assert cfg.env.compass_noise_sigma == 0.5
    assert cfg.env.current == UniformCurrent(east=0.1, north=-0.05)
    assert cfg.env.bathymetry.depth_at(cfg.start.position) == pytest.approx(12.0)
    assert cfg.station.port == 9001
    assert cfg.station.omniscient_link is True
    assert cfg.start.heading == 45


def test_cli_arguments_win(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("scenario: flat\nstation: {time_scale: 5}\n")
    cfg = load_config(path, scenario="shore", time_scale=50.0)
    assert cfg.scenario == "shore"
    assert cfg.station.time_scale == 50.0


def test_scenario_plans_survive_overrides(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("scenario: ghostnet\nenvironment: {compass_noise_sigma: 0.2}\n")
    cfg = load_config(path)
    assert set(cfg.plans) == {"search", "inspect"}
    assert len(cfg.rules) == 1
    assert cfg.env.detection_region is not None  # scenario env carried over


@pytest.mark.parametrize("text", [
    "unknown_section: {}",
    "sim: {tick: 0.1}",
    "vehicle: {max_sped: 2}",
    "environment: {seabed: 10}",
    "station: {prot: 1}",
    "gains: {heading: {kp: 1, ki: 0, kd: 0, windup: 3}}",
    "- a\n- b",
])
def test_typos_fail_loudly(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_empty_file_is_fine(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config(path).scenario == "flat"
