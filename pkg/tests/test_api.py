"""HTTP contract: endpoint paths, status codes, and the telemetry stream."""

import json

import pytest
from fastapi.testclient import TestClient

from seashark.api import create_app
from seashark.config import load_config
from seashark.executor import ExecPhase
from seashark.station import Station


@pytest.fixture
def station():
    return Station(load_config(scenario="flat"))


@pytest.fixture
def client(station):
    return TestClient(create_app(station))


def line_doc(timeout=10.0, lead_in=0.0):
    from seashark.geodesy import GeoPoint
    from seashark.mission_plan import DepthMode, DepthRef, plan_line, plan_to_document
    return plan_to_document(plan_line(GeoPoint(55.0, 12.0), 90.0, timeout,
                                      DepthRef(DepthMode.DEPTH, 5.0),
                                      lead_in=lead_in))


def fly(station, client, timeout=10.0):
    plan_id = client.post("/plans", json={"plan": line_doc(timeout)}) \
        .json()["result"]["plan_id"]
    mid = client.post("/missions", json={"plan_id": plan_id}) \
        .json()["result"]["mission_id"]
    while station.missions[mid].active:
        station.step()
    return mid


def test_plan_create_and_validate(client):
    resp = client.post("/plans", json={"plan": line_doc()})
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] and body["result"]["violations"] == []
    plan_id = body["result"]["plan_id"]

    resp = client.post(f"/plans/{plan_id}/validate")
    assert resp.status_code == 200
    assert resp.json()["result"]["violations"] == []


def test_bare_plan_document_accepted(client):
    resp = client.post("/plans", json=line_doc())
    assert resp.status_code == 200


def test_validate_unknown_plan_404(client):
    assert client.post("/plans/zzz/validate").status_code == 404


def test_launch_and_status(station, client):
    plan_id = client.post("/plans", json={"plan": line_doc()}) \
        .json()["result"]["plan_id"]
    resp = client.post("/missions", json={"plan_id": plan_id})
    assert resp.status_code == 200
    mid = resp.json()["result"]["mission_id"]

    status = client.get("/status").json()
    assert status["mission_id"] == mid
    assert status["scenario"] == "flat"

    # second launch while running: 409 with the ack in the detail
    resp = client.post("/missions", json={"plan_id": plan_id})
    assert resp.status_code == 409
    assert resp.json()["detail"]["error"]["code"] == "InvalidState"


def test_launch_invalid_plan_422(station, client):
    doc = line_doc()
    doc["depth_ref"]["value_m"] = 50.0
    plan_id = client.post("/plans", json={"plan": doc}).json()["result"]["plan_id"]
    resp = client.post("/missions", json={"plan_id": plan_id})
    assert resp.status_code == 422


def test_abort_endpoint(station, client):
    plan_id = client.post("/plans", json={"plan": line_doc(timeout=60.0)}) \
        .json()["result"]["plan_id"]
    mid = client.post("/missions", json={"plan_id": plan_id}) \
        .json()["result"]["mission_id"]
    for _ in range(200):
        station.step()
    assert client.post(f"/missions/{mid}/abort").status_code == 200
    while station.missions[mid].active:
        station.step()
    assert station.missions[mid].exec_state.phase is ExecPhase.ABORTED
    # aborting again: mission no longer active
    assert client.post(f"/missions/{mid}/abort").status_code == 409


def test_backseat_endpoint(station, client):
    plan_id = client.post("/plans", json={"plan": line_doc(timeout=60.0)}) \
        .json()["result"]["plan_id"]
    client.post("/missions", json={"plan_id": plan_id})
    for _ in range(200):
        station.step()
    resp = client.post("/backseat", json={"session": "s", "timestamp": 0.0,
                                          "heading_deg": 120.0})
    assert resp.status_code == 200
    station.step()
    assert station.runner.last_applied.heading == 120.0

    resp = client.post("/backseat", json={"session": "s", "timestamp": 0.0})
    assert resp.status_code == 400


def test_mission_list_log_quickview_export(station, client):
    mid = fly(station, client)
    missions = client.get("/missions").json()
    assert [m["mission_id"] for m in missions] == [mid]
    assert missions[0]["finalized"]

    log_text = client.get(f"/missions/{mid}/log").text
    assert log_text == station.get_log_text(mid)

    qv = client.get(f"/missions/{mid}/quickview", params={"t": 2.0}).json()
    assert qv == station.quickview(mid, 2.0)

    track = client.get(f"/missions/{mid}/export", params={"format": "track"})
    assert track.status_code == 200
    assert track.headers["content-type"].startswith("text/plain")
    kml = client.get(f"/missions/{mid}/export", params={"format": "geotrack"})
    assert "kml" in kml.headers["content-type"]

    assert client.get("/missions/none/log").status_code == 404
    assert client.get(f"/missions/{mid}/export",
                      params={"format": "shapefile"}).status_code == 400


def test_export_mid_mission_409(station, client):
    plan_id = client.post("/plans", json={"plan": line_doc(timeout=60.0)}) \
        .json()["result"]["plan_id"]
    mid = client.post("/missions", json={"plan_id": plan_id}) \
        .json()["result"]["mission_id"]
    for _ in range(100):
        station.step()
    resp = client.get(f"/missions/{mid}/export", params={"format": "track"})
    assert resp.status_code == 409
    assert resp.json()["detail"]["error"]["code"] == "ReconstructionMissing"


def test_config_endpoint(station, client):
    resp = client.post("/config", json={"decimation": 3})
    assert resp.status_code == 200
    assert station.settings.decimation == 3
    assert client.post("/config", json={"nope": 1}).status_code == 400


def test_telemetry_stream_ndjson(station, client):
    # the test client buffers whole responses, so bound the stream and let
    # the real paced loop feed it in the background
    plan_id = client.post("/plans", json={"plan": line_doc(timeout=30.0,
                                                           lead_in=5.0)}) \
        .json()["result"]["plan_id"]
    mid = client.post("/missions", json={"plan_id": plan_id}) \
        .json()["result"]["mission_id"]
    client.post("/config", json={"time_scale": 50.0})

    station.start()
    try:
        resp = client.get("/telemetry", params={"limit": 120})
    finally:
        station.stop()
    assert resp.headers["content-type"].startswith("application/x-ndjson")
    docs = [json.loads(line) for line in resp.text.splitlines()]
    docs = [d for d in docs if "keepalive" not in d]
    assert len(docs) == 120
    assert all(d["mission_id"] == mid for d in docs)

    surface = [d for d in docs if d["connection"] == "surface"]
    submerged = [d for d in docs if d["connection"] == "submerged"]
    assert surface and submerged  # lead-in on the surface, then the dive
    assert all("frame" in d and d["frame"]["gnss"] is not None for d in surface)
    assert all("frame" not in d and "estimate" not in d for d in submerged)
    seqs = [d["seq"] for d in docs]
    assert seqs == sorted(seqs)
