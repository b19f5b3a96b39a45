"""HTTP front-end for the station: REST commands plus an NDJSON telemetry feed.

Command endpoints return the station acknowledgment document verbatim; a
failed command maps its machine-readable error code to an HTTP status so
plain REST clients behave sensibly, while the body still carries the full
ack for programmatic callers.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .station import Station, StationError

_STATUS_BY_CODE = {
    "UnknownPlan": 404,
    "UnknownMission": 404,
    "UnknownCommand": 400,
    "MalformedMessage": 400,
    "UnknownFormat": 400,
    "ConfigError": 400,
    "InvalidState": 409,
    "ReconstructionMissing": 409,
    "ValidationFailed": 422,
}

_EXPORT_MEDIA = {
    "records": "text/plain",
    "track": "text/plain",
    "geotrack": "application/vnd.google-earth.kml+xml",
}


def _ack_or_raise(ack: dict) -> dict:
    if ack.get("ok"):
        return ack
    code = ack.get("error", {}).get("code", "InvalidState")
    raise HTTPException(status_code=_STATUS_BY_CODE.get(code, 400), detail=ack)


def create_app(station: Station, static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="seashark station", version="1")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.station = station

    @app.get("/status")
    def status() -> dict:
        return station.status()

    @app.post("/plans")
    def create_plan(payload: dict = Body(...)) -> dict:
        # accept either {"plan": {...}} or a bare plan document
        if "plan" not in payload:
            payload = {"plan": payload}
        return _ack_or_raise(station.submit("create_plan", payload))

    @app.post("/plans/{plan_id}/validate")
    def validate_plan(plan_id: str) -> dict:
        return _ack_or_raise(station.submit("validate", {"plan_id": plan_id}))

    @app.post("/missions")
    def launch(payload: dict = Body(...)) -> dict:
        return _ack_or_raise(station.submit("launch", payload))

    @app.post("/missions/{mission_id}/abort")
    def abort(mission_id: str) -> dict:
        return _ack_or_raise(station.submit("abort", {"mission_id": mission_id}))

    @app.post("/missions/{mission_id}/loiter")
    def loiter(mission_id: str) -> dict:
        return _ack_or_raise(station.submit("loiter", {"mission_id": mission_id}))

    @app.post("/backseat")
    def backseat(payload: dict = Body(...)) -> dict:
        return _ack_or_raise(station.submit("backseat", payload))

    @app.post("/config")
    def set_config(payload: dict = Body(...)) -> dict:
        return _ack_or_raise(station.submit("set_config", payload))

    @app.get("/missions")
    def list_missions() -> list:
        return station.list_missions()

    @app.get("/missions/{mission_id}/log", response_class=PlainTextResponse)
    def get_log(mission_id: str) -> str:
        try:
            return station.get_log_text(mission_id)
        except StationError as err:
            raise _query_error(err)

    @app.get("/missions/{mission_id}/quickview")
    def quickview(mission_id: str, t: float = Query(...)) -> dict:
        try:
            return station.quickview(mission_id, t)
        except StationError as err:
            raise _query_error(err)

    @app.get("/missions/{mission_id}/export")
    def export_mission(mission_id: str, format: str = Query("track")) -> Response:
        try:
            text = station.export_mission(mission_id, format)
        except StationError as err:
            raise _query_error(err)
        return Response(content=text,
                        media_type=_EXPORT_MEDIA.get(format, "text/plain"))

    @app.get("/telemetry")
    def telemetry(limit: Optional[int] = Query(None, gt=0)) -> StreamingResponse:
        """NDJSON frame stream; endless unless `limit` frames are requested."""
        def lines():
            sub = station.hub.subscribe()
            sent = 0
            try:
                while limit is None or sent < limit:
                    doc = sub.get(timeout=1.0)
                    if doc is None:
                        if sub.closed:
                            return
                        yield json.dumps({"keepalive": True}) + "\n"
                    else:
                        sent += 1
                        yield json.dumps(doc, sort_keys=True) + "\n"
            finally:
                sub.close()
        return StreamingResponse(lines(), media_type="application/x-ndjson")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="frontend")

    return app


def _query_error(err: StationError) -> HTTPException:
    return HTTPException(status_code=_STATUS_BY_CODE.get(err.code, 400),
                         detail={"error": err.doc()})
