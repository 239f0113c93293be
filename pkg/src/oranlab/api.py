"""HTTP operator surface.

Every mutation path of the living lab is exposed under /v1 with a frozen
field naming contract; errors always carry the envelope
{"error": {"code", "message", "detail"}}. Live metrics go out over a
server-push event stream (one event per indication the RIC routed, in
routing order) with Last-Event-ID resume and drop-oldest buffering for
slow consumers.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .config import LabConfig, ServeConfig
from .errors import OranLabError, ParseError, ValidationError
from .inventory import NodeRole, list_nodes
from .lab import LivingLab
from .leases import LeaseError, LeaseState
from .provisioner import ProvisionError
from .ric import RicError, build_xapp
from .telemetry import SpectrumSample, TelemetryError, WeatherReading, export_csv

MAX_STREAM_LAG = 1024  # events a slow consumer may fall behind before drops


def catch_up_cursor(idx: int, total: int, dropped: int,
                    max_lag: int = MAX_STREAM_LAG) -> tuple[int, int]:
    """Drop-oldest for slow stream consumers: skip the cursor forward so
    at most max_lag events remain buffered, counting what was skipped."""
    lag = total - idx
    if lag > max_lag:
        dropped += lag - max_lag
        idx = total - max_lag
    return idx, dropped


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _envelope(code: str, message: str, detail=None) -> dict:
    return {"error": {"code": code, "message": message, "detail": detail}}


def _node_json(node) -> dict:
    pos = node.position
    position = (
        {"latitude": pos.latitude, "longitude": pos.longitude}
        if hasattr(pos, "latitude")
        else {"x": pos.x, "y": pos.y}
    )
    return {
        "node_id": node.node_id,
        "site_id": node.site_id,
        "role": node.role.value,
        "position": position,
        "radios": [
            {"model_class": r.model_class, "max_bandwidth": r.max_bandwidth,
             "freq_range": list(r.freq_range)}
            for r in node.radios
        ],
        "booster": (
            {"tx_gain": node.booster.tx_gain, "rx_gain": node.booster.rx_gain}
            if node.booster
            else None
        ),
        "mgmt_endpoint": node.mgmt_endpoint,
    }


def _site_json(site) -> dict:
    pos = site.position
    position = (
        {"latitude": pos.latitude, "longitude": pos.longitude}
        if hasattr(pos, "latitude")
        else {"x": pos.x, "y": pos.y}
    )
    return {"site_id": site.site_id, "name": site.name, "kind": site.kind.value,
            "position": position}


def create_app(lab: LivingLab, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="oranlab", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.lab = lab

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content=_envelope(exc.code, exc.message, exc.detail))

    @app.exception_handler(OranLabError)
    async def domain_error_handler(request: Request, exc: OranLabError):
        status = 404 if "unknown" in str(exc) else 400
        return JSONResponse(status_code=status,
                            content=_envelope(type(exc).__name__, str(exc)))

    def account_of(authorization: Optional[str] = Header(default=None)) -> Optional[str]:
        if authorization is None:
            return None
        if not authorization.startswith("Bearer "):
            raise ApiError(401, "bad_authorization", "expected 'Bearer <token>'")
        account = lab.account_for_token(authorization.removeprefix("Bearer "))
        if account is None:
            raise ApiError(401, "unknown_token", "token not recognized")
        return account

    def require_account(account: Optional[str] = Depends(account_of)) -> str:
        if account is None:
            raise ApiError(401, "auth_required", "this endpoint requires a bearer token")
        return account

    # -- inventory ------------------------------------------------------

    @app.get("/v1/nodes")
    def get_nodes(role: Optional[str] = None, site: Optional[str] = None):
        role_enum = None
        if role is not None:
            try:
                role_enum = NodeRole(role)
            except ValueError:
                raise ApiError(400, "bad_role", f"unknown role {role!r}")
        nodes = list_nodes(lab.inventory, role=role_enum, site_id=site)
        return {
            "sites": [_site_json(s) for s in lab.inventory.sites],
            "nodes": [_node_json(n) for n in nodes],
        }

    @app.get("/v1/coverage")
    def get_coverage():
        report = lab.coverage_report()
        return {
            "min_ues": report.min_ues,
            "entries": [
                {"bs_id": e.bs_id, "in_range_ues": list(e.in_range_ues), "flagged": e.flagged}
                for e in report.entries
            ],
            "flagged_bs_ids": report.flagged_bs_ids,
        }

    # -- leases -----------------------------------------------------------

    @app.post("/v1/leases", status_code=201)
    def post_lease(body: dict, account: str = Depends(require_account)):
        for field in ("node_ids", "spectrum", "interval"):
            if field not in body:
                raise ApiError(400, "missing_field", f"lease request needs {field!r}")
        try:
            lease = lab.request_lease(
                requester=account,
                node_ids=body["node_ids"],
                center_mhz=float(body["spectrum"]["center"]),
                bandwidth_mhz=float(body["spectrum"]["bandwidth"]),
                start=int(body["interval"][0]),
                end=int(body["interval"][1]),
                images=tuple(body.get("images", [])),
            )
        except LeaseError as exc:
            status = 404 if "unknown" in str(exc) else 400
            raise ApiError(status, "invalid_lease", str(exc))
        if lease.state is LeaseState.REJECTED:
            raise ApiError(409, "lease_conflict", "request conflicts with existing leases",
                           detail=lease.to_jsonable())
        return lease.to_jsonable()

    @app.get("/v1/leases")
    def get_leases():
        return {"leases": [l.to_jsonable() for l in lab.engine.list_leases()]}

    @app.delete("/v1/leases/{lease_id}")
    def delete_lease(lease_id: str, account: str = Depends(require_account)):
        return lab.terminate_lease(lease_id).to_jsonable()

    # -- images -----------------------------------------------------------

    @app.get("/v1/images")
    def get_images():
        return {
            "images": [
                {"name": n, "digest": lab.catalog.resolve_image(n).digest,
                 "role_tag": lab.catalog.resolve_image(n).role_tag}
                for n in lab.catalog.names()
            ]
        }

    # -- sessions -----------------------------------------------------------

    def _session_json(session_id: str) -> dict:
        status = lab.provisioner.session_status(session_id)
        session = lab.provisioner.get(session_id)
        if session.runtime is not None:
            status["attached_ues"] = session.runtime.attached_ue_count
            status["indications_routed"] = len(session.runtime.routed_events)
            status["timing"] = session.runtime.ric.timing_summary()
        return status

    @app.post("/v1/sessions", status_code=201)
    def post_session(body: dict, account: str = Depends(require_account)):
        for field in ("lease_id", "assignments"):
            if field not in body:
                raise ApiError(400, "missing_field", f"session launch needs {field!r}")
        session = lab.launch_session(body["lease_id"], dict(body["assignments"]))
        if not session.running:
            raise ApiError(409, "launch_failed", session.stop_cause,
                           detail=_session_json(session.session_id))
        return _session_json(session.session_id)

    @app.get("/v1/sessions")
    def get_sessions():
        return {"sessions": [_session_json(s.session_id) for s in lab.provisioner.list_sessions()]}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_json(session_id)

    @app.delete("/v1/sessions/{session_id}")
    def delete_session(session_id: str, account: str = Depends(require_account)):
        lab.stop_session(session_id)
        return _session_json(session_id)

    # -- RIC / xApps -----------------------------------------------------------

    def _xapp_json(desc) -> dict:
        return {
            "xapp_id": desc.xapp_id,
            "handler": type(desc.handler).__name__,
            "subscriptions": [
                {
                    "selector": selector,
                    "report_period_ms": spec.report_period_ms,
                    "metric_set": sorted(l.name for l in spec.metric_set),
                    "cell_filter": spec.cell_filter,
                }
                for selector, spec in desc.subscriptions
            ],
        }

    @app.get("/v1/ric/xapps")
    def get_xapps(session: Optional[str] = None):
        out = []
        for s in lab.provisioner.list_sessions():
            if session is not None and s.session_id != session:
                continue
            if s.runtime is None:
                continue
            for desc in s.runtime.ric.list_xapps():
                out.append({"session_id": s.session_id, **_xapp_json(desc)})
        return {"xapps": out}

    @app.post("/v1/ric/xapps", status_code=201)
    def post_xapp(body: dict, account: str = Depends(require_account)):
        if "session_id" not in body or "xapp" not in body:
            raise ApiError(400, "missing_field", "needs session_id and xapp declaration")
        runtime = lab.runtime(body["session_id"])
        desc = build_xapp(dict(body["xapp"]))
        result = runtime.ric.register_xapp(desc)
        return result

    # -- metrics -----------------------------------------------------------

    @app.get("/v1/metrics")
    def get_metrics(session: str = Query(...), after: int = 0):
        runtime = lab.runtime(session)
        events = runtime.routed_events[after:]
        return {"total": len(runtime.routed_events), "events": events}

    @app.get("/v1/metrics/live")
    def get_metrics_live(
        session: str = Query(...),
        last_event_id: Optional[str] = Header(default=None, alias="Last-Event-ID"),
    ):
        runtime = lab.runtime(session)

        def event_stream():
            idx = 0
            if last_event_id:
                try:
                    idx = int(last_event_id)
                except ValueError:
                    idx = 0
            dropped = 0
            last_beat = time.monotonic()
            while True:
                events = runtime.routed_events
                idx, dropped = catch_up_cursor(idx, len(events), dropped)
                if idx < len(events):
                    for event in events[idx:]:
                        payload = {**event, "dropped": dropped}
                        yield f"id: {event['event_id']}\nevent: indication\ndata: {json.dumps(payload)}\n\n"
                    idx = len(events)
                    last_beat = time.monotonic()
                else:
                    session_obj = lab.provisioner.get(session)
                    if not session_obj.running:
                        yield "event: end\ndata: {}\n\n"
                        return
                    time.sleep(0.05)
                    if time.monotonic() - last_beat > 2.0:
                        yield ": ping\n\n"
                        last_beat = time.monotonic()

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    # -- telemetry -----------------------------------------------------------

    @app.post("/v1/telemetry", status_code=201)
    def post_telemetry(body: dict, account: str = Depends(require_account)):
        kind = body.get("kind")
        try:
            if kind == "weather":
                record = WeatherReading(
                    int(body["t"]), body["site_id"], float(body["temperature_c"]),
                    float(body["wind_speed_ms"]), float(body["precipitation_mmh"]),
                    body.get("time_base", "virtual"),
                )
            elif kind == "spectrum":
                record = SpectrumSample(
                    int(body["t"]), body["node_id"], float(body["center_mhz"]),
                    float(body["bandwidth_mhz"]), float(body["power_dbm"]),
                    body.get("time_base", "virtual"),
                )
            else:
                raise ApiError(400, "bad_kind", "kind must be 'weather' or 'spectrum'")
        except KeyError as exc:
            raise ApiError(400, "missing_field", f"telemetry record needs {exc.args[0]!r}")
        return {"id": lab.telemetry.ingest(record), "kind": kind}

    @app.get("/v1/telemetry")
    def get_telemetry(
        kind: str = Query(...),
        selector: Optional[str] = None,
        start: Optional[int] = None,
        end: Optional[int] = None,
        format: str = "json",
    ):
        series = lab.telemetry.query(kind, selector, start, end)
        if format == "csv":
            return PlainTextResponse(export_csv(series), media_type="text/csv")
        return {"records": [vars(r) for r in series], "count": len(series)}

    # -- exports -----------------------------------------------------------

    @app.get("/v1/export/chart")
    def get_chart(session: str = Query(...)):
        return PlainTextResponse(lab.chart_export(session), media_type="text/csv")

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "virtual_now_ms": lab.clock.now}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


class Pacer(threading.Thread):
    """Wall-clock adapter: advances virtual time for interactive demos.

    Never part of correctness logic; tests drive lab.advance directly.
    """

    def __init__(self, lab: LivingLab, virtual_ms_per_s: int, wall_interval_s: float = 0.1):
        super().__init__(daemon=True)
        self.lab = lab
        self.wall_interval_s = wall_interval_s
        tick = lab.config.tick_ms
        per_interval = int(virtual_ms_per_s * wall_interval_s)
        self.step_ms = max(tick, per_interval - per_interval % tick)
        self._stop = threading.Event()

    def run(self):
        while not self._stop.wait(self.wall_interval_s):
            self.lab.advance(self.step_ms)

    def stop(self):
        self._stop.set()


def default_ui_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def check_port_free(host: str, port: int):
    """Fail fast (before uvicorn daemonizes logging) if the port is taken."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise ApiError(500, "bind_failed", f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()


def serve(cfg: ServeConfig, ui_dir: Optional[Path] = None):
    """Run the HTTP service until interrupted; raises on bind failure."""
    import uvicorn

    check_port_free(cfg.host, cfg.port)
    lab = LivingLab(cfg.lab)
    app = create_app(lab, ui_dir=ui_dir or default_ui_dir())
    pacer = Pacer(lab, cfg.pace_virtual_ms_per_s)
    pacer.start()
    try:
        uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    finally:
        pacer.stop()
