"""HTTP session service: models are read once at startup, sessions live in
memory, every response is a pure function of session state and request."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import LdekitError, UnknownTriggerError, WrongScreenError
from ..graph_core import GraphModel, has_errors, load_model, model_to_json_value
from ..registry import validate_model
from .schemas import (
    ClickLogEntry,
    ClickRequest,
    ClickResponse,
    ConfigurationOut,
    FireLogEntry,
    FireRequest,
    FireResponse,
    GameStateOut,
    IssueOut,
    ModelInfo,
    SessionLog,
    SessionOut,
    SimulationEventOut,
)
from .sessions import Session, SessionStore


def load_model_dir(model_dir: Path) -> dict[str, GraphModel]:
    """Every parseable *.json model in the directory, keyed by model id."""
    models: dict[str, GraphModel] = {}
    for path in sorted(model_dir.glob("*.json")):
        try:
            model = load_model(path.read_bytes())
        except LdekitError:
            continue
        models[model.id] = model
    return models


def _session_out(session: Session) -> SessionOut:
    out = SessionOut(sessionId=session.session_id, modelId=session.model_id,
                     kind=session.kind)
    if session.kind == "statechart":
        out.configuration = ConfigurationOut.from_configuration(
            session.configuration)
    else:
        out.state = GameStateOut.from_state(session.game_state)
    return out


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


def create_app(model_dir: Path | str, ui_dir: Path | str | None = None
               ) -> FastAPI:
    model_dir = Path(model_dir)
    app = FastAPI(title="ldekit session service", version="0.1.0")
    models = load_model_dir(model_dir)
    store = SessionStore()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed request body: {exc.errors()[:1]}")

    @app.get("/api/models", response_model=list[ModelInfo])
    def list_models():
        return [ModelInfo(id=m.id, modelType=m.model_type)
                for m in sorted(models.values(), key=lambda m: m.id)]

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        model = models.get(model_id)
        if model is None:
            return _error(404, f"unknown model {model_id!r}")
        return JSONResponse(content=model_to_json_value(model))

    def _create_session(kind: str, model_id: str):
        model = models.get(model_id)
        if model is None or model.model_type != kind:
            return _error(404, f"unknown {kind} model {model_id!r}")
        issues = validate_model(model)
        if has_errors(issues):
            payload = [IssueOut(severity=i.severity, ruleId=i.rule_id,
                                message=i.message,
                                elementId=i.element_id).model_dump()
                       for i in issues if i.severity == "error"]
            return JSONResponse(status_code=400, content={
                "detail": "model does not validate", "issues": payload})
        session = (store.create_statechart(model) if kind == "statechart"
                   else store.create_webstory(model))
        return JSONResponse(
            status_code=201,
            content=_session_out(session).model_dump(exclude_none=True))

    @app.post("/api/statechart/{model_id}/sessions", status_code=201,
              response_model=SessionOut, response_model_exclude_none=True)
    def create_statechart_session(model_id: str):
        return _create_session("statechart", model_id)

    @app.post("/api/webstory/{model_id}/sessions", status_code=201,
              response_model=SessionOut, response_model_exclude_none=True)
    def create_webstory_session(model_id: str):
        return _create_session("webstory", model_id)

    @app.get("/api/sessions/{session_id}", response_model=SessionOut,
             response_model_exclude_none=True)
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        return _session_out(session)

    @app.post("/api/sessions/{session_id}/fire", response_model=FireResponse)
    def fire(session_id: str, body: FireRequest):
        session = store.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        if session.kind != "statechart":
            return _error(400, "fire is only valid on statechart sessions")
        if session.configuration.terminated:
            return _error(409, "the chart has terminated")
        try:
            config, event = store.fire(session, body.trigger)
        except UnknownTriggerError as exc:
            return _error(400, str(exc))
        return FireResponse(
            sessionId=session.session_id,
            configuration=ConfigurationOut.from_configuration(config),
            event=SimulationEventOut.from_event(event))

    @app.post("/api/sessions/{session_id}/click", response_model=ClickResponse)
    def click(session_id: str, body: ClickRequest):
        session = store.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        if session.kind != "webstory":
            return _error(400, "click is only valid on webstory sessions")
        try:
            state = store.click(session, body.clickArea)
        except WrongScreenError as exc:
            return _error(400, str(exc))
        return ClickResponse(sessionId=session.session_id,
                             state=GameStateOut.from_state(state))

    @app.get("/api/sessions/{session_id}/log", response_model=SessionLog)
    def get_log(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        entries = []
        for entry in list(session.event_log):
            if entry[0] == "fire":
                _, event, config = entry
                entries.append(FireLogEntry(
                    event=SimulationEventOut.from_event(event),
                    configuration=ConfigurationOut.from_configuration(config)))
            else:
                _, area, state = entry
                entries.append(ClickLogEntry(
                    clickArea=area, state=GameStateOut.from_state(state)))
        return SessionLog(sessionId=session.session_id, kind=session.kind,
                          events=entries)

    # background images and other raw files next to the models
    app.mount("/assets", StaticFiles(directory=model_dir), name="assets")
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return {"service": "ldekit", "models": sorted(models)}

    return app
