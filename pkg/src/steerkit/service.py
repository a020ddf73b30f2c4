"""HTTP facade over the steering engine.

Sessions live in memory, one steering actor each: mutating endpoints take
the session's lock so configuration, retraining and history operations are
serialized per session, while dashboard and history reads go lock-free to
the last committed version. Event ingestion uses a separate lock so
telemetry never blocks steering. When a journal directory is configured,
saved versions, attempts and events append to one JSON-lines file per
session and sessions are restored from there at startup.

Every response carries the current ``version_id`` so clients can detect
staleness. Errors use a stable ``{code, message, detail}`` payload.

Environment: EXMOS_DATA (training CSV), EXMOS_META (feature sidecar JSON),
EXMOS_PORT, EXMOS_SEED, and optional EXMOS_JOURNAL_DIR for persistence.
"""
from __future__ import annotations

import os
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .analytics import InteractionEvent, build_usage_summary, render_summary_table
from .dataset import DataTable, SplitSpec, load_csv, load_meta
from .errors import (
    NotCorrectable,
    NothingToCorrect,
    NothingUnsaved,
    SteerkitError,
    UnknownVersion,
)
from .explain import VARIANTS
from .forest import ForestParams
from .quality import IssueKind
from .steering import AutoConfig, ManualConfig, SteeringSession

NOT_FOUND_CODES = ("unknown_version", "unknown_session")
CONFLICT_TYPES = (NothingUnsaved, NothingToCorrect, NotCorrectable)


class UnknownSession(SteerkitError):
    code = "unknown_session"


class StaleTimestamp(SteerkitError):
    code = "stale_timestamp"


class SessionState:
    def __init__(self, steering: SteeringSession):
        self.steering = steering
        self.lock = threading.Lock()
        self.event_lock = threading.Lock()
        self.events: list[InteractionEvent] = []
        self.last_event_ts = float("-inf")

    def add_event(self, event: InteractionEvent) -> None:
        with self.event_lock:
            if event.timestamp < self.last_event_ts:
                raise StaleTimestamp(
                    f"event timestamp {event.timestamp} precedes the last one "
                    f"({self.last_event_ts}); timestamps must be monotone"
                )
            self.last_event_ts = event.timestamp
            self.events.append(event)
            self.steering.log_event(event.to_dict())


class CreateSessionRequest(BaseModel):
    variant: str


class ManualConfigRequest(BaseModel):
    included_features: list[str]
    ranges: dict[str, tuple[float, float]] = Field(default_factory=dict)


class AutoConfigRequest(BaseModel):
    selected_issues: list[str]
    seed: int = 42


class EventRequest(BaseModel):
    kind: str
    target: str
    duration_s: Optional[float] = None
    timestamp: Optional[float] = None
    attempt_id: Optional[int] = None


def create_app(
    data_path: Optional[str] = None,
    meta_path: Optional[str] = None,
    seed: Optional[int] = None,
    journal_dir: Optional[str] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    data_path = data_path or os.environ.get("EXMOS_DATA")
    meta_path = meta_path or os.environ.get("EXMOS_META")
    if seed is None:
        seed = int(os.environ.get("EXMOS_SEED", "42"))
    journal_dir = journal_dir or os.environ.get("EXMOS_JOURNAL_DIR")
    ui_dir = ui_dir or os.environ.get("EXMOS_UI_DIR")
    if not data_path or not meta_path:
        raise ValueError("data and meta paths are required (EXMOS_DATA / EXMOS_META)")

    baseline = load_csv(data_path, load_meta(meta_path))
    app = FastAPI(title="steerkit", docs_url=None, redoc_url=None)
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    app.state.baseline = baseline
    app.state.seed = seed
    app.state.journal_dir = Path(journal_dir) if journal_dir else None
    app.state.sessions: dict[str, SessionState] = {}

    if app.state.journal_dir is not None:
        app.state.journal_dir.mkdir(parents=True, exist_ok=True)
        _restore_sessions(app)

    @app.exception_handler(SteerkitError)
    async def handle_domain_error(request: Request, exc: SteerkitError):
        status = 400
        if exc.code in NOT_FOUND_CODES:
            status = 404
        elif isinstance(exc, CONFLICT_TYPES):
            status = 409
        return JSONResponse(status_code=status, content=exc.to_payload())

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_request", "message": str(exc), "detail": {}},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": "request body failed validation",
                "detail": {"errors": exc.errors()},
            },
        )

    def get_session(session_id: str) -> SessionState:
        state = app.state.sessions.get(session_id)
        if state is None:
            raise UnknownSession(f"no session {session_id!r}")
        return state

    def new_session(variant: str) -> tuple[str, SessionState]:
        session_id = uuid.uuid4().hex[:12]
        journal = (
            app.state.journal_dir / f"session-{session_id}.jsonl"
            if app.state.journal_dir
            else None
        )
        steering = SteeringSession(
            app.state.baseline,
            variant=variant,
            session_id=session_id,
            split=SplitSpec(seed=app.state.seed),
            forest=ForestParams(seed=app.state.seed),
            journal_path=journal,
        )
        state = SessionState(steering)
        app.state.sessions[session_id] = state
        return session_id, state

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(app.state.sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        if body.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {list(VARIANTS)}")
        session_id, state = new_session(body.variant)
        head = state.steering.head
        return {
            "session_id": session_id,
            "variant": body.variant,
            "version_id": head.version_id,
            "bundle": head.bundle.to_dict(),
        }

    @app.get("/sessions/{session_id}/dashboard")
    def get_dashboard(session_id: str):
        state = get_session(session_id)
        head = state.steering.head
        return {"version_id": head.version_id, "bundle": head.bundle.to_dict()}

    @app.post("/sessions/{session_id}/config/manual")
    def post_manual(session_id: str, body: ManualConfigRequest):
        state = get_session(session_id)
        config = ManualConfig(
            included_features=tuple(body.included_features),
            ranges={k: (v[0], v[1]) for k, v in body.ranges.items()},
        )
        with state.lock:
            preview, warning = state.steering.stage_manual(config)
            head = state.steering.head
            return {
                "version_id": head.version_id,
                "preview": {
                    "n_rows": preview.n_rows,
                    "n_predictors": len(preview.predictor_names),
                },
                "warning": warning.to_dict() if warning else None,
            }

    @app.post("/sessions/{session_id}/config/auto")
    def post_auto(session_id: str, body: AutoConfigRequest):
        state = get_session(session_id)
        config = AutoConfig(
            selected_issues=tuple(IssueKind(v) for v in body.selected_issues),
            seed=body.seed,
        )
        with state.lock:
            preview, outcomes = state.steering.stage_auto(config)
            head = state.steering.head
            return {
                "version_id": head.version_id,
                "preview": {
                    "n_rows": preview.n_rows,
                    "n_predictors": len(preview.predictor_names),
                },
                "outcomes": [o.to_dict() for o in outcomes],
            }

    @app.post("/sessions/{session_id}/retrain")
    def post_retrain(session_id: str):
        state = get_session(session_id)
        with state.lock:
            version = state.steering.retrain()
            return {
                "version_id": version.version_id,
                "version": version.summary(),
                "bundle": version.bundle.to_dict(),
            }

    @app.post("/sessions/{session_id}/save")
    def post_save(session_id: str):
        state = get_session(session_id)
        with state.lock:
            version = state.steering.save_version()
            return {"version_id": version.version_id, "version": version.summary()}

    @app.post("/sessions/{session_id}/discard")
    def post_discard(session_id: str):
        state = get_session(session_id)
        with state.lock:
            version = state.steering.discard_unsaved()
            return {"version_id": version.version_id, "version": version.summary()}

    @app.post("/sessions/{session_id}/revert/{version_id}")
    def post_revert(session_id: str, version_id: int):
        state = get_session(session_id)
        with state.lock:
            version = state.steering.revert_to(version_id)
            return {"version_id": version.version_id, "version": version.summary()}

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        state = get_session(session_id)
        head = state.steering.head
        return {
            "version_id": head.version_id,
            "history": [v.summary() for v in state.steering.history()],
        }

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: EventRequest):
        state = get_session(session_id)
        event = InteractionEvent(
            kind=body.kind,
            target=body.target,
            session_id=session_id,
            timestamp=body.timestamp if body.timestamp is not None else time.time(),
            duration_s=body.duration_s,
            attempt_id=body.attempt_id,
        )
        state.add_event(event)
        return {"version_id": state.steering.head.version_id, "accepted": True}

    @app.get("/analytics")
    def get_analytics(session_id: Optional[str] = None):
        if session_id is not None:
            states = [get_session(session_id)]
        else:
            states = list(app.state.sessions.values())
        events = [e for s in states for e in s.events]
        attempts = [a for s in states for a in s.steering.attempts]
        users = sorted({s.steering.session_id for s in states})
        summary = build_usage_summary(events, attempts, users)
        return {"summary": summary.to_dict(), "table": render_summary_table(summary)}

    return app


def _restore_sessions(app: FastAPI) -> None:
    from .steering import read_journal

    for path in sorted(app.state.journal_dir.glob("session-*.jsonl")):
        records = read_journal(path)
        meta = next((r for r in records if r.get("type") == "session"), None)
        if meta is None:
            continue
        steering = SteeringSession(
            app.state.baseline,
            variant=meta["variant"],
            session_id=meta["session_id"],
            split=SplitSpec(seed=app.state.seed),
            forest=ForestParams(seed=app.state.seed),
            journal_path=path,
        )
        state = SessionState(steering)
        for record in records:
            if record.get("type") == "event":
                event = InteractionEvent.from_dict(record)
                state.events.append(event)
                state.last_event_ts = max(state.last_event_ts, event.timestamp)
        app.state.sessions[meta["session_id"]] = state
