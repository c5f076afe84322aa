"""Local HTTP API for live audit sessions.

Endpoints (JSON in, JSON out):

    POST /sessions                       create a session from a config body
    GET  /sessions/{id}                  status report
    POST /sessions/{id}/draw             the pending selection (idempotent)
    POST /sessions/{id}/interpretations  {"sequence": k, "values": {...}}
    POST /sessions/{id}/escalate         abandon sampling, keep the trail

Session files under the store directory are the only persistence; every
request reloads from disk, so the server can be killed and restarted at any
point without losing or corrupting a session.
"""

from __future__ import annotations

import os
import threading
from collections import defaultdict

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    AuditError,
    Exhausted,
    InvalidConfig,
    OutOfRange,
    SessionClosed,
    StaleSequence,
)
from .session import AuditSession, SessionConfig

_STATUS = {
    InvalidConfig: 400,
    OutOfRange: 400,
    StaleSequence: 409,
    SessionClosed: 409,
    Exhausted: 409,
}


class SessionStore:
    """One directory of session files; one writer per session at a time."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._guard = threading.Lock()

    def _path(self, session_id: str) -> str:
        safe = "".join(ch for ch in session_id if ch.isalnum() or ch in "-_")
        if safe != session_id or not safe:
            raise InvalidConfig(f"bad session id {session_id!r}")
        return os.path.join(self.root, f"{safe}.json")

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks[session_id]

    def create(self, config_wire: dict) -> AuditSession:
        session = AuditSession(SessionConfig.from_wire(config_wire))
        session.save(self._path(session.session_id))
        return session

    def load(self, session_id: str) -> AuditSession:
        path = self._path(session_id)
        if not os.path.exists(path):
            raise KeyError(session_id)
        return AuditSession.load(path)

    def save(self, session: AuditSession) -> None:
        session.save(self._path(session.session_id))


def create_app(store_dir: str, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="audit-service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(store_dir)
    app.state.store = store

    @app.exception_handler(AuditError)
    async def _audit_error(_req: Request, exc: AuditError):
        return JSONResponse(
            status_code=_STATUS.get(type(exc), 400), content={"detail": str(exc)}
        )

    @app.post("/sessions")
    def create_session(config: dict):
        session = store.create(config)
        return session.status_report()

    def _with_session(session_id: str):
        try:
            return store.load(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        return _with_session(session_id).status_report()

    @app.post("/sessions/{session_id}/draw")
    def next_draw(session_id: str):
        with store.lock(session_id):
            return _with_session(session_id).next_draw()

    @app.post("/sessions/{session_id}/interpretations")
    def record_interpretation(session_id: str, body: dict):
        if "sequence" not in body or "values" not in body:
            raise HTTPException(status_code=400, detail="need sequence and values")
        with store.lock(session_id):
            session = _with_session(session_id)
            report = session.record_interpretation(
                int(body["sequence"]), dict(body["values"])
            )
            store.save(session)
            return report

    @app.post("/sessions/{session_id}/escalate")
    def escalate(session_id: str):
        with store.lock(session_id):
            session = _with_session(session_id)
            report = session.escalate()
            store.save(session)
            return report

    if ui_dir and os.path.isdir(ui_dir):
        # mounted last so the API routes above keep precedence; index.html
        # loads its modules from ./dist relative to the same root
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
