"""HTTP API over the gateway service (see docs/gateway-api.md)."""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..controlsim import apply_op
from ..knowledge import EmptyBody
from ..tools import AlreadyResolved, UnknownPendingWrite
from .service import GatewayService, UnknownSession


class CreateSessionRequest(BaseModel):
    task: str
    show_cot: bool = False
    auto_approve: bool = False


class ResolveWriteRequest(BaseModel):
    decision: str  # "approve" | "reject"


class LogbookPostRequest(BaseModel):
    title: str
    body: str
    author: str = ""
    tags: list[str] = []


class RelayReplyRequest(BaseModel):
    query_id: str
    text: str


def create_app(service: GatewayService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ops-agent gateway", version="0.1.0")
    runtime = service.runtime

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest):
        state = service.create_session(
            request.task, show_cot=request.show_cot, auto_approve=request.auto_approve
        )
        return state.summary()

    @app.get("/sessions")
    def list_sessions():
        return service.list_sessions()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            state = service.get_session(session_id)
        except UnknownSession:
            raise HTTPException(404, f"unknown session {session_id}")
        events = state.events if state.show_cot else [
            e for e in state.events if e["type"] in ("status", "approval_request", "final_answer")
        ]
        return {**state.summary(), "events": events}

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str):
        try:
            service.get_session(session_id)
        except UnknownSession:
            raise HTTPException(404, f"unknown session {session_id}")

        def sse():
            for event in service.subscribe(session_id):
                yield f"data: {json.dumps(event, ensure_ascii=False)}\n\n"
            yield "event: end\ndata: {}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/writes")
    def pending_writes():
        return [w.to_dict() for w in service.pending_writes()]

    @app.post("/writes/{pending_id}/resolve")
    def resolve_write(pending_id: str, request: ResolveWriteRequest):
        if request.decision not in ("approve", "reject"):
            raise HTTPException(422, "decision must be 'approve' or 'reject'")
        try:
            pending = service.resolve_write(pending_id, request.decision == "approve")
        except UnknownPendingWrite:
            raise HTTPException(404, f"unknown pending write {pending_id}")
        except AlreadyResolved as exc:
            raise HTTPException(409, str(exc))
        return pending.to_dict()

    @app.get("/machine/snapshot")
    def machine_snapshot():
        return service.snapshot()

    @app.post("/machine/op")
    def machine_op(body: dict):
        return apply_op(runtime.sim, body)

    @app.get("/logbook")
    def logbook_search(q: str = "", k: int = 10, since: float | None = None):
        if not q:
            entries = runtime.logbook.entries()[-k:]
            return [e.to_dict() for e in reversed(entries)]
        hits = runtime.logbook.search(q, k=k, since=since)
        return [
            {**runtime.logbook.get(h.ref).to_dict(), "score": h.score}
            for h in hits
        ]

    @app.post("/logbook")
    def logbook_post(request: LogbookPostRequest):
        try:
            entry_id = runtime.logbook.post(
                title=request.title, body=request.body,
                author=request.author, tags=tuple(request.tags),
            )
        except EmptyBody as exc:
            raise HTTPException(422, str(exc))
        return {"id": entry_id}

    @app.post("/relay/reply")
    def relay_reply(request: RelayReplyRequest):
        try:
            accepted = runtime.relay.deliver_reply(request.query_id, request.text)
        except KeyError:
            raise HTTPException(404, f"unknown query {request.query_id}")
        return {"accepted": accepted}

    if ui_dir and Path(ui_dir).is_dir():
        ui_path = Path(ui_dir)

        @app.get("/ui")
        def ui_index():
            return FileResponse(ui_path / "index.html")

        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app
