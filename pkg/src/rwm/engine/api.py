"""HTTP face of the engine, consumed by the CLI's serve command and the
web console.

Reads are served from immutable snapshots; decision submissions and
advance requests serialize per project. The transcript endpoint streams
the project event log as server-sent events with the sequence number as
the event id, so a dropped client resumes from Last-Event-ID without
losing or duplicating events.
"""
from __future__ import annotations

import asyncio
import json
import threading
from typing import Any

from fastapi import FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from ..errors import DecisionError, EngineError, RwmError
from ..worldmodel import run_query
from .engine import Engine
from .project import ProjectState

SSE_POLL_INTERVAL_S = 0.2


class DecisionBody(BaseModel):
    kind: str
    option: str
    actor: str = "console"


class EngineHub:
    """Loads project state on demand and serializes mutations per project."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self._locks: dict[str, threading.Lock] = {}
        self._states: dict[str, ProjectState] = {}
        self._hub_lock = threading.Lock()

    def lock_for(self, project_id: str) -> threading.Lock:
        with self._hub_lock:
            return self._locks.setdefault(project_id, threading.Lock())

    def state(self, project_id: str) -> ProjectState:
        with self._hub_lock:
            if project_id not in self._states:
                if not self.engine.store.exists(project_id):
                    raise HTTPException(status_code=404, detail=f"no project {project_id}")
                self._states[project_id] = self.engine.resume(project_id)
            return self._states[project_id]


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="rwm engine")
    hub = EngineHub(engine)
    app.state.hub = hub

    @app.get("/projects")
    def list_projects() -> list[dict[str, Any]]:
        summaries = []
        for project_id in engine.store.list_projects():
            state = hub.state(project_id)
            summaries.append({
                "id": project_id,
                "phase": state.phase.value,
                "pending_decisions": [d.kind for d in state.pending],
                "interest": state.interest,
            })
        return summaries

    @app.get("/projects/{project_id}/graph")
    def get_graph(project_id: str) -> dict[str, Any]:
        return engine.graph_payload(hub.state(project_id))

    @app.get("/projects/{project_id}/gaps")
    def get_gaps(project_id: str) -> list[dict[str, Any]]:
        return engine.gaps_payload(hub.state(project_id))

    @app.get("/projects/{project_id}/query")
    def get_query(project_id: str, pattern: str, request: Request) -> dict[str, Any]:
        state = hub.state(project_id)
        params = {k: v for k, v in request.query_params.items() if k != "pattern"}
        try:
            results = run_query(engine.model(state).snapshot(), pattern, **params)
        except RwmError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except KeyError as exc:
            raise HTTPException(status_code=422,
                                detail=f"missing query parameter {exc}") from exc
        return {"pattern": pattern, "params": params, "results": results}

    @app.get("/projects/{project_id}/decisions")
    def get_decisions(project_id: str) -> dict[str, Any]:
        state = hub.state(project_id)
        return {
            "pending": [d.to_dict() for d in state.pending],
            "resolved": list(state.decision_log),
        }

    @app.post("/projects/{project_id}/decisions")
    def post_decision(project_id: str, body: DecisionBody) -> dict[str, Any]:
        state = hub.state(project_id)
        with hub.lock_for(project_id):
            try:
                engine.submit_decision(state, body.kind, body.option, actor=body.actor)
            except DecisionError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"ok": True, "phase": state.phase.value,
                "pending": [d.kind for d in state.pending]}

    @app.post("/projects/{project_id}/advance")
    def post_advance(project_id: str) -> dict[str, Any]:
        state = hub.state(project_id)
        with hub.lock_for(project_id):
            try:
                engine.advance(state)
            except EngineError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except RwmError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"ok": True, "phase": state.phase.value,
                "pending": [d.kind for d in state.pending]}

    @app.get("/projects/{project_id}/status")
    def get_status(project_id: str) -> dict[str, Any]:
        state = hub.state(project_id)
        return {
            "id": project_id,
            "phase": state.phase.value,
            "phase_work_done": state.phase_work_done,
            "pending": [d.to_dict() for d in state.pending],
            "budget": state.budget.to_dict(),
            "records": sorted(state.records),
        }

    @app.get("/projects/{project_id}/transcript")
    async def get_transcript(
        project_id: str,
        request: Request,
        after: int = Query(default=0, ge=0),
        follow: bool = Query(default=False),
        last_event_id: str | None = Header(default=None),
    ) -> StreamingResponse:
        state = hub.state(project_id)
        log = engine.log(state)
        start_after = after
        if last_event_id:
            try:
                start_after = max(start_after, int(last_event_id))
            except ValueError:
                pass

        async def stream():
            cursor = start_after
            while True:
                for event in log.read_after(cursor):
                    cursor = event["seq"]
                    data = json.dumps(event, sort_keys=True)
                    yield f"id: {event['seq']}\nevent: {event['type']}\ndata: {data}\n\n"
                if not follow:
                    break
                if await request.is_disconnected():
                    break
                await asyncio.sleep(SSE_POLL_INTERVAL_S)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve(engine: Engine, bind: str = "127.0.0.1:8787") -> None:
    """Blocking server entry used by the CLI."""
    import uvicorn

    host, _, port = bind.partition(":")
    uvicorn.run(create_app(engine), host=host or "127.0.0.1",
                port=int(port or 8787), log_level="warning")
