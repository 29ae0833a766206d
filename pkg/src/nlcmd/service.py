"""HTTP service exposing sessions, turns, transcripts, and KB summaries.

Wire format: every dialogue event is a WireTurn::

    {"session_id": ..., "seq": n, "sender": "user"|"agent", "body": {...}}

Body kinds: ``text``, ``option_list`` (1-based indexed descriptions),
``arg_prompt``, and ``execute_notice``. Responses are deterministic given
the KB version. Turns for one session are processed strictly in submission
order (the runtime serializes them).
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .dialogue import ActionKind, AgentAction, TurnRecord
from .errors import InvalidOptionIndex, SessionClosed
from .kb import save_kb
from .runtime import EngineRuntime

logger = logging.getLogger(__name__)


class TurnRequest(BaseModel):
    text: str
    kb_version: int | None = None  # optimistic concurrency check, optional


def action_body(action: AgentAction) -> dict:
    if action.kind is ActionKind.EXECUTE:
        return {
            "kind": "execute_notice",
            "api": action.api_id,
            "args": action.args,
            "text": action.text,
        }
    if action.kind is ActionKind.OFFER_OPTIONS:
        return {
            "kind": "option_list",
            "prompt": action.text,
            "options": [
                {"index": o.index, "api_id": o.api_id, "label": o.label} for o in action.options
            ],
        }
    if action.kind is ActionKind.ASK_ARG:
        return {
            "kind": "arg_prompt",
            "arg": action.arg_name,
            "type": action.arg_type,
            "prompt": action.text,
        }
    # ASK_REPHRASE / GIVE_UP / SAY are plain text turns on the wire
    return {"kind": "text", "text": action.text}


def wire_turn(session_id: str, record: TurnRecord) -> dict:
    if record.role == "user":
        body = {"kind": "text", "text": record.text}
    else:
        body = action_body(record.action)
    return {"session_id": session_id, "seq": record.seq, "sender": record.role, "body": body}


def create_app(runtime: EngineRuntime, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="nlcmd service", version="0.1.0")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "kb_version": runtime.kb.version}

    @app.post("/api/sessions", status_code=201)
    def create_session():
        session_id = runtime.create_session()
        return {"session_id": session_id, "kb_version": runtime.kb.version}

    @app.post("/api/sessions/{session_id}/turns")
    def post_turn(session_id: str, req: TurnRequest):
        if req.kb_version is not None and req.kb_version != runtime.kb.version:
            raise HTTPException(
                status_code=409,
                detail=f"KB is at version {runtime.kb.version}, request pinned {req.kb_version}",
            )
        try:
            outcome = runtime.submit_text(session_id, req.text)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except SessionClosed:
            raise HTTPException(status_code=409, detail="session is closed")
        except InvalidOptionIndex as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "turns": [wire_turn(session_id, r) for r in outcome.new_records],
            "learned": outcome.learned,
            "kb_version": outcome.kb_version,
        }

    @app.get("/api/sessions/{session_id}/transcript")
    def transcript(session_id: str, after_seq: int = 0):
        try:
            records = runtime.transcript(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return {
            "session_id": session_id,
            "turns": [wire_turn(session_id, r) for r in records if r.seq > after_seq],
        }

    @app.get("/api/kb/summary")
    def kb_summary():
        return runtime.kb_summary()

    @app.get("/api/kb/file")
    def kb_file():
        return Response(content=save_kb(runtime.kb), media_type="application/json")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
        logger.info("serving UI from %s", frontend_dir)

    return app
