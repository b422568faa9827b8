"""HTTP API for uploading transcripts, running the pipeline, and reading the
results back for review.

All error bodies share one shape: {"error": {"code": ..., "message": ...}},
with a "line" field added for transcript parse failures.
"""

from __future__ import annotations

import io
from pathlib import Path

from fastapi import Depends, FastAPI, File, Form, Header, Request, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..corpus import DecisionItem, Meeting, parse_transcript
from ..errors import (
    ConfigError,
    ConflictError,
    ContractError,
    DectrackError,
    NotFoundError,
    TranscriptParseError,
)
from .pipeline import JobRunner, PipelineModels
from .storage import Storage

API_VERSION = "1"


def item_to_json(item: DecisionItem, utterance_index: int) -> dict:
    return {
        "id": item.id,
        "meeting_id": item.meeting_id,
        "utterance_id": item.utterance_id,
        "utterance_index": utterance_index,
        "original_text": item.original_text,
        "rewritten_text": item.rewritten_text,
        "degraded": item.degraded,
        "created_at": item.created_at,
        "context_token_count": item.context_token_count,
        "model_versions": {
            "detector": item.detector_version,
            "rewriter": item.rewriter_version,
        },
    }


def _error_response(status: int, code: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status, content=body)


def create_app(
    storage: Storage,
    models: PipelineModels,
    auth_token: str | None = None,
    frontend_dir: str | Path | None = None,
    inline_jobs: bool = False,
) -> FastAPI:
    """Build the API around an injected store and model bundle.

    auth_token, when set, gates every API route behind a shared bearer
    credential; /healthz stays open for probes.
    """
    app = FastAPI(title="decision tracker", version=API_VERSION, docs_url=None, redoc_url=None)
    runner = JobRunner(storage, models, inline=inline_jobs)
    app.state.storage = storage
    app.state.runner = runner

    def check_auth(authorization: str | None = Header(default=None)):
        if auth_token is None:
            return
        if authorization != f"Bearer {auth_token}":
            raise _Unauthorized()

    class _Unauthorized(Exception):
        pass

    @app.exception_handler(_Unauthorized)
    async def on_unauthorized(request: Request, exc: _Unauthorized):
        return _error_response(401, "unauthorized", "missing or invalid credential")

    @app.exception_handler(TranscriptParseError)
    async def on_parse_error(request: Request, exc: TranscriptParseError):
        extra = {"line": exc.line} if exc.line is not None else {}
        return _error_response(422, "parse_error", str(exc), **extra)

    @app.exception_handler(NotFoundError)
    async def on_not_found(request: Request, exc: NotFoundError):
        return _error_response(404, "not_found", str(exc))

    @app.exception_handler(ConflictError)
    async def on_conflict(request: Request, exc: ConflictError):
        return _error_response(409, "conflict", str(exc))

    @app.exception_handler(ContractError)
    async def on_contract_error(request: Request, exc: ContractError):
        return _error_response(400, "bad_request", str(exc))

    @app.exception_handler(ConfigError)
    async def on_config_error(request: Request, exc: ConfigError):
        return _error_response(400, "bad_request", str(exc))

    @app.exception_handler(DectrackError)
    async def on_dectrack_error(request: Request, exc: DectrackError):
        return _error_response(500, "internal_error", str(exc))

    guarded = [Depends(check_auth)]

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "api_version": API_VERSION}

    @app.post("/meetings", status_code=201, dependencies=guarded)
    def upload_meeting(
        transcript: UploadFile = File(...),
        title: str = Form(default=""),
        recorded_at: str | None = Form(default=None),
        idempotency_key: str | None = Form(default=None),
        idempotency_key_header: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        key = idempotency_key or idempotency_key_header
        payload = transcript.file.read()
        meeting = parse_transcript(io.BytesIO(payload), title=title)
        if recorded_at:
            meeting = Meeting(
                id=meeting.id,
                title=meeting.title,
                utterances=meeting.utterances,
                recorded_at=recorded_at,
                status=meeting.status,
            )
        meeting_id, created = storage.save_meeting(meeting, idempotency_key=key)
        body = {"meeting_id": meeting_id, "created": created}
        return JSONResponse(status_code=201 if created else 200, content=body)

    @app.get("/meetings", dependencies=guarded)
    def list_meetings():
        return {"meetings": storage.list_meetings()}

    @app.post("/meetings/{meeting_id}/process", status_code=202, dependencies=guarded)
    def process_meeting(meeting_id: str):
        job = runner.submit(meeting_id)
        return JSONResponse(status_code=202, content={"job": job.to_dict()})

    @app.get("/meetings/{meeting_id}/job", dependencies=guarded)
    def get_job(meeting_id: str):
        if not storage.meeting_exists(meeting_id):
            raise NotFoundError(f"meeting {meeting_id!r} not found")
        job = storage.get_job(meeting_id)
        if job is None:
            raise NotFoundError(f"no processing job for meeting {meeting_id!r}")
        return {"job": job.to_dict()}

    @app.get("/meetings/{meeting_id}/decisions", dependencies=guarded)
    def get_decisions(meeting_id: str):
        meeting = storage.get_meeting(meeting_id)
        items = storage.get_decisions(meeting_id)
        return {
            "meeting_id": meeting_id,
            "status": meeting.status,
            "decisions": [item_to_json(item, index) for item, index in items],
        }

    @app.get("/meetings/{meeting_id}/transcript", dependencies=guarded)
    def get_transcript(meeting_id: str, anchor: str | None = None):
        meeting = storage.get_meeting(meeting_id)
        tags = {label.utterance_id: label.tag for label in storage.get_labels(meeting_id)}
        utterances = [
            {
                "id": u.id,
                "index": u.index,
                "speaker": u.speaker,
                "text": u.text,
                "start": u.start_time,
                "end": u.end_time,
                "tag": tags.get(u.id),
            }
            for u in meeting.utterances
        ]
        anchor_found = anchor is not None and any(u.id == anchor for u in meeting.utterances)
        return {
            "meeting_id": meeting_id,
            "title": meeting.title,
            "anchor": anchor,
            "anchor_found": anchor_found,
            "utterances": utterances,
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="frontend")

    return app
