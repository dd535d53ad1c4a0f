"""HTTP surface: sessions, questions, ingestion, summaries.

Every non-2xx response body is an ApiError envelope. Request handling logs
one structured JSON line per request. Setting ``QA_SERVICE_TOKEN`` turns on
the single static bearer token check (health stays open).
"""

from __future__ import annotations

import json
import logging
import os
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ROLES
from .errors import ContractQaError, LlmUnavailable, ValidationFailed
from .engine import Engine, UnknownContract
from .ingest import OCS_PATTERN

log = logging.getLogger("contractqa.service")

TOKEN_ENV = "QA_SERVICE_TOKEN"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class CreateSessionRequest(BaseModel):
    role: str


class AskRequest(BaseModel):
    question: str


class IngestRequest(BaseModel):
    manifest_path: str


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="contractqa", version="0.1.0")

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": "invalid request body",
                     "detail": exc.errors()},
        )

    @app.exception_handler(Exception)
    async def on_unhandled(request: Request, exc: Exception):
        log.exception("unhandled error on %s", request.url.path)
        return JSONResponse(
            status_code=500,
            content={"code": "internal", "message": str(exc), "detail": None},
        )

    @app.middleware("http")
    async def bearer_token_gate(request: Request, call_next):
        token = os.environ.get(TOKEN_ENV)
        if token and request.url.path != "/health":
            if request.headers.get("Authorization") != f"Bearer {token}":
                return JSONResponse(
                    status_code=401,
                    content={"code": "bad_request", "message": "missing or bad bearer token",
                             "detail": None},
                )
        return await call_next(request)

    @app.middleware("http")
    async def request_logging(request: Request, call_next):
        start = time.monotonic()
        response = await call_next(request)
        log.info(
            "%s",
            json.dumps({
                "method": request.method,
                "path": request.url.path,
                "status": response.status_code,
                "ms": round((time.monotonic() - start) * 1000, 2),
            }),
        )
        return response

    @app.get("/health")
    def health():
        return {"status": "ok", "index_size": len(engine.index)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        if body.role not in ROLES:
            raise ApiError(400, "bad_request",
                           f"unknown role {body.role!r}", {"roles": list(ROLES)})
        session = engine.create_session(body.role)
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/ask")
    def ask(session_id: str, body: AskRequest):
        if not body.question.strip():
            raise ApiError(400, "bad_request", "question must not be empty")
        try:
            answer = engine.ask(session_id, body.question)
        except KeyError:
            raise ApiError(404, "not_found", f"unknown session {session_id}")
        except LlmUnavailable as exc:
            raise ApiError(502, "upstream_llm",
                           f"language model unavailable, retry later: {exc}",
                           {"status": exc.status})
        except ValidationFailed as exc:
            raise ApiError(422, "validation_failed", str(exc), exc.verdict.to_dict())
        return answer.to_dict()

    @app.post("/ingest")
    def ingest(body: IngestRequest):
        try:
            documents, chunks = engine.ingest(body.manifest_path)
        except FileNotFoundError as exc:
            raise ApiError(400, "bad_request", str(exc))
        except ContractQaError as exc:
            raise ApiError(500, "internal", f"ingestion failed: {exc}")
        return {"documents": documents, "chunks": chunks}

    @app.get("/contracts/{ocs:path}/summary")
    def contract_summary(ocs: str):
        if not OCS_PATTERN.fullmatch(ocs):
            raise ApiError(400, "bad_request", f"malformed OCS id {ocs!r}")
        try:
            answer = engine.summary(ocs)
        except UnknownContract as exc:
            raise ApiError(404, "not_found", str(exc))
        except LlmUnavailable as exc:
            raise ApiError(502, "upstream_llm", str(exc), {"status": exc.status})
        return answer.to_dict()

    return app


def serve(engine: Engine, host: str = "127.0.0.1", port: int = 8000,
          ui_dir: str | None = None) -> None:
    """Run the API (and optionally the static chat UI) under uvicorn.

    ``port=0`` binds an ephemeral port; the chosen port is printed once the
    socket is bound.
    """
    import socket

    import uvicorn

    app = create_app(engine)
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    sock = socket.create_server((host, port))
    actual_port = sock.getsockname()[1]
    print(f"listening on http://{host}:{actual_port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])
