"""FastAPI wiring for the annotation service."""

from __future__ import annotations

from typing import Optional

from fastapi import Depends, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .schemas import (
    AddLdpRequest,
    CreateSessionRequest,
    SessionView,
    SubmitRequest,
    SubmitResult,
    TagRequest,
    TriageView,
)
from .state import ServiceError, ServiceState


def _bearer_token(request: Request) -> Optional[str]:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() == "bearer" and token:
        return token
    return None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="LDP annotation service", docs_url=None, redoc_url=None)
    app.state.service = state
    # The annotation page is typically served from a separate static
    # origin; auth is bearer-token, not cookies, so open CORS is safe.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def reviewer(request: Request) -> str:
        return state.reviewer_for_token(_bearer_token(request))

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", response_model=SessionView)
    def create_session(
        body: CreateSessionRequest, reviewer_id: str = Depends(reviewer)
    ) -> SessionView:
        session = state.create_session(body.qa_id, reviewer_id)
        return state.session_view(session)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str, reviewer_id: str = Depends(reviewer)) -> SessionView:
        return state.session_view(state.get_session(session_id, reviewer_id))

    @app.put("/sessions/{session_id}/ldps/{index}/tag", response_model=SessionView)
    def record_tag(
        session_id: str,
        index: int,
        body: TagRequest,
        reviewer_id: str = Depends(reviewer),
    ) -> SessionView:
        session = state.record_tag(session_id, reviewer_id, index, body.tag, body.version)
        return state.session_view(session)

    @app.post("/sessions/{session_id}/ldps", response_model=SessionView)
    def add_ldp(
        session_id: str, body: AddLdpRequest, reviewer_id: str = Depends(reviewer)
    ) -> SessionView:
        session = state.add_missing_ldp(session_id, reviewer_id, body.text, body.version)
        return state.session_view(session)

    @app.post("/sessions/{session_id}/submit", response_model=SubmitResult)
    def submit(
        session_id: str, body: SubmitRequest, reviewer_id: str = Depends(reviewer)
    ) -> SubmitResult:
        return state.submit(session_id, reviewer_id, body.version)

    @app.get("/reports/triage", response_model=TriageView)
    def triage_report(reviewer_id: str = Depends(reviewer)) -> TriageView:
        return state.triage_view()

    return app
