"""Request and response bodies for the annotation service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel


class CreateSessionRequest(BaseModel):
    qa_id: str


class TagRequest(BaseModel):
    tag: str
    version: int


class AddLdpRequest(BaseModel):
    text: str
    version: int


class SubmitRequest(BaseModel):
    version: int


class LdpView(BaseModel):
    index: int
    text: str
    citation: Optional[str] = None
    human_tag: Optional[str] = None
    machine_tag: Optional[str] = None


class AddedLdpView(BaseModel):
    text: str
    tag: str = "missing"


class SessionView(BaseModel):
    session_id: str
    qa_id: str
    reviewer_id: str
    state: str
    version: int
    question: str
    answer: str
    contract_id: str
    contract_text: str
    ldps: list[LdpView]
    added_ldps: list[AddedLdpView]


class ScoreView(BaseModel):
    correctness: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None


class SubmitResult(BaseModel):
    session: SessionView
    scores: ScoreView
    alignment: dict[str, Any]
    review: dict[str, Any]


class TriageView(BaseModel):
    total: int
    cleared: list[str]
    flagged: list[str]
    relevance_threshold: float
    correctness_threshold: float


class ErrorBody(BaseModel):
    code: str
    message: str
    details: dict[str, Any] = {}
