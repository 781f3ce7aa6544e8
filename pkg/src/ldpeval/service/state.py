"""Framework-free session logic for the annotation service.

All mutations run through optimistic version checks: clients echo the
version they last saw, a mismatch conflicts, and every successful
mutation increments it.  Submit is the exception: it freezes the session
instead, and a retry with the same version replays the cached result so
interrupted clients cannot double-submit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

from ..alignment import AlignConfig, Embedder, OfflineEmbedder, align_evaluations
from ..analysis import TriageConfig, triage
from ..datastore import Corpus
from ..domain import (
    Evaluation,
    HumanReview,
    LegalDataPoint,
    ReviewMode,
    Source,
    Tag,
    tag_counts,
    validate,
)
from ..metrics import compute_scores
from .schemas import (
    AddedLdpView,
    LdpView,
    ScoreView,
    SessionView,
    SubmitResult,
    TriageView,
)

OPEN = "open"
SUBMITTED = "submitted"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class ServiceError(Exception):
    """Carried to the client verbatim as {code, message, details}."""

    def __init__(self, status: int, code: str, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


@dataclass(frozen=True)
class ServiceConfig:
    tokens: dict[str, str]  # bearer token -> reviewer_id
    relevance_threshold: float = 0.85
    correctness_threshold: float = 1.0


@dataclass
class Session:
    session_id: str
    qa_id: str
    reviewer_id: str
    machine_evaluation: Evaluation
    human_tags: dict[int, Tag] = field(default_factory=dict)
    added_ldps: list[str] = field(default_factory=list)
    state: str = OPEN
    version: int = 1
    submitted_version: Optional[int] = None
    result: Optional[SubmitResult] = None


class ServiceState:
    """In-memory store behind the HTTP app; single-process, lock-free reads."""

    def __init__(
        self,
        corpus: Corpus,
        machine_evaluations: dict[str, Evaluation],
        cfg: ServiceConfig,
        embedder: Optional[Embedder] = None,
        align_cfg: Optional[AlignConfig] = None,
        clock: Callable[[], datetime] = _utcnow,
    ):
        self.corpus = corpus
        self.machine_evaluations = dict(machine_evaluations)
        self.cfg = cfg
        self.embedder = embedder or OfflineEmbedder()
        self.align_cfg = align_cfg or AlignConfig()
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self.reviews: list[HumanReview] = []
        self._counter = 0

    # -- auth ---------------------------------------------------------------

    def reviewer_for_token(self, token: Optional[str]) -> str:
        if token is None or token not in self.cfg.tokens:
            raise ServiceError(401, "unauthorized", "missing or unknown bearer token")
        return self.cfg.tokens[token]

    # -- sessions -----------------------------------------------------------

    def create_session(self, qa_id: str, reviewer_id: str) -> Session:
        if qa_id not in self.corpus.qa_pairs:
            raise ServiceError(404, "not_found", f"unknown qa_id {qa_id!r}")
        if qa_id not in self.machine_evaluations:
            raise ServiceError(
                404, "not_found", f"no machine evaluation for {qa_id!r}"
            )
        for session in self.sessions.values():
            if (
                session.qa_id == qa_id
                and session.reviewer_id == reviewer_id
                and session.state == OPEN
            ):
                return session
        self._counter += 1
        session = Session(
            session_id=f"s-{self._counter:04d}",
            qa_id=qa_id,
            reviewer_id=reviewer_id,
            machine_evaluation=self.machine_evaluations[qa_id],
        )
        self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str, reviewer_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None or session.reviewer_id != reviewer_id:
            raise ServiceError(404, "not_found", f"unknown session {session_id!r}")
        return session

    def _check_open(self, session: Session) -> None:
        if session.state != OPEN:
            raise ServiceError(
                409, "session_submitted", "session is submitted and immutable"
            )

    def _check_version(self, session: Session, version: int) -> None:
        if version != session.version:
            raise ServiceError(
                409,
                "version_conflict",
                "session was modified since you last read it",
                {"expected": session.version, "got": version},
            )

    def record_tag(
        self, session_id: str, reviewer_id: str, index: int, tag_text: str, version: int
    ) -> Session:
        session = self.get_session(session_id, reviewer_id)
        self._check_open(session)
        self._check_version(session, version)
        if not 0 <= index < len(session.machine_evaluation.ldps):
            raise ServiceError(
                400,
                "out_of_range",
                f"LDP index {index} out of range",
                {"count": len(session.machine_evaluation.ldps)},
            )
        try:
            tag = Tag.parse(tag_text)
        except ValueError:
            raise ServiceError(
                400,
                "invalid_tag",
                f"unknown tag {tag_text!r}",
                {"allowed": [t.value for t in Tag]},
            )
        session.human_tags[index] = tag
        session.version += 1
        return session

    def add_missing_ldp(
        self, session_id: str, reviewer_id: str, text: str, version: int
    ) -> Session:
        session = self.get_session(session_id, reviewer_id)
        self._check_open(session)
        self._check_version(session, version)
        if not text.strip():
            raise ServiceError(400, "empty_text", "LDP text must not be empty")
        session.added_ldps.append(text.strip())
        session.version += 1
        return session

    # -- submit -------------------------------------------------------------

    def _build_human_evaluation(self, session: Session) -> Evaluation:
        ldps = [
            LegalDataPoint(
                text=ldp.text,
                tag=session.human_tags[i],
                source=Source.HUMAN,
                citation=ldp.citation,
            )
            for i, ldp in enumerate(session.machine_evaluation.ldps)
        ]
        ldps += [
            LegalDataPoint(text=text, tag=Tag.MISSING, source=Source.HUMAN)
            for text in session.added_ldps
        ]
        return Evaluation(
            qa_id=session.qa_id,
            evaluator_id=session.reviewer_id,
            evaluator_kind=Source.HUMAN,
            ldps=tuple(ldps),
            created_at=self.clock(),
        )

    def submit(self, session_id: str, reviewer_id: str, version: int) -> SubmitResult:
        session = self.get_session(session_id, reviewer_id)
        if session.state == SUBMITTED:
            if version == session.submitted_version and session.result is not None:
                return session.result
            raise ServiceError(
                409,
                "version_conflict",
                "session already submitted at a different version",
                {"expected": session.submitted_version, "got": version},
            )
        self._check_version(session, version)
        untagged = [
            i
            for i in range(len(session.machine_evaluation.ldps))
            if i not in session.human_tags
        ]
        if untagged:
            raise ServiceError(
                409,
                "untagged_ldps",
                f"{len(untagged)} LDP(s) still untagged",
                {"indices": untagged},
            )
        human_eval = self._build_human_evaluation(session)
        violations = validate(human_eval)
        if violations:
            raise ServiceError(
                422,
                "invalid_evaluation",
                "the tagged evaluation violates domain rules",
                {"violations": [f"{v.path}: {v.message}" for v in violations]},
            )
        scores = compute_scores(tag_counts(human_eval))
        report = align_evaluations(
            list(session.machine_evaluation.ldps),
            list(human_eval.ldps),
            self.align_cfg,
            self.embedder,
        )
        review = HumanReview(
            qa_id=session.qa_id,
            reviewer_id=session.reviewer_id,
            mode=ReviewMode.LDP_GUIDED,
            evaluation=human_eval,
        )
        session.state = SUBMITTED
        session.submitted_version = version
        self.reviews.append(review)
        session.result = SubmitResult(
            session=self.session_view(session),
            scores=ScoreView(**scores.to_dict()),
            alignment=report.to_dict(),
            review=review.to_dict(),
        )
        return session.result

    # -- views --------------------------------------------------------------

    def session_view(self, session: Session) -> SessionView:
        qa = self.corpus.qa_pairs[session.qa_id]
        contract = self.corpus.contracts[qa.contract_id]
        reveal = session.state == SUBMITTED
        ldps = [
            LdpView(
                index=i,
                text=ldp.text,
                citation=ldp.citation,
                human_tag=session.human_tags[i].value if i in session.human_tags else None,
                machine_tag=ldp.tag.value if reveal else None,
            )
            for i, ldp in enumerate(session.machine_evaluation.ldps)
        ]
        return SessionView(
            session_id=session.session_id,
            qa_id=session.qa_id,
            reviewer_id=session.reviewer_id,
            state=session.state,
            version=session.version,
            question=qa.question,
            answer=qa.answer,
            contract_id=contract.id,
            contract_text=contract.text,
            ldps=ldps,
            added_ldps=[AddedLdpView(text=t) for t in session.added_ldps],
        )

    # -- reports ------------------------------------------------------------

    def triage_view(self) -> TriageView:
        scores = {
            qa_id: compute_scores(tag_counts(ev))
            for qa_id, ev in self.machine_evaluations.items()
        }
        report = triage(
            scores,
            TriageConfig(
                relevance_threshold=self.cfg.relevance_threshold,
                correctness_threshold=self.cfg.correctness_threshold,
            ),
        )
        return TriageView(
            total=report.total,
            cleared=list(report.cleared),
            flagged=list(report.flagged),
            relevance_threshold=self.cfg.relevance_threshold,
            correctness_threshold=self.cfg.correctness_threshold,
        )
