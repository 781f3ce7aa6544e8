"""Core record types for legal QA evaluation, plus validation and JSON codecs.

An answer to a question about a contract is broken into legal data points
(LDPs), each carrying one of four tags: correct, incorrect, irrelevant, or
missing.  Records are immutable after construction.  ``validate`` reports
invariant violations as data rather than raising, so loaders can surface
every problem in a file in one pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Optional, Sequence


class Tag(enum.Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    IRRELEVANT = "irrelevant"
    MISSING = "missing"

    @classmethod
    def parse(cls, value: str) -> "Tag":
        """Parse a tag name case-insensitively."""
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown tag {value!r}") from None


class Source(enum.Enum):
    """Who produced a record: the judge model or a human reviewer."""

    MACHINE = "machine"
    HUMAN = "human"

    @classmethod
    def parse(cls, value: str) -> "Source":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown source {value!r}") from None


class ReviewMode(enum.Enum):
    MANUAL = "manual"
    LDP_GUIDED = "ldp_guided"


# Holistic review grades run 1..5, worst to best.
GRADE_MIN = 1
GRADE_MAX = 5

# Scores bucketed for agreement comparisons land on quarter points.
QUARTERS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class Violation:
    """One invariant violation: where it is and what rule it breaks."""

    path: str
    message: str


@dataclass(frozen=True)
class LegalDataPoint:
    """A self-contained piece of legal information extracted from an answer.

    ``citation`` is an optional pointer into the source document, for
    example "[par_46]".
    """

    text: str
    tag: Tag
    source: Source
    citation: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "tag": self.tag.value,
            "source": self.source.value,
            "citation": self.citation,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LegalDataPoint":
        return cls(
            text=d["text"],
            tag=Tag.parse(d["tag"]),
            source=Source.parse(d["source"]),
            citation=d.get("citation"),
        )


@dataclass(frozen=True)
class ContractDoc:
    id: str
    contract_type: str
    text: str

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "contract_type": self.contract_type, "text": self.text}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ContractDoc":
        return cls(id=d["id"], contract_type=d["contract_type"], text=d["text"])


@dataclass(frozen=True)
class QAPair:
    """A question about a contract together with the answer under evaluation.

    ``ground_truth`` is optional; the tag taxonomy lets evaluation proceed
    without it.
    """

    id: str
    contract_id: str
    question: str
    answer: str
    ground_truth: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "contract_id": self.contract_id,
            "question": self.question,
            "answer": self.answer,
            "ground_truth": self.ground_truth,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "QAPair":
        return cls(
            id=d["id"],
            contract_id=d["contract_id"],
            question=d["question"],
            answer=d["answer"],
            ground_truth=d.get("ground_truth"),
        )


@dataclass(frozen=True)
class Evaluation:
    """One evaluator's tagged breakdown of one answer."""

    qa_id: str
    evaluator_id: str
    evaluator_kind: Source
    ldps: tuple[LegalDataPoint, ...]
    created_at: datetime

    def __post_init__(self) -> None:
        # Keep ldps hashable and immutable even when a list is passed in.
        object.__setattr__(self, "ldps", tuple(self.ldps))

    def to_dict(self) -> dict[str, Any]:
        return {
            "qa_id": self.qa_id,
            "evaluator_id": self.evaluator_id,
            "evaluator_kind": self.evaluator_kind.value,
            "ldps": [ldp.to_dict() for ldp in self.ldps],
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Evaluation":
        return cls(
            qa_id=d["qa_id"],
            evaluator_id=d["evaluator_id"],
            evaluator_kind=Source.parse(d["evaluator_kind"]),
            ldps=tuple(LegalDataPoint.from_dict(x) for x in d["ldps"]),
            created_at=datetime.fromisoformat(d["created_at"]),
        )


@dataclass(frozen=True)
class TagCounts:
    n_correct: int
    n_incorrect: int
    n_irrelevant: int
    n_missing: int

    def total(self) -> int:
        return self.n_correct + self.n_incorrect + self.n_irrelevant + self.n_missing

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_correct": self.n_correct,
            "n_incorrect": self.n_incorrect,
            "n_irrelevant": self.n_irrelevant,
            "n_missing": self.n_missing,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TagCounts":
        return cls(
            n_correct=d["n_correct"],
            n_incorrect=d["n_incorrect"],
            n_irrelevant=d["n_irrelevant"],
            n_missing=d["n_missing"],
        )


@dataclass(frozen=True)
class ScoreSet:
    """Per-answer scores; a value is None when its denominator is zero."""

    correctness: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "correctness": self.correctness,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreSet":
        return cls(
            correctness=d.get("correctness"),
            precision=d.get("precision"),
            recall=d.get("recall"),
            f1=d.get("f1"),
        )


@dataclass(frozen=True)
class HumanReview:
    """A human assessment of one answer, holistic or LDP-guided.

    Manual reviews carry 1..5 grades and no evaluation; LDP-guided reviews
    carry a full human Evaluation and no grades are required.
    """

    qa_id: str
    reviewer_id: str
    mode: ReviewMode
    correctness_grade: Optional[int] = None
    relevance_grade: Optional[int] = None
    evaluation: Optional[Evaluation] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "qa_id": self.qa_id,
            "reviewer_id": self.reviewer_id,
            "mode": self.mode.value,
            "correctness_grade": self.correctness_grade,
            "relevance_grade": self.relevance_grade,
            "evaluation": self.evaluation.to_dict() if self.evaluation else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HumanReview":
        ev = d.get("evaluation")
        return cls(
            qa_id=d["qa_id"],
            reviewer_id=d["reviewer_id"],
            mode=ReviewMode(d["mode"]),
            correctness_grade=d.get("correctness_grade"),
            relevance_grade=d.get("relevance_grade"),
            evaluation=Evaluation.from_dict(ev) if ev else None,
        )


def tag_counts(evaluation: Evaluation) -> TagCounts:
    """Count LDPs per tag; the four counts always sum to len(ldps)."""
    c = i = r = m = 0
    for ldp in evaluation.ldps:
        if ldp.tag is Tag.CORRECT:
            c += 1
        elif ldp.tag is Tag.INCORRECT:
            i += 1
        elif ldp.tag is Tag.IRRELEVANT:
            r += 1
        else:
            m += 1
    return TagCounts(c, i, r, m)


def _check_ldp(ldp: LegalDataPoint, prefix: str, out: list[Violation]) -> None:
    if not ldp.text.strip():
        out.append(Violation(prefix + "text", "text must be non-empty after trimming"))
    if not isinstance(ldp.tag, Tag):
        out.append(Violation(prefix + "tag", "tag must be one of correct, incorrect, irrelevant, missing"))
    if not isinstance(ldp.source, Source):
        out.append(Violation(prefix + "source", "source must be machine or human"))


def _check_contract(doc: ContractDoc, out: list[Violation]) -> None:
    if not doc.id:
        out.append(Violation("id", "id must be non-empty"))
    if not doc.text.strip():
        out.append(Violation("text", "text must be non-empty"))


def _check_qa(qa: QAPair, out: list[Violation]) -> None:
    if not qa.id:
        out.append(Violation("id", "id must be non-empty"))
    if not qa.contract_id:
        out.append(Violation("contract_id", "contract_id must be non-empty"))
    if not qa.answer.strip():
        out.append(Violation("answer", "answer must be non-empty after trimming"))


def _check_evaluation(ev: Evaluation, out: list[Violation]) -> None:
    if not ev.qa_id:
        out.append(Violation("qa_id", "qa_id must be non-empty"))
    if not ev.ldps:
        out.append(Violation("ldps", "ldps must be non-empty"))
    elif all(ldp.tag is Tag.MISSING for ldp in ev.ldps):
        # An answer that yields nothing but missing information is treated
        # as invalid input rather than scored.
        out.append(Violation("ldps", "ldps must include at least one non-missing entry"))
    for idx, ldp in enumerate(ev.ldps):
        prefix = f"ldps[{idx}]."
        _check_ldp(ldp, prefix, out)
        if ldp.tag is not Tag.MISSING and ldp.source is not ev.evaluator_kind:
            out.append(
                Violation(
                    prefix + "source",
                    f"non-missing LDP source must match evaluator_kind {ev.evaluator_kind.value}",
                )
            )


def _check_counts(tc: TagCounts, out: list[Violation]) -> None:
    for name in ("n_correct", "n_incorrect", "n_irrelevant", "n_missing"):
        value = getattr(tc, name)
        if not isinstance(value, int) or value < 0:
            out.append(Violation(name, "count must be a non-negative integer"))


def _check_scores(s: ScoreSet, out: list[Violation]) -> None:
    for name in ("correctness", "precision", "recall", "f1"):
        value = getattr(s, name)
        if value is not None and not 0.0 <= value <= 1.0:
            out.append(Violation(name, "score must lie in [0, 1]"))
    if s.f1 is not None and (s.precision is None or s.recall is None):
        out.append(Violation("f1", "f1 requires both precision and recall to be defined"))


def _check_review(r: HumanReview, out: list[Violation]) -> None:
    if not r.qa_id:
        out.append(Violation("qa_id", "qa_id must be non-empty"))
    if not r.reviewer_id:
        out.append(Violation("reviewer_id", "reviewer_id must be non-empty"))
    for name in ("correctness_grade", "relevance_grade"):
        g = getattr(r, name)
        if g is not None and not (GRADE_MIN <= g <= GRADE_MAX):
            out.append(Violation(name, f"grade must lie in {GRADE_MIN}..{GRADE_MAX}"))
    if r.mode is ReviewMode.MANUAL:
        if r.correctness_grade is None or r.relevance_grade is None:
            out.append(Violation("mode", "manual review requires both grades"))
        if r.evaluation is not None:
            out.append(Violation("evaluation", "manual review must not carry an evaluation"))
    else:
        if r.evaluation is None:
            out.append(Violation("evaluation", "ldp_guided review requires an evaluation"))
        else:
            for v in validate(r.evaluation):
                out.append(Violation("evaluation." + v.path, v.message))


def validate(record: Any) -> list[Violation]:
    """Check every invariant of a record; an empty result means it is valid."""
    out: list[Violation] = []
    if isinstance(record, LegalDataPoint):
        _check_ldp(record, "", out)
    elif isinstance(record, ContractDoc):
        _check_contract(record, out)
    elif isinstance(record, QAPair):
        _check_qa(record, out)
    elif isinstance(record, Evaluation):
        _check_evaluation(record, out)
    elif isinstance(record, TagCounts):
        _check_counts(record, out)
    elif isinstance(record, ScoreSet):
        _check_scores(record, out)
    elif isinstance(record, HumanReview):
        _check_review(record, out)
    else:
        raise TypeError(f"cannot validate {type(record).__name__}")
    return out


def is_valid(record: Any) -> bool:
    return not validate(record)


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def answer_context_violations(evaluation: Evaluation, answer: str) -> list[Violation]:
    """Checks that need the answer text alongside the evaluation.

    Missing LDPs describe information absent from the answer, so their text
    must not appear in it verbatim.  Non-missing LDPs that do appear
    verbatim must follow answer order.
    """
    out: list[Violation] = []
    norm_answer = _normalize(answer)
    last_pos = -1
    for idx, ldp in enumerate(evaluation.ldps):
        norm_text = _normalize(ldp.text)
        if ldp.tag is Tag.MISSING:
            if norm_text and norm_text in norm_answer:
                out.append(
                    Violation(
                        f"ldps[{idx}].text",
                        "missing LDP must not quote the answer verbatim",
                    )
                )
            continue
        pos = norm_answer.find(norm_text)
        if pos >= 0:
            if pos < last_pos:
                out.append(
                    Violation(
                        f"ldps[{idx}].text",
                        "non-missing LDPs must follow answer order",
                    )
                )
            last_pos = max(last_pos, pos)
    return out


def quarter_values() -> Sequence[float]:
    return QUARTERS


def is_quarter(value: float) -> bool:
    return value in QUARTERS
