"""Synthetic corruptions of known-good answers, with forced tag bookkeeping.

Each transform edits an answer in a controlled way and adjusts the paired
evaluation's tags by a closed-form delta, yielding hard negatives whose
expected evaluation is known by construction.  Text edits may come from a
model, but every result is machine-verified here before it is returned.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, replace
from typing import Optional, Protocol, Sequence

from .domain import Evaluation, LegalDataPoint, QAPair, Source, Tag, tag_counts
from .judge import ChatBackend

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")
_NUMBER_RE = re.compile(r"\d[\d,]*(?:\.\d+)?")
_ENTITY_RE = re.compile(r"\b[A-Z][a-z]{2,}\b")

# Capitalized words that are sentence furniture, not entities.
_ENTITY_STOPWORDS = {
    "The", "This", "That", "These", "Those", "There", "Then", "They",
    "However", "Under", "Pursuant", "Notwithstanding", "Any", "All",
    "Each", "Both", "Neither", "Section", "Clause", "Article",
}

_ENTITY_POOL = ("Delaware", "Nevada", "Ontario", "Bavaria", "Valencia", "Geneva")


class AugmentationKind(enum.Enum):
    REMOVE_INFO = "remove_info"
    INCOMPLETE_INFO = "incomplete_info"
    CHANGE_VALUE = "change_value"
    ADD_EXTRA_INFO = "add_extra_info"
    CONTRADICTING_INFO = "contradicting_info"


class AugmentationError(Exception):
    pass


@dataclass(frozen=True)
class AugmentedExample:
    kind: AugmentationKind
    qa_id: str
    answer: str
    evaluation: Evaluation
    edit_log: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "qa_id": self.qa_id,
            "answer": self.answer,
            "evaluation": self.evaluation.to_dict(),
            "edit_log": self.edit_log,
        }


class Rewriter(Protocol):
    """Produces the free-text edits the transforms need."""

    def make_incomplete(self, text: str) -> str: ...

    def extra_sentences(self, question: str, answer: str) -> str: ...

    def contradict(self, ground_truth: str) -> list[str]: ...


class MockRewriter:
    """Deterministic rewrites for offline runs; pure functions of the input."""

    def make_incomplete(self, text: str) -> str:
        words = text.split()
        keep = max(1, (len(words) + 1) // 2)
        if keep == len(words):
            keep -= 1
        if keep < 1:
            return text + " and related terms"
        stub = " ".join(words[:keep]).rstrip(",;:")
        return stub + "."

    def extra_sentences(self, question: str, answer: str) -> str:
        pool = (
            "Such provisions are generally unenforceable unless notarized. "
            "Courts have consistently read an implied six month grace period into similar clauses.",
            "Standard practice adds an automatic renewal on the same terms. "
            "The parties are presumed to have waived consequential damages.",
            "This kind of term is void in most jurisdictions without a separate rider.",
        )
        return pool[(len(question) + len(answer)) % len(pool)]

    _NEGATIONS = (
        (" is not ", " is "),
        (" is ", " is not "),
        (" are ", " are not "),
        (" must ", " need not "),
        (" shall ", " shall not "),
        (" will ", " will not "),
        (" may ", " may not "),
    )

    def contradict(self, ground_truth: str) -> list[str]:
        out = []
        for sentence in _SENTENCE_RE.split(ground_truth.strip()):
            sentence = sentence.strip()
            if not sentence:
                continue
            for needle, repl in self._NEGATIONS:
                if needle in sentence:
                    out.append(sentence.replace(needle, repl, 1))
                    break
            else:
                lowered = sentence[0].lower() + sentence[1:]
                out.append(f"It is not the case that {lowered}")
        return out


class LLMRewriter:
    """Rewrites via a chat backend; results still pass the same checks."""

    def __init__(self, backend: ChatBackend):
        self._backend = backend

    def make_incomplete(self, text: str) -> str:
        prompt = (
            "Rewrite the statement below so it conveys the same point but "
            "leaves out one key detail (a date, amount, party, or condition). "
            "Reply with the rewritten statement only.\n\n" + text
        )
        return self._backend.complete(prompt, key="rewrite:incomplete").text.strip()

    def extra_sentences(self, question: str, answer: str) -> str:
        prompt = (
            "Write one or two sentences of plausible legal information that "
            "is not supported by any source, to be appended to the answer "
            "below. Reply with the sentences only.\n\n"
            f"Question: {question}\nAnswer: {answer}"
        )
        return self._backend.complete(prompt, key="rewrite:extra").text.strip()

    def contradict(self, ground_truth: str) -> list[str]:
        prompt = (
            "Rewrite the reference answer below so that every assertion "
            "states the opposite of what it says. Reply with one assertion "
            "per line and nothing else.\n\n" + ground_truth
        )
        text = self._backend.complete(prompt, key="rewrite:contradict").text
        return [line.strip() for line in text.splitlines() if line.strip()]


def _locate(answer: str, span: str) -> Optional[re.Match]:
    return re.search(re.escape(span), answer) or re.search(
        re.escape(span), answer, re.IGNORECASE
    )


def _located_correct_indices(qa: QAPair, ev: Evaluation) -> list[int]:
    return [
        i
        for i, ldp in enumerate(ev.ldps)
        if ldp.tag is Tag.CORRECT and _locate(qa.answer, ldp.text)
    ]


def _tidy(text: str) -> str:
    text = re.sub(r"\s+", " ", text)
    text = re.sub(r"\s+([.,;:!?])", r"\1", text)
    return text.strip()


def _retag(ev: Evaluation, index: int, tag: Tag, text: Optional[str] = None) -> Evaluation:
    ldps = list(ev.ldps)
    ldp = ldps[index]
    ldps[index] = LegalDataPoint(
        text=text if text is not None else ldp.text,
        tag=tag,
        source=ldp.source,
        citation=ldp.citation,
    )
    return replace(ev, ldps=tuple(ldps))


def _delta_or_raise(
    kind: AugmentationKind, before: Evaluation, after: Evaluation, expected: tuple[int, int, int, int]
) -> None:
    b = tag_counts(before)
    a = tag_counts(after)
    got = (
        a.n_correct - b.n_correct,
        a.n_incorrect - b.n_incorrect,
        a.n_irrelevant - b.n_irrelevant,
        a.n_missing - b.n_missing,
    )
    if got != expected:
        raise AugmentationError(f"{kind.value}: tag delta {got} does not match {expected}")


def _check(condition: bool, kind: AugmentationKind, message: str) -> None:
    if not condition:
        raise AugmentationError(f"{kind.value}: {message}")


def remove_info(qa: QAPair, evaluation: Evaluation, seed: int) -> AugmentedExample:
    """Delete one correct LDP's span from the answer; that LDP becomes missing."""
    kind = AugmentationKind.REMOVE_INFO
    candidates = _located_correct_indices(qa, evaluation)
    _check(bool(candidates), kind, "no correct LDP text found verbatim in the answer")
    index = random.Random(seed).choice(candidates)
    span = evaluation.ldps[index].text
    new_answer = _tidy(re.sub(re.escape(span), "", qa.answer, flags=re.IGNORECASE))
    _check(bool(new_answer), kind, "removal would leave an empty answer")
    _check(span.lower() not in new_answer.lower(), kind, "removed span still present")
    new_eval = _retag(evaluation, index, Tag.MISSING)
    _delta_or_raise(kind, evaluation, new_eval, (-1, 0, 0, +1))
    return AugmentedExample(
        kind=kind,
        qa_id=qa.id,
        answer=new_answer,
        evaluation=new_eval,
        edit_log=f"removed span {span!r}",
    )


def incomplete_info(
    qa: QAPair, evaluation: Evaluation, seed: int, rewriter: Rewriter
) -> AugmentedExample:
    """Blur one correct LDP's span so a detail is lost; the LDP becomes missing."""
    kind = AugmentationKind.INCOMPLETE_INFO
    candidates = _located_correct_indices(qa, evaluation)
    _check(bool(candidates), kind, "no correct LDP text found verbatim in the answer")
    index = random.Random(seed).choice(candidates)
    span = evaluation.ldps[index].text
    new_span = rewriter.make_incomplete(span).strip()
    _check(bool(new_span), kind, "rewriter returned empty text")
    _check(new_span.lower() != span.lower(), kind, "rewriter returned the span unchanged")
    new_answer = _tidy(re.sub(re.escape(span), new_span, qa.answer, count=1, flags=re.IGNORECASE))
    _check(span.lower() not in new_answer.lower(), kind, "original span still present")
    _check(new_span.lower() in new_answer.lower(), kind, "rewritten span not in answer")
    new_eval = _retag(evaluation, index, Tag.MISSING)
    _delta_or_raise(kind, evaluation, new_eval, (-1, 0, 0, +1))
    return AugmentedExample(
        kind=kind,
        qa_id=qa.id,
        answer=new_answer,
        evaluation=new_eval,
        edit_log=f"replaced span {span!r} with {new_span!r}",
    )


def _mutate_number(value: str) -> str:
    return value[:-1] + str((int(value[-1]) + 1) % 10)


def _value_candidates(qa: QAPair, ev: Evaluation) -> list[tuple[str, int]]:
    values = [m.group(0) for m in _NUMBER_RE.finditer(qa.answer)]
    values += [
        m.group(0)
        for m in _ENTITY_RE.finditer(qa.answer)
        if m.group(0) not in _ENTITY_STOPWORDS
    ]
    seen = []
    out = []
    for value in values:
        if value in seen:
            continue
        seen.append(value)
        pattern = re.compile(rf"\b{re.escape(value)}\b")
        for i, ldp in enumerate(ev.ldps):
            if ldp.tag is Tag.CORRECT and pattern.search(ldp.text):
                out.append((value, i))
    return out


def change_value(qa: QAPair, evaluation: Evaluation, seed: int) -> AugmentedExample:
    """Swap one number or named entity in the answer; its LDP becomes incorrect."""
    kind = AugmentationKind.CHANGE_VALUE
    candidates = _value_candidates(qa, evaluation)
    _check(
        bool(candidates), kind, "no number or entity shared by the answer and a correct LDP"
    )
    rng = random.Random(seed)
    value, index = rng.choice(candidates)
    if value[-1].isdigit():
        replacement = _mutate_number(value)
    else:
        pool = [e for e in _ENTITY_POOL if e != value]
        replacement = rng.choice(pool)
    pattern = re.compile(rf"\b{re.escape(value)}\b")
    new_answer = pattern.sub(replacement, qa.answer)
    _check(not pattern.search(new_answer), kind, "original value still present in answer")
    _check(replacement in new_answer, kind, "replacement value not in answer")
    new_text = pattern.sub(replacement, evaluation.ldps[index].text)
    new_eval = _retag(evaluation, index, Tag.INCORRECT, text=new_text)
    _delta_or_raise(kind, evaluation, new_eval, (-1, +1, 0, 0))
    return AugmentedExample(
        kind=kind,
        qa_id=qa.id,
        answer=new_answer,
        evaluation=new_eval,
        edit_log=f"changed value {value!r} to {replacement!r}",
    )


def add_extra_info(
    qa: QAPair, evaluation: Evaluation, seed: int, rewriter: Rewriter
) -> AugmentedExample:
    """Append unsupported sentences; they arrive as one incorrect LDP."""
    kind = AugmentationKind.ADD_EXTRA_INFO
    extra = rewriter.extra_sentences(qa.question, qa.answer).strip()
    _check(bool(extra), kind, "rewriter returned no extra sentences")
    n_sentences = len([s for s in _SENTENCE_RE.split(extra) if s.strip()])
    _check(1 <= n_sentences <= 2, kind, f"expected 1 or 2 sentences, got {n_sentences}")
    new_answer = qa.answer.rstrip() + " " + extra
    added = LegalDataPoint(text=extra, tag=Tag.INCORRECT, source=Source.MACHINE)
    new_eval = replace(evaluation, ldps=tuple(evaluation.ldps) + (added,))
    _delta_or_raise(kind, evaluation, new_eval, (0, +1, 0, 0))
    return AugmentedExample(
        kind=kind,
        qa_id=qa.id,
        answer=new_answer,
        evaluation=new_eval,
        edit_log=f"appended {n_sentences} unsupported sentence(s)",
    )


def contradicting_info(
    qa: QAPair, evaluation: Evaluation, seed: int, rewriter: Rewriter
) -> AugmentedExample:
    """Replace the answer with assertions contradicting the ground truth.

    Every correct LDP flips to missing (its information is gone) and each
    contradicting assertion lands as a new incorrect LDP.
    """
    kind = AugmentationKind.CONTRADICTING_INFO
    _check(bool(qa.ground_truth), kind, "ground_truth is required")
    assertions = [a.strip() for a in rewriter.contradict(qa.ground_truth) if a.strip()]
    _check(bool(assertions), kind, "rewriter produced no assertions")
    new_answer = " ".join(assertions)
    _check(new_answer != qa.answer, kind, "rewritten answer equals the original")
    n_correct = sum(1 for ldp in evaluation.ldps if ldp.tag is Tag.CORRECT)
    ldps = [
        LegalDataPoint(
            text=ldp.text,
            tag=Tag.MISSING if ldp.tag is Tag.CORRECT else ldp.tag,
            source=ldp.source,
            citation=ldp.citation,
        )
        for ldp in evaluation.ldps
    ]
    ldps += [
        LegalDataPoint(text=a, tag=Tag.INCORRECT, source=Source.MACHINE) for a in assertions
    ]
    new_eval = replace(evaluation, ldps=tuple(ldps))
    k = len(assertions)
    _delta_or_raise(kind, evaluation, new_eval, (-n_correct, +k, 0, +n_correct))
    return AugmentedExample(
        kind=kind,
        qa_id=qa.id,
        answer=new_answer,
        evaluation=new_eval,
        edit_log=f"replaced answer with {k} contradicting assertion(s)",
    )


def apply_transform(
    kind: AugmentationKind,
    qa: QAPair,
    evaluation: Evaluation,
    seed: int,
    rewriter: Optional[Rewriter] = None,
) -> AugmentedExample:
    """Dispatch a transform by kind; rewriter defaults to the offline one."""
    rewriter = rewriter or MockRewriter()
    if kind is AugmentationKind.REMOVE_INFO:
        return remove_info(qa, evaluation, seed)
    if kind is AugmentationKind.INCOMPLETE_INFO:
        return incomplete_info(qa, evaluation, seed, rewriter)
    if kind is AugmentationKind.CHANGE_VALUE:
        return change_value(qa, evaluation, seed)
    if kind is AugmentationKind.ADD_EXTRA_INFO:
        return add_extra_info(qa, evaluation, seed, rewriter)
    return contradicting_info(qa, evaluation, seed, rewriter)
