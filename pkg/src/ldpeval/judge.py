"""Judge orchestration: prompts, wire format, backends, retries.

The judge receives the contract, question, and answer in one prompt, breaks
the answer into legal data points, and tags each one.  The wire format is
one LDP per line wrapped in its tag, for example::

    <correct>The agreement is governed by Florida law. [par_46]</correct>

Raw model output is handed to a sink before parsing, so a run keeps the
evidence even when parsing fails.
"""

from __future__ import annotations

import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Callable, Mapping, Optional, Protocol, Sequence

import httpx

from .domain import ContractDoc, Evaluation, LegalDataPoint, QAPair, Source, Tag, Violation
from .errors import AuthenticationError, ProviderError


class ParseError(Exception):
    pass


class EmptyEvaluationError(ParseError):
    """The response contained no parseable tagged lines."""


class MalformedTagError(ParseError):
    """A tagged span is unusable; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class JudgeConfig:
    model_id: str
    endpoint_url: Optional[str] = None
    api_key_ref: Optional[str] = None
    temperature: float = 0.0
    max_retries: int = 3
    request_timeout: float = 30.0
    parallelism: int = 1
    # Declared so a pipeline can refuse to let a model grade its own answers.
    answer_model_id: Optional[str] = None

    def check(self) -> list[Violation]:
        out = []
        if not self.model_id:
            out.append(Violation("model_id", "model_id must be non-empty"))
        if self.temperature < 0:
            out.append(Violation("temperature", "temperature must be non-negative"))
        if not 0 <= self.max_retries <= 10:
            out.append(Violation("max_retries", "max_retries must lie in 0..10"))
        if self.request_timeout <= 0:
            out.append(Violation("request_timeout", "request_timeout must be positive"))
        if self.parallelism < 1:
            out.append(Violation("parallelism", "parallelism must be at least 1"))
        if self.answer_model_id is not None and self.answer_model_id == self.model_id:
            out.append(
                Violation(
                    "answer_model_id",
                    "the judge model must differ from the model that wrote the answers",
                )
            )
        return out


@dataclass(frozen=True)
class RawJudgeResponse:
    text: str
    model_id: str
    latency_ms: float
    token_usage: Optional[dict] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "model_id": self.model_id,
            "latency_ms": self.latency_ms,
            "token_usage": self.token_usage,
        }


# ---------------------------------------------------------------------------
# Wire format

_TAG_NAMES = {t.value for t in Tag}
_PAIR_RE = re.compile(r"<([A-Za-z_]+)>(.*?)</\1>", re.IGNORECASE | re.DOTALL)
_CITATION_RE = re.compile(r"\s*(\[[^\[\]]+\])\s*$")


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def parse_tagged_response(text: str) -> list[LegalDataPoint]:
    """Extract tagged LDPs from model output, ignoring surrounding prose.

    Tag names are case-insensitive.  A trailing bracketed token such as
    "[par_12]" is pulled out of the text into the citation field, so parsed
    LDP texts never end with one.
    """
    ldps = []
    matched_any = False
    for m in _PAIR_RE.finditer(text):
        matched_any = True
        name = m.group(1).lower()
        line = _line_of(text, m.start())
        if name not in _TAG_NAMES:
            raise MalformedTagError(f"unknown tag <{m.group(1)}>", line)
        body = m.group(2).strip()
        citation = None
        cit = _CITATION_RE.search(body)
        if cit:
            citation = cit.group(1)
            body = body[: cit.start()].strip()
        if not body:
            raise MalformedTagError(f"empty text inside <{name}>", line)
        ldps.append(
            LegalDataPoint(text=body, tag=Tag(name), source=Source.MACHINE, citation=citation)
        )
    if not ldps:
        if matched_any:
            raise EmptyEvaluationError("response contained tags but no usable LDPs")
        raise EmptyEvaluationError("response contained no tagged lines")
    return ldps


def render_tagged(ldps: Sequence[LegalDataPoint]) -> str:
    """Canonical wire form: one LDP per line, citation reattached inline."""
    lines = []
    for ldp in ldps:
        body = ldp.text if ldp.citation is None else f"{ldp.text} {ldp.citation}"
        lines.append(f"<{ldp.tag.value}>{body}</{ldp.tag.value}>")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Prompts

_ROLE = (
    "You are a legal expert reviewing an answer to a question about a contract."
)

_TASK = """\
Break the answer into legal data points. A legal data point is one \
self-contained piece of legal information. Judge each one against the \
contract{and_reference}:
- correct: accurate and relevant to the question
- incorrect: contradicted by the contract
- irrelevant: accurate or not, it does not help answer the question
Then add a legal data point tagged missing for each material piece of \
information the answer should have included but did not. Cite the supporting \
paragraph in square brackets when you can, for example [par_3]."""

FORMAT_SECTION = """\
Output format:
Write one legal data point per line, wrapped in its tag, and nothing else:
<correct>...</correct>
<incorrect>...</incorrect>
<irrelevant>...</irrelevant>
<missing>...</missing>"""

FORMAT_REMINDER = (
    "Your previous reply could not be parsed. Reply again following the "
    "output format exactly.\n\n" + FORMAT_SECTION
)

ANSWER_HEADER = "Answer under review:"


def build_eval_prompt(doc: ContractDoc, qa: QAPair) -> str:
    """Segmentation and tagging in a single prompt, format grammar last."""
    parts = [
        _ROLE,
        "",
        "Contract:",
        doc.text,
        "",
        "Question:",
        qa.question,
        "",
        ANSWER_HEADER,
        qa.answer,
        "",
    ]
    if qa.ground_truth:
        parts += ["Reference answer:", qa.ground_truth, ""]
    and_ref = " and the reference answer" if qa.ground_truth else ""
    parts += [_TASK.format(and_reference=and_ref), "", FORMAT_SECTION]
    return "\n".join(parts)


def build_verify_prompt(doc: ContractDoc, qa: QAPair, evaluation: Evaluation) -> str:
    """Second pass: show the first tagging and ask for a checked revision."""
    parts = [
        _ROLE,
        "",
        "Contract:",
        doc.text,
        "",
        "Question:",
        qa.question,
        "",
        ANSWER_HEADER,
        qa.answer,
        "",
        "A first tagging of this answer:",
        render_tagged(evaluation.ldps),
        "",
        "Re-examine every legal data point against the contract. Fix any tag "
        "that does not hold up, drop duplicates, and add anything material "
        "that was overlooked. Reply with the full corrected tagging.",
        "",
        FORMAT_SECTION,
    ]
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# Backends


class ChatBackend(Protocol):
    model_id: str

    def complete(self, prompt: str, *, key: Optional[str] = None) -> RawJudgeResponse: ...


class HttpChatBackend:
    """Chat-completions style endpoint client.  Single shot; the runner owns
    retry policy."""

    def __init__(self, cfg: JudgeConfig, transport: Optional[httpx.BaseTransport] = None):
        if not cfg.endpoint_url:
            raise ValueError("endpoint_url is required for the HTTP backend")
        self.cfg = cfg
        self.model_id = cfg.model_id
        self._transport = transport

    def _headers(self) -> dict[str, str]:
        headers = {"content-type": "application/json"}
        if self.cfg.api_key_ref:
            key = os.environ.get(self.cfg.api_key_ref)
            if not key:
                raise AuthenticationError(
                    f"environment variable {self.cfg.api_key_ref} is not set"
                )
            headers["authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str, *, key: Optional[str] = None) -> RawJudgeResponse:
        body = {
            "model": self.cfg.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        }
        started = time.perf_counter()
        try:
            with httpx.Client(
                transport=self._transport, timeout=self.cfg.request_timeout
            ) as client:
                resp = client.post(self.cfg.endpoint_url, json=body, headers=self._headers())
        except httpx.HTTPError as exc:
            raise ProviderError(f"judge request failed: {exc}") from exc
        latency_ms = (time.perf_counter() - started) * 1000.0
        if resp.status_code in (401, 403):
            raise AuthenticationError(f"judge endpoint rejected credentials: {resp.status_code}")
        if resp.status_code != 200:
            raise ProviderError(f"judge endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed judge response: {exc}") from exc
        return RawJudgeResponse(
            text=text,
            model_id=self.cfg.model_id,
            latency_ms=latency_ms,
            token_usage=payload.get("usage"),
        )


def _extract_answer(prompt: str) -> str:
    marker = ANSWER_HEADER + "\n"
    start = prompt.find(marker)
    if start < 0:
        return ""
    start += len(marker)
    end = prompt.find("\n\n", start)
    return prompt[start:end] if end > 0 else prompt[start:]


_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def sentence_tagging(prompt: str, key: Optional[str] = None) -> str:
    """Default scripted behavior: split the answer into sentences, tag all
    correct.  Assumes the standard prompt layout."""
    answer = _extract_answer(prompt)
    sentences = [s.strip() for s in _SENTENCE_RE.split(answer) if s.strip()]
    if not sentences and answer.strip():
        sentences = [answer.strip()]
    return "\n".join(f"<correct>{s}</correct>" for s in sentences)


class ScriptedBackend:
    """Offline judge for tests and demos: responses come from a script.

    The script maps a request key (the qa id for evaluations) to the reply
    text.  Keys absent from the script fall back to ``default``, a callable
    of (prompt, key).  Fully deterministic, zero latency.
    """

    model_id = "scripted"

    def __init__(
        self,
        script: Optional[Mapping[str, str]] = None,
        default: Optional[Callable[[str, Optional[str]], str]] = sentence_tagging,
    ):
        self._script = dict(script or {})
        self._default = default

    def complete(self, prompt: str, *, key: Optional[str] = None) -> RawJudgeResponse:
        if key is not None and key in self._script:
            text = self._script[key]
        elif self._default is not None:
            text = self._default(prompt, key)
        else:
            raise ProviderError(f"no scripted response for key {key!r}")
        return RawJudgeResponse(text=text, model_id=self.model_id, latency_ms=0.0)


# ---------------------------------------------------------------------------
# Runner

RawSink = Callable[[str, str, RawJudgeResponse], None]


@dataclass(frozen=True)
class VerifyOutcome:
    evaluation: Evaluation
    warning: Optional[str] = None


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class JudgeRunner:
    """Drives a backend through evaluation calls with retries.

    Transport failures are retried up to ``max_retries`` times with
    exponential backoff; authentication failures are not retried.  A parse
    failure triggers exactly one re-prompt carrying a format reminder.
    """

    def __init__(
        self,
        cfg: JudgeConfig,
        backend: ChatBackend,
        clock: Callable[[], datetime] = _utcnow,
        sleep: Callable[[float], None] = time.sleep,
        raw_sink: Optional[RawSink] = None,
        backoff_base: float = 0.5,
        backoff_cap: float = 60.0,
    ):
        problems = cfg.check()
        if problems:
            raise ValueError("; ".join(f"{v.path}: {v.message}" for v in problems))
        self.cfg = cfg
        self.backend = backend
        self._clock = clock
        self._sleep = sleep
        self._raw_sink = raw_sink
        self._backoff_base = backoff_base
        self._backoff_cap = backoff_cap

    def _complete(self, prompt: str, qa_id: str, purpose: str) -> RawJudgeResponse:
        last: Optional[ProviderError] = None
        for attempt in range(self.cfg.max_retries + 1):
            try:
                raw = self.backend.complete(prompt, key=qa_id)
            except AuthenticationError:
                raise
            except ProviderError as exc:
                last = exc
                if attempt < self.cfg.max_retries:
                    self._sleep(min(self._backoff_base * (2**attempt), self._backoff_cap))
                continue
            if self._raw_sink:
                self._raw_sink(qa_id, purpose, raw)
            return raw
        raise ProviderError(
            f"judge failed after {self.cfg.max_retries + 1} attempts: {last}"
        ) from last

    def evaluate(self, doc: ContractDoc, qa: QAPair) -> Evaluation:
        """Segment and tag one answer; one re-prompt on a parse failure."""
        if doc.id != qa.contract_id:
            raise ValueError(f"qa {qa.id} does not belong to contract {doc.id}")
        prompt = build_eval_prompt(doc, qa)
        raw = self._complete(prompt, qa.id, "evaluate")
        try:
            ldps = parse_tagged_response(raw.text)
        except ParseError:
            retry_prompt = prompt + "\n\n" + FORMAT_REMINDER
            raw = self._complete(retry_prompt, qa.id, "evaluate_retry")
            ldps = parse_tagged_response(raw.text)
        return Evaluation(
            qa_id=qa.id,
            evaluator_id=self.backend.model_id,
            evaluator_kind=Source.MACHINE,
            ldps=tuple(ldps),
            created_at=self._clock(),
        )

    def evaluate_batch(
        self, items: Sequence[tuple[ContractDoc, QAPair]]
    ) -> list[Evaluation]:
        """Evaluate many answers with bounded parallelism, preserving input
        order in the result."""
        if self.cfg.parallelism == 1:
            return [self.evaluate(doc, qa) for doc, qa in items]
        with ThreadPoolExecutor(max_workers=self.cfg.parallelism) as pool:
            return list(pool.map(lambda item: self.evaluate(*item), items))

    def verify_chain(self, doc: ContractDoc, qa: QAPair, evaluation: Evaluation) -> VerifyOutcome:
        """Ask the judge to re-examine its own tagging.

        Any failure leaves the original evaluation in place with a warning
        instead of sinking the run.
        """
        prompt = build_verify_prompt(doc, qa, evaluation)
        try:
            raw = self._complete(prompt, qa.id, "verify")
            ldps = parse_tagged_response(raw.text)
        except (ProviderError, ParseError) as exc:
            return VerifyOutcome(evaluation=evaluation, warning=str(exc))
        return VerifyOutcome(
            evaluation=replace(evaluation, ldps=tuple(ldps), created_at=self._clock()),
            warning=None,
        )
