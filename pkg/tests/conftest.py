from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from ldpeval.domain import Evaluation, LegalDataPoint, Source, Tag

FIXTURES = Path(__file__).parent / "fixtures"

FIXED_TS = datetime(2024, 1, 2, 3, 4, 5, tzinfo=timezone.utc)


def fixed_clock() -> datetime:
    return FIXED_TS


def ldp(text: str, tag: Tag, source: Source = Source.MACHINE, citation: str | None = None) -> LegalDataPoint:
    return LegalDataPoint(text=text, tag=tag, source=source, citation=citation)


def evaluation(
    qa_id: str,
    tags: list[Tag],
    *,
    evaluator_id: str = "judge-a",
    kind: Source = Source.MACHINE,
    texts: list[str] | None = None,
) -> Evaluation:
    points = []
    for n, t in enumerate(tags):
        text = texts[n] if texts else f"point {n} of {qa_id}"
        points.append(LegalDataPoint(text=text, tag=t, source=kind))
    return Evaluation(
        qa_id=qa_id,
        evaluator_id=evaluator_id,
        evaluator_kind=kind,
        ldps=tuple(points),
        created_at=FIXED_TS,
    )


@pytest.fixture
def hosting_corpus_dir() -> Path:
    return FIXTURES / "hosting"
