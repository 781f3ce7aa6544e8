"""Experiment-level statistics: reviewer agreement, triage, and report tables."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Optional, Sequence

from .domain import HumanReview, ReviewMode, ScoreSet, tag_counts
from .errors import DataValidationError
from .metrics import CorrelationResult, bucket, bucketed_accuracy, compute_scores, convert_grade, pearson


@dataclass(frozen=True)
class TriageConfig:
    relevance_threshold: float
    correctness_threshold: float = 1.0

    def __post_init__(self):
        for name in ("relevance_threshold", "correctness_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class TriageReport:
    total: int
    cleared: tuple[str, ...]
    flagged: tuple[str, ...]
    baseline_hours: Optional[float] = None
    estimated_hours: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "cleared", tuple(self.cleared))
        object.__setattr__(self, "flagged", tuple(self.flagged))
        if len(self.cleared) + len(self.flagged) != self.total:
            raise ValueError("cleared and flagged must partition the total")

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "cleared": list(self.cleared),
            "flagged": list(self.flagged),
            "baseline_hours": self.baseline_hours,
            "estimated_hours": self.estimated_hours,
        }


@dataclass(frozen=True)
class IAACell:
    contract_type: str
    n_pairs: int
    correctness_agreement: float
    relevance_agreement: float

    def to_dict(self) -> dict:
        return {
            "contract_type": self.contract_type,
            "n_pairs": self.n_pairs,
            "correctness_agreement": self.correctness_agreement,
            "relevance_agreement": self.relevance_agreement,
        }


@dataclass(frozen=True)
class CorrelationRow:
    method: str
    result: CorrelationResult
    bucketed_accuracy: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "r": self.result.r,
            "p_value": self.result.p_value,
            "n": self.result.n,
            "bucketed_accuracy": self.bucketed_accuracy,
        }


def review_quarter_scores(review: HumanReview) -> tuple[Optional[float], Optional[float]]:
    """Quarter-scale (correctness, relevance) pair for one review.

    Manual reviews convert their grades; tag-guided reviews derive scores
    from their tag counts and bucket correctness and F1.
    """
    if review.mode is ReviewMode.MANUAL:
        return (
            convert_grade(review.correctness_grade),
            convert_grade(review.relevance_grade),
        )
    scores = compute_scores(tag_counts(review.evaluation))
    correctness = bucket(scores.correctness) if scores.correctness is not None else None
    relevance = bucket(scores.f1) if scores.f1 is not None else None
    return correctness, relevance


def _index_reviews(reviews: Sequence[HumanReview], label: str) -> dict[str, HumanReview]:
    indexed = {}
    for review in reviews:
        if review.qa_id in indexed:
            raise DataValidationError(
                f"reviewer {label} has more than one review for {review.qa_id}"
            )
        indexed[review.qa_id] = review
    return indexed


def iaa(
    reviews_a: Sequence[HumanReview],
    reviews_b: Sequence[HumanReview],
    group_by_contract_type: Optional[Mapping[str, str]] = None,
) -> list[IAACell]:
    """Exact-match agreement between two reviewers on quarter scores.

    A pair agrees on a criterion when both quarter values are equal;
    two absent values also count as agreement.  With a qa_id to
    contract-type mapping, one cell per type is returned (sorted),
    otherwise a single "all" cell.
    """
    by_a = _index_reviews(reviews_a, "a")
    by_b = _index_reviews(reviews_b, "b")
    if set(by_a) != set(by_b):
        only_a = sorted(set(by_a) - set(by_b))
        only_b = sorted(set(by_b) - set(by_a))
        raise DataValidationError(
            f"reviewers cover different QA sets (only a: {only_a}, only b: {only_b})"
        )
    if not by_a:
        raise DataValidationError("no reviews to compare")

    groups: dict[str, list[str]] = {}
    for qa_id in by_a:
        if group_by_contract_type is None:
            key = "all"
        else:
            if qa_id not in group_by_contract_type:
                raise DataValidationError(f"no contract type known for {qa_id}")
            key = group_by_contract_type[qa_id]
        groups.setdefault(key, []).append(qa_id)

    cells = []
    for contract_type in sorted(groups):
        qa_ids = groups[contract_type]
        correct_hits = 0
        relevance_hits = 0
        for qa_id in qa_ids:
            ca, ra = review_quarter_scores(by_a[qa_id])
            cb, rb = review_quarter_scores(by_b[qa_id])
            correct_hits += ca == cb
            relevance_hits += ra == rb
        cells.append(
            IAACell(
                contract_type=contract_type,
                n_pairs=len(qa_ids),
                correctness_agreement=correct_hits / len(qa_ids),
                relevance_agreement=relevance_hits / len(qa_ids),
            )
        )
    return cells


def correlation_report(
    method_scores: Mapping[str, Sequence[float]], human: Sequence[float]
) -> list[CorrelationRow]:
    """One row per scoring method: Pearson against humans plus bucketed accuracy."""
    rows = []
    for method, scores in method_scores.items():
        rows.append(
            CorrelationRow(
                method=method,
                result=pearson(scores, human),
                bucketed_accuracy=bucketed_accuracy(scores, human),
            )
        )
    return rows


def triage(scores: Mapping[str, ScoreSet], cfg: TriageConfig) -> TriageReport:
    """Split QA pairs into cleared (no human review needed) and flagged.

    Cleared requires a present correctness equal to the correctness
    threshold and a present F1 at or above the relevance threshold;
    anything absent flags.  Input order is preserved in both lists.
    """
    cleared = []
    flagged = []
    for qa_id, score_set in scores.items():
        ok = (
            score_set.correctness is not None
            and score_set.correctness == cfg.correctness_threshold
            and score_set.f1 is not None
            and score_set.f1 >= cfg.relevance_threshold
        )
        (cleared if ok else flagged).append(qa_id)
    return TriageReport(total=len(scores), cleared=tuple(cleared), flagged=tuple(flagged))


def time_savings(report: TriageReport, baseline_hours: float) -> TriageReport:
    """Attach the proportional review-time estimate to a triage report.

    estimated = baseline × flagged / total, to 2 decimals with half-up
    rounding (decimal, not binary float, so 5.445 rounds to 5.45).
    """
    if baseline_hours <= 0:
        raise ValueError(f"baseline_hours must be positive, got {baseline_hours}")
    if report.total == 0:
        raise ValueError("cannot estimate over an empty report")
    estimate = (
        Decimal(str(baseline_hours))
        * Decimal(len(report.flagged))
        / Decimal(report.total)
    ).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return replace(report, baseline_hours=baseline_hours, estimated_hours=float(estimate))


def render_iaa_csv(cells: Sequence[IAACell]) -> str:
    lines = ["contract_type,n_pairs,correctness_agreement,relevance_agreement"]
    for cell in cells:
        lines.append(
            f"{cell.contract_type},{cell.n_pairs},"
            f"{cell.correctness_agreement:.3f},{cell.relevance_agreement:.3f}"
        )
    return "\n".join(lines) + "\n"


def render_correlation_csv(rows: Sequence[CorrelationRow]) -> str:
    lines = ["method,pearson_r,p_value,n,bucketed_accuracy"]
    for row in rows:
        lines.append(
            f"{row.method},{row.result.r:.3f},{row.result.p_value:.2e},"
            f"{row.result.n},{row.bucketed_accuracy:.3f}"
        )
    return "\n".join(lines) + "\n"


def render_triage_csv(report: TriageReport) -> str:
    lines = ["qa_id,status"]
    lines += [f"{qa_id},cleared" for qa_id in report.cleared]
    lines += [f"{qa_id},flagged" for qa_id in report.flagged]
    return "\n".join(lines) + "\n"


def render_time_savings_csv(reports: Sequence[TriageReport]) -> str:
    lines = ["baseline_hours,total,flagged,estimated_hours"]
    for report in reports:
        if report.baseline_hours is None or report.estimated_hours is None:
            raise ValueError("report carries no time estimate")
        lines.append(
            f"{report.baseline_hours},{report.total},"
            f"{len(report.flagged)},{report.estimated_hours:.2f}"
        )
    return "\n".join(lines) + "\n"
