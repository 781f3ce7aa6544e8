"""Tests for ldpeval.analysis."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldpeval.analysis import (
    CorrelationRow,
    IAACell,
    TriageConfig,
    TriageReport,
    correlation_report,
    iaa,
    render_correlation_csv,
    render_iaa_csv,
    render_time_savings_csv,
    render_triage_csv,
    review_quarter_scores,
    time_savings,
    triage,
)
from ldpeval.domain import HumanReview, ReviewMode, ScoreSet, Source, Tag
from ldpeval.errors import DataValidationError

from .conftest import evaluation


def manual_review(qa_id, reviewer_id, correctness, relevance):
    return HumanReview(
        qa_id=qa_id,
        reviewer_id=reviewer_id,
        mode=ReviewMode.MANUAL,
        correctness_grade=correctness,
        relevance_grade=relevance,
    )


def guided_review(qa_id, reviewer_id, tags):
    ev = evaluation(qa_id, tags, evaluator_id=reviewer_id, kind=Source.HUMAN)
    return HumanReview(
        qa_id=qa_id,
        reviewer_id=reviewer_id,
        mode=ReviewMode.LDP_GUIDED,
        evaluation=ev,
    )


class TestReviewQuarterScores:
    def test_manual_uses_grade_conversion(self):
        review = manual_review("qa-1", "ann", correctness=5, relevance=3)
        assert review_quarter_scores(review) == (1.0, 0.5)

    def test_guided_buckets_tag_scores(self):
        # 2 correct, 1 incorrect: correctness 2/3 -> 0.5 bucket;
        # precision 2/2=1, recall 2/2=1, f1 1 -> 1.0 bucket.
        review = guided_review("qa-1", "ann", [Tag.CORRECT, Tag.CORRECT, Tag.INCORRECT])
        assert review_quarter_scores(review) == (0.5, 1.0)

    def test_guided_absent_scores(self):
        review = guided_review("qa-1", "ann", [Tag.IRRELEVANT])
        assert review_quarter_scores(review) == (None, None)


class TestIaa:
    def test_eleven_of_nineteen(self):
        a, b = [], []
        for i in range(19):
            a.append(manual_review(f"qa-{i}", "ann-a", correctness=5, relevance=5))
            grade = 5 if i < 11 else 1
            b.append(manual_review(f"qa-{i}", "ann-b", correctness=grade, relevance=5))
        (cell,) = iaa(a, b)
        assert cell.contract_type == "all"
        assert cell.n_pairs == 19
        assert abs(cell.correctness_agreement - 0.579) < 1e-3
        assert cell.correctness_agreement == 11 / 19
        assert cell.relevance_agreement == 1.0

    def test_identical_reviews_agree_everywhere(self):
        a = [manual_review(f"qa-{i}", "ann-a", 1 + i % 5, 1 + (i * 2) % 5) for i in range(8)]
        b = [manual_review(r.qa_id, "ann-b", r.correctness_grade, r.relevance_grade) for r in a]
        (cell,) = iaa(a, b)
        assert cell.correctness_agreement == 1.0
        assert cell.relevance_agreement == 1.0

    def test_seven_of_ten_relevance(self):
        a, b = [], []
        for i in range(10):
            a.append(manual_review(f"qa-{i}", "ann-a", 3, 4))
            b.append(manual_review(f"qa-{i}", "ann-b", 3, 4 if i < 7 else 2))
        (cell,) = iaa(a, b)
        assert cell.relevance_agreement == 0.7
        assert cell.correctness_agreement == 1.0

    def test_grouped_by_contract_type(self):
        a, b = [], []
        types = {}
        for i in range(6):
            qa_id = f"qa-{i}"
            types[qa_id] = "lease" if i < 4 else "nda"
            a.append(manual_review(qa_id, "ann-a", 5, 5))
            agree = i in (0, 1, 4)
            b.append(manual_review(qa_id, "ann-b", 5 if agree else 2, 5))
        cells = iaa(a, b, group_by_contract_type=types)
        assert [c.contract_type for c in cells] == ["lease", "nda"]
        lease, nda = cells
        assert (lease.n_pairs, lease.correctness_agreement) == (4, 0.5)
        assert (nda.n_pairs, nda.correctness_agreement) == (2, 0.5)

    def test_guided_reviews_compare_buckets(self):
        a = [guided_review("qa-0", "ann-a", [Tag.CORRECT, Tag.CORRECT, Tag.INCORRECT])]
        b = [guided_review("qa-0", "ann-b", [Tag.CORRECT, Tag.INCORRECT, Tag.IRRELEVANT])]
        (cell,) = iaa(a, b)
        # a: correctness 2/3 -> 0.5; b: 1/2 -> 0.5 (equal buckets).
        assert cell.correctness_agreement == 1.0
        # a: f1 1.0 -> 1.0; b: p=1/2 r=1/1 f1=2/3 -> 0.5 (different).
        assert cell.relevance_agreement == 0.0

    def test_both_absent_counts_as_agreement(self):
        a = [guided_review("qa-0", "ann-a", [Tag.IRRELEVANT])]
        b = [guided_review("qa-0", "ann-b", [Tag.IRRELEVANT, Tag.IRRELEVANT])]
        (cell,) = iaa(a, b)
        assert cell.correctness_agreement == 1.0
        assert cell.relevance_agreement == 1.0

    def test_one_absent_is_disagreement(self):
        a = [guided_review("qa-0", "ann-a", [Tag.IRRELEVANT])]
        b = [guided_review("qa-0", "ann-b", [Tag.CORRECT])]
        (cell,) = iaa(a, b)
        assert cell.correctness_agreement == 0.0

    def test_mismatched_sets_raise(self):
        a = [manual_review("qa-0", "ann-a", 3, 3)]
        b = [manual_review("qa-1", "ann-b", 3, 3)]
        with pytest.raises(DataValidationError, match="different QA sets"):
            iaa(a, b)

    def test_duplicate_review_raises(self):
        a = [manual_review("qa-0", "ann-a", 3, 3), manual_review("qa-0", "ann-a", 4, 4)]
        b = [manual_review("qa-0", "ann-b", 3, 3)]
        with pytest.raises(DataValidationError, match="more than one review"):
            iaa(a, b)

    def test_empty_raises(self):
        with pytest.raises(DataValidationError, match="no reviews"):
            iaa([], [])

    def test_unknown_contract_type_raises(self):
        a = [manual_review("qa-0", "ann-a", 3, 3)]
        b = [manual_review("qa-0", "ann-b", 3, 3)]
        with pytest.raises(DataValidationError, match="no contract type"):
            iaa(a, b, group_by_contract_type={})

    @given(st.lists(st.booleans(), min_size=1, max_size=40))
    def test_agreement_is_exact_fraction(self, agreements):
        a, b = [], []
        for i, same in enumerate(agreements):
            a.append(manual_review(f"qa-{i}", "ann-a", 5, 5))
            b.append(manual_review(f"qa-{i}", "ann-b", 5 if same else 1, 5))
        (cell,) = iaa(a, b)
        # The float is exactly k/n (one division of exact integers).
        assert cell.correctness_agreement == sum(agreements) / len(agreements)
        assert Fraction(sum(agreements), len(agreements)) == pytest.approx(
            cell.correctness_agreement
        )


class TestTriage:
    def test_threshold_rule(self):
        scores = {
            "qa-pass": ScoreSet(correctness=1.0, precision=0.9, recall=0.9, f1=0.85),
            "qa-low-f1": ScoreSet(correctness=1.0, precision=0.9, recall=0.9, f1=0.84),
            "qa-low-corr": ScoreSet(correctness=0.99, precision=0.95, recall=0.95, f1=0.95),
        }
        report = triage(scores, TriageConfig(relevance_threshold=0.85))
        assert report.cleared == ("qa-pass",)
        assert report.flagged == ("qa-low-f1", "qa-low-corr")
        assert report.total == 3

    def test_absent_scores_flag(self):
        scores = {
            "qa-no-corr": ScoreSet(correctness=None, precision=1.0, recall=1.0, f1=1.0),
            "qa-no-f1": ScoreSet(correctness=1.0, precision=None, recall=1.0, f1=None),
        }
        report = triage(scores, TriageConfig(relevance_threshold=0.5))
        assert report.cleared == ()
        assert len(report.flagged) == 2

    def test_input_order_preserved(self):
        scores = {
            f"qa-{i}": ScoreSet(correctness=1.0, precision=1.0, recall=1.0, f1=1.0)
            for i in (3, 1, 2)
        }
        report = triage(scores, TriageConfig(relevance_threshold=0.0))
        assert report.cleared == ("qa-3", "qa-1", "qa-2")

    @given(
        st.lists(
            st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=30
        ),
        st.floats(0, 1),
        st.floats(0, 1),
    )
    def test_monotone_in_threshold(self, pairs, lo, hi):
        lo, hi = min(lo, hi), max(lo, hi)
        scores = {
            f"qa-{i}": ScoreSet(correctness=c, precision=f, recall=f, f1=f)
            for i, (c, f) in enumerate(pairs)
        }
        loose = triage(scores, TriageConfig(relevance_threshold=lo))
        strict = triage(scores, TriageConfig(relevance_threshold=hi))
        assert set(strict.cleared) <= set(loose.cleared)

    def test_bad_threshold_rejected(self):
        with pytest.raises(ValueError, match="within"):
            TriageConfig(relevance_threshold=1.5)
        with pytest.raises(ValueError, match="within"):
            TriageConfig(relevance_threshold=0.5, correctness_threshold=-0.1)

    def test_partition_invariant_enforced(self):
        with pytest.raises(ValueError, match="partition"):
            TriageReport(total=3, cleared=("a",), flagged=("b",))


class TestTimeSavings:
    def test_reviewer_a_row(self):
        report = TriageReport(
            total=150, cleared=tuple(f"c{i}" for i in range(51)),
            flagged=tuple(f"f{i}" for i in range(99)),
        )
        out = time_savings(report, 8.25)
        assert out.estimated_hours == 5.45
        assert out.baseline_hours == 8.25

    def test_reviewer_b_row(self):
        report = TriageReport(
            total=150, cleared=tuple(f"c{i}" for i in range(51)),
            flagged=tuple(f"f{i}" for i in range(99)),
        )
        assert time_savings(report, 7.55).estimated_hours == 4.98

    def test_nothing_cleared_keeps_baseline(self):
        report = TriageReport(total=4, cleared=(), flagged=("a", "b", "c", "d"))
        assert time_savings(report, 6.0).estimated_hours == 6.0

    def test_non_positive_baseline_raises(self):
        report = TriageReport(total=1, cleared=("a",), flagged=())
        with pytest.raises(ValueError, match="positive"):
            time_savings(report, 0.0)

    @given(
        st.integers(0, 50),
        st.integers(0, 50),
        st.floats(0.01, 100).map(lambda h: round(h, 2)),
    )
    def test_estimate_never_exceeds_baseline(self, n_cleared, n_flagged, hours):
        total = n_cleared + n_flagged
        if total == 0:
            return
        report = TriageReport(
            total=total,
            cleared=tuple(f"c{i}" for i in range(n_cleared)),
            flagged=tuple(f"f{i}" for i in range(n_flagged)),
        )
        out = time_savings(report, hours)
        assert out.estimated_hours <= hours + 0.005
        if n_cleared == 0:
            assert out.estimated_hours == round(hours, 2)


class TestCorrelationReport:
    def test_row_per_method(self):
        human = [1.0, 0.75, 0.5, 0.25, 0.0]
        rows = correlation_report(
            {"same": list(human), "anti": [0.0, 0.25, 0.5, 0.75, 1.0]}, human
        )
        assert [r.method for r in rows] == ["same", "anti"]
        assert rows[0].result.r == pytest.approx(1.0)
        assert rows[0].bucketed_accuracy == 1.0
        assert rows[1].result.r == pytest.approx(-1.0)

    def test_errors_propagate(self):
        with pytest.raises(ValueError):
            correlation_report({"m": [1.0, 1.0, 1.0]}, [1.0, 0.5, 0.25])


class TestCsvRendering:
    def test_iaa_csv(self):
        cells = [IAACell("lease", 19, 11 / 19, 1.0)]
        out = render_iaa_csv(cells)
        assert out == (
            "contract_type,n_pairs,correctness_agreement,relevance_agreement\n"
            "lease,19,0.579,1.000\n"
        )

    def test_triage_csv(self):
        report = TriageReport(total=3, cleared=("qa-1",), flagged=("qa-2", "qa-3"))
        assert render_triage_csv(report) == (
            "qa_id,status\nqa-1,cleared\nqa-2,flagged\nqa-3,flagged\n"
        )

    def test_time_savings_csv(self):
        report = TriageReport(
            total=150, cleared=tuple(f"c{i}" for i in range(51)),
            flagged=tuple(f"f{i}" for i in range(99)),
        )
        rows = [time_savings(report, 8.25), time_savings(report, 7.55)]
        assert render_time_savings_csv(rows) == (
            "baseline_hours,total,flagged,estimated_hours\n"
            "8.25,150,99,5.45\n"
            "7.55,150,99,4.98\n"
        )

    def test_time_savings_csv_requires_estimate(self):
        report = TriageReport(total=1, cleared=("a",), flagged=())
        with pytest.raises(ValueError, match="no time estimate"):
            render_time_savings_csv([report])

    def test_correlation_csv_shape(self):
        human = [1.0, 0.75, 0.5, 0.25, 0.0]
        rows = correlation_report({"m": list(human)}, human)
        out = render_correlation_csv(rows)
        header, line = out.strip().split("\n")
        assert header == "method,pearson_r,p_value,n,bucketed_accuracy"
        assert line.startswith("m,1.000,")
        assert line.endswith(",5,1.000")
