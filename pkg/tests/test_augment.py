"""Tests for ldpeval.augment."""

import random

import pytest

from ldpeval import augment
from ldpeval.augment import (
    AugmentationError,
    AugmentationKind,
    MockRewriter,
    add_extra_info,
    apply_transform,
    change_value,
    contradicting_info,
    incomplete_info,
    remove_info,
)
from ldpeval.domain import (
    Evaluation,
    LegalDataPoint,
    QAPair,
    Source,
    Tag,
    tag_counts,
    validate,
)

from .conftest import FIXED_TS, ldp


_SENTENCE_POOL = (
    "The lease term lasts 5 years.",
    "Rent is 1200 dollars per month.",
    "The agreement is governed by Florida law.",
    "Notice must be given 30 days in advance.",
    "The landlord is Acme Properties.",
    "Renewal requires written consent from both parties.",
    "A deposit of 2400 dollars is due at signing.",
    "The premises are located in Tampa.",
)


def synth_example(rng, n_sentences=3, extras=()):
    """QA pair whose answer is a run of pool sentences, one correct LDP each."""
    sentences = rng.sample(_SENTENCE_POOL, n_sentences)
    answer = " ".join(sentences)
    ldps = [ldp(s, Tag.CORRECT) for s in sentences]
    ldps += [ldp(text, tag) for text, tag in extras]
    qa = QAPair(
        id=f"qa-{rng.randrange(10**6)}",
        contract_id="c-1",
        question="What are the key terms of the lease?",
        answer=answer,
        ground_truth=answer,
    )
    ev = Evaluation(
        qa_id=qa.id,
        evaluator_id="judge-a",
        evaluator_kind=Source.MACHINE,
        ldps=tuple(ldps),
        created_at=FIXED_TS,
    )
    return qa, ev


EXPECTED_DELTAS = {
    AugmentationKind.REMOVE_INFO: (-1, 0, 0, +1),
    AugmentationKind.INCOMPLETE_INFO: (-1, 0, 0, +1),
    AugmentationKind.CHANGE_VALUE: (-1, +1, 0, 0),
    AugmentationKind.ADD_EXTRA_INFO: (0, +1, 0, 0),
}


def delta(before, after):
    b, a = tag_counts(before), tag_counts(after)
    return (
        a.n_correct - b.n_correct,
        a.n_incorrect - b.n_incorrect,
        a.n_irrelevant - b.n_irrelevant,
        a.n_missing - b.n_missing,
    )


class TestRemoveInfo:
    def test_span_removed_and_retagged(self):
        qa, ev = synth_example(random.Random(1))
        ex = remove_info(qa, ev, seed=7)
        assert ex.kind is AugmentationKind.REMOVE_INFO
        missing = [l for l in ex.evaluation.ldps if l.tag is Tag.MISSING]
        assert len(missing) == 1
        assert missing[0].text.lower() not in ex.answer.lower()
        assert delta(ev, ex.evaluation) == (-1, 0, 0, +1)

    def test_other_ldps_untouched(self):
        qa, ev = synth_example(random.Random(2), extras=[("Side remark.", Tag.IRRELEVANT)])
        ex = remove_info(qa, ev, seed=0)
        changed = [
            i
            for i, (old, new) in enumerate(zip(ev.ldps, ex.evaluation.ldps))
            if (old.text, old.tag) != (new.text, new.tag)
        ]
        assert len(changed) == 1
        assert ev.ldps[changed[0]].tag is Tag.CORRECT

    def test_deterministic_under_seed(self):
        qa, ev = synth_example(random.Random(3))
        assert remove_info(qa, ev, seed=5) == remove_info(qa, ev, seed=5)

    def test_no_located_correct_raises(self):
        qa, ev = synth_example(random.Random(4))
        qa2 = QAPair(qa.id, qa.contract_id, qa.question, "Entirely different text.")
        with pytest.raises(AugmentationError, match="no correct LDP"):
            remove_info(qa2, ev, seed=0)

    def test_single_sentence_answer_raises(self):
        qa, ev = synth_example(random.Random(5), n_sentences=1)
        with pytest.raises(AugmentationError, match="empty answer"):
            remove_info(qa, ev, seed=0)


class TestIncompleteInfo:
    def test_span_blurred(self):
        qa, ev = synth_example(random.Random(1))
        ex = incomplete_info(qa, ev, seed=7, rewriter=MockRewriter())
        missing = [l for l in ex.evaluation.ldps if l.tag is Tag.MISSING]
        assert len(missing) == 1
        assert missing[0].text.lower() not in ex.answer.lower()
        assert delta(ev, ex.evaluation) == (-1, 0, 0, +1)
        assert ex.answer != qa.answer

    def test_ldp_text_is_preserved(self):
        qa, ev = synth_example(random.Random(2))
        ex = incomplete_info(qa, ev, seed=1, rewriter=MockRewriter())
        assert {l.text for l in ex.evaluation.ldps} == {l.text for l in ev.ldps}

    def test_unchanged_rewrite_raises(self):
        class Lazy(MockRewriter):
            def make_incomplete(self, text):
                return text

        qa, ev = synth_example(random.Random(3))
        with pytest.raises(AugmentationError, match="unchanged"):
            incomplete_info(qa, ev, seed=0, rewriter=Lazy())

    def test_empty_rewrite_raises(self):
        class Empty(MockRewriter):
            def make_incomplete(self, text):
                return "  "

        qa, ev = synth_example(random.Random(3))
        with pytest.raises(AugmentationError, match="empty"):
            incomplete_info(qa, ev, seed=0, rewriter=Empty())


class TestChangeValue:
    def test_value_swapped_and_retagged(self):
        qa, ev = synth_example(random.Random(1))
        ex = change_value(qa, ev, seed=7)
        assert delta(ev, ex.evaluation) == (-1, +1, 0, 0)
        incorrect = [l for l in ex.evaluation.ldps if l.tag is Tag.INCORRECT]
        assert len(incorrect) == 1
        # The corrupted LDP's claim must match the corrupted answer.
        assert incorrect[0].text in ex.answer

    def test_old_value_gone(self):
        qa, ev = synth_example(random.Random(2))
        ex = change_value(qa, ev, seed=3)
        old, new = ex.edit_log.split(" to ")
        old_value = old.split("changed value ")[1].strip("'")
        assert old_value not in ex.answer.split()

    def test_number_mutation_differs(self):
        for value in ["6", "1999", "4.5", "1,000", "0"]:
            assert augment._mutate_number(value) != value

    def test_no_eligible_value_raises(self):
        qa = QAPair("qa-x", "c-1", "Q?", "no numbers or names here at all.")
        ev = Evaluation(
            qa_id="qa-x",
            evaluator_id="judge-a",
            evaluator_kind=Source.MACHINE,
            ldps=(ldp("no numbers or names here at all.", Tag.CORRECT),),
            created_at=FIXED_TS,
        )
        with pytest.raises(AugmentationError, match="no number or entity"):
            change_value(qa, ev, seed=0)

    def test_whole_word_replacement(self):
        # "6" inside "1996" must survive a swap of the standalone "6".
        qa = QAPair("qa-y", "c-1", "Q?", "Signed on day 6 of 1996.")
        ev = Evaluation(
            qa_id="qa-y",
            evaluator_id="judge-a",
            evaluator_kind=Source.MACHINE,
            ldps=(ldp("Signed on day 6 of 1996.", Tag.CORRECT),),
            created_at=FIXED_TS,
        )
        ex = None
        for seed in range(20):
            candidate = change_value(qa, ev, seed=seed)
            if "6 of" not in candidate.answer:
                ex = candidate
                break
        assert ex is not None
        assert "1996" in ex.answer or "199" in ex.answer


class TestAddExtraInfo:
    def test_appends_incorrect_ldp(self):
        qa, ev = synth_example(random.Random(1))
        ex = add_extra_info(qa, ev, seed=7, rewriter=MockRewriter())
        assert ex.answer.startswith(qa.answer.rstrip())
        assert delta(ev, ex.evaluation) == (0, +1, 0, 0)
        added = ex.evaluation.ldps[-1]
        assert added.tag is Tag.INCORRECT
        assert added.text in ex.answer

    def test_empty_extra_raises(self):
        class Empty(MockRewriter):
            def extra_sentences(self, question, answer):
                return ""

        qa, ev = synth_example(random.Random(2))
        with pytest.raises(AugmentationError, match="no extra"):
            add_extra_info(qa, ev, seed=0, rewriter=Empty())

    def test_too_many_sentences_raises(self):
        class Rambling(MockRewriter):
            def extra_sentences(self, question, answer):
                return "One. Two. Three."

        qa, ev = synth_example(random.Random(2))
        with pytest.raises(AugmentationError, match="1 or 2 sentences"):
            add_extra_info(qa, ev, seed=0, rewriter=Rambling())


class TestContradictingInfo:
    def test_all_correct_flip_to_missing(self):
        qa, ev = synth_example(random.Random(1), extras=[("Aside.", Tag.IRRELEVANT)])
        ex = contradicting_info(qa, ev, seed=7, rewriter=MockRewriter())
        counts = tag_counts(ex.evaluation)
        before = tag_counts(ev)
        assert counts.n_correct == 0
        assert counts.n_missing == before.n_missing + before.n_correct
        assert counts.n_irrelevant == before.n_irrelevant
        assert counts.n_incorrect >= before.n_incorrect + 1

    def test_assertions_become_incorrect_ldps(self):
        qa, ev = synth_example(random.Random(2))
        ex = contradicting_info(qa, ev, seed=0, rewriter=MockRewriter())
        new_ldps = ex.evaluation.ldps[len(ev.ldps):]
        assert all(l.tag is Tag.INCORRECT for l in new_ldps)
        assert all(l.text in ex.answer for l in new_ldps)
        assert ex.answer != qa.answer

    def test_requires_ground_truth(self):
        qa, ev = synth_example(random.Random(3))
        bare = QAPair(qa.id, qa.contract_id, qa.question, qa.answer, ground_truth=None)
        with pytest.raises(AugmentationError, match="ground_truth"):
            contradicting_info(bare, ev, seed=0, rewriter=MockRewriter())

    def test_no_assertions_raises(self):
        class Silent(MockRewriter):
            def contradict(self, ground_truth):
                return ["", "  "]

        qa, ev = synth_example(random.Random(3))
        with pytest.raises(AugmentationError, match="no assertions"):
            contradicting_info(qa, ev, seed=0, rewriter=Silent())


class TestMockRewriter:
    def test_make_incomplete_shortens(self):
        text = "Notice must be given 30 days in advance."
        out = MockRewriter().make_incomplete(text)
        assert out != text
        assert len(out.split()) < len(text.split())

    def test_make_incomplete_single_word(self):
        out = MockRewriter().make_incomplete("Yes.")
        assert out and out != "Yes."

    def test_contradict_negates(self):
        out = MockRewriter().contradict("Rent is due monthly. The tenant pays utilities.")
        assert out == [
            "Rent is not due monthly.",
            "It is not the case that the tenant pays utilities.",
        ]

    def test_determinism(self):
        r = MockRewriter()
        assert r.extra_sentences("q", "a") == r.extra_sentences("q", "a")
        assert r.make_incomplete("a b c d") == r.make_incomplete("a b c d")


class TestApplyTransform:
    @pytest.mark.parametrize("kind", list(AugmentationKind))
    def test_examples_stay_valid(self, kind):
        qa, ev = synth_example(random.Random(11))
        ex = apply_transform(kind, qa, ev, seed=3)
        assert validate(ex.evaluation) == []
        assert ex.qa_id == qa.id
        assert ex.evaluation.qa_id == qa.id

    @pytest.mark.parametrize("kind", list(EXPECTED_DELTAS))
    def test_fixed_deltas(self, kind):
        qa, ev = synth_example(random.Random(12))
        ex = apply_transform(kind, qa, ev, seed=9)
        assert delta(ev, ex.evaluation) == EXPECTED_DELTAS[kind]

    def test_contradicting_delta_shape(self):
        qa, ev = synth_example(random.Random(13), extras=[("Stray.", Tag.INCORRECT)])
        ex = apply_transform(AugmentationKind.CONTRADICTING_INFO, qa, ev, seed=9)
        d = delta(ev, ex.evaluation)
        n_correct = sum(1 for l in ev.ldps if l.tag is Tag.CORRECT)
        assert d[0] == -n_correct
        assert d[1] >= 1
        assert d[2] == 0
        assert d[3] == n_correct

    def test_sweep_conformance(self):
        rng = random.Random(99)
        for trial in range(40):
            qa, ev = synth_example(rng, n_sentences=rng.randint(2, 4))
            for kind in AugmentationKind:
                ex = apply_transform(kind, qa, ev, seed=trial)
                assert validate(ex.evaluation) == []
                if kind in EXPECTED_DELTAS:
                    assert delta(ev, ex.evaluation) == EXPECTED_DELTAS[kind]

    def test_round_trip_dict(self):
        qa, ev = synth_example(random.Random(14))
        ex = apply_transform(AugmentationKind.REMOVE_INFO, qa, ev, seed=3)
        d = ex.to_dict()
        assert d["kind"] == "remove_info"
        assert d["evaluation"]["qa_id"] == qa.id
