"""Combining several judges' evaluations of one answer into a single verdict.

Ballots are built per LDP by anchoring on the first evaluation and matching
every other judge's LDPs onto the anchors; a judge with no matching LDP
votes missing.  Three aggregation strategies are provided.  Reports color
tags for display: red incorrect, green correct, orange irrelevant, grey
missing.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .alignment import AlignConfig, Embedder, match_ldps
from .domain import Evaluation, LegalDataPoint, Source, Tag

# Severity order used for rule_based verdicts and majority tie breaks.
TAG_PRIORITY = (Tag.INCORRECT, Tag.MISSING, Tag.IRRELEVANT, Tag.CORRECT)

_PRIORITY_INDEX = {tag: i for i, tag in enumerate(TAG_PRIORITY)}


@dataclass(frozen=True)
class ColorMap:
    """Display colors for tags, swappable for other palettes."""

    colors: dict = field(
        default_factory=lambda: {
            Tag.INCORRECT: "red",
            Tag.CORRECT: "green",
            Tag.IRRELEVANT: "orange",
            Tag.MISSING: "grey",
        }
    )

    def color_for(self, tag: Tag) -> str:
        return self.colors[tag]

    def tag_for(self, color: str) -> Tag:
        for tag, c in self.colors.items():
            if c == color.lower():
                return tag
        raise ValueError(f"unknown color {color!r}")


class Strategy(enum.Enum):
    RULE_BASED = "rule_based"
    MAJORITY = "majority"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class JuryBallot:
    """One LDP's votes, aligned across the jury; votes[i] is judge_ids[i]'s tag."""

    ldp_text: str
    votes: tuple[Tag, ...]
    judge_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.votes) != len(self.judge_ids):
            raise ValueError("votes and judge_ids must have equal length")
        if not self.votes:
            raise ValueError("ballot needs at least one vote")


def rule_based(votes: Sequence[Tag]) -> Tag:
    """The most severe tag present wins."""
    if not votes:
        raise ValueError("no votes")
    return min(votes, key=_PRIORITY_INDEX.__getitem__)


def majority(votes: Sequence[Tag]) -> Tag:
    """The modal tag wins; ties fall back to severity order."""
    if not votes:
        raise ValueError("no votes")
    counts = Counter(votes)
    return min(counts, key=lambda t: (-counts[t], _PRIORITY_INDEX[t]))


def hybrid(votes: Sequence[Tag]) -> Tag:
    """Any incorrect vote wins outright; otherwise majority rules."""
    if not votes:
        raise ValueError("no votes")
    if Tag.INCORRECT in votes:
        return Tag.INCORRECT
    return majority(votes)


_STRATEGY_FN = {
    Strategy.RULE_BASED: rule_based,
    Strategy.MAJORITY: majority,
    Strategy.HYBRID: hybrid,
}


def decide(strategy: Strategy, votes: Sequence[Tag]) -> Tag:
    return _STRATEGY_FN[strategy](votes)


def _check_jury(evaluations: Sequence[Evaluation]) -> None:
    if len(evaluations) < 2:
        raise ValueError("a jury needs at least two evaluations")
    qa_ids = {e.qa_id for e in evaluations}
    if len(qa_ids) != 1:
        raise ValueError(f"evaluations must cover one qa_id, got {sorted(qa_ids)}")
    ids = [e.evaluator_id for e in evaluations]
    if len(set(ids)) != len(ids):
        raise ValueError("evaluator_ids must be distinct")


def build_ballots(
    evaluations: Sequence[Evaluation],
    cfg: AlignConfig | None = None,
    embedder: Embedder | None = None,
) -> list[JuryBallot]:
    """Align each judge's LDPs onto the first evaluation's LDPs.

    Anchor LDPs yield one ballot each; a judge whose evaluation has no
    match for an anchor votes missing.  LDPs of later judges that match no
    anchor spawn extra ballots where every other judge votes missing.
    """
    _check_jury(evaluations)
    anchor = evaluations[0]
    judge_ids = tuple(e.evaluator_id for e in evaluations)
    n_judges = len(evaluations)
    votes: list[list[Tag]] = [[ldp.tag] for ldp in anchor.ldps]
    extras: list[tuple[int, int]] = []  # (judge position, ldp index)
    matchings = []
    for pos in range(1, n_judges):
        other = evaluations[pos]
        matching = match_ldps(anchor.ldps, other.ldps, cfg, embedder)
        matchings.append(matching)
        by_anchor = {p.machine_index: p.human_index for p in matching.pairs}
        for anchor_idx in range(len(anchor.ldps)):
            if anchor_idx in by_anchor:
                votes[anchor_idx].append(other.ldps[by_anchor[anchor_idx]].tag)
            else:
                votes[anchor_idx].append(Tag.MISSING)
        extras.extend((pos, j) for j in matching.unmatched_human)
    ballots = [
        JuryBallot(ldp_text=ldp.text, votes=tuple(v), judge_ids=judge_ids)
        for ldp, v in zip(anchor.ldps, votes)
    ]
    for pos, ldp_idx in extras:
        ldp = evaluations[pos].ldps[ldp_idx]
        extra_votes = tuple(
            ldp.tag if k == pos else Tag.MISSING for k in range(n_judges)
        )
        ballots.append(JuryBallot(ldp_text=ldp.text, votes=extra_votes, judge_ids=judge_ids))
    return ballots


def aggregate(
    evaluations: Sequence[Evaluation],
    strategy: Strategy,
    cfg: AlignConfig | None = None,
    embedder: Embedder | None = None,
) -> Evaluation:
    """Fuse a jury's evaluations into one, attributed to "jury:<strategy>".

    The result's timestamp is the latest input timestamp, keeping
    aggregation fully deterministic.
    """
    ballots = build_ballots(evaluations, cfg, embedder)
    ldps = tuple(
        LegalDataPoint(
            text=b.ldp_text,
            tag=decide(strategy, b.votes),
            source=Source.MACHINE,
        )
        for b in ballots
    )
    return Evaluation(
        qa_id=evaluations[0].qa_id,
        evaluator_id=f"jury:{strategy.value}",
        evaluator_kind=Source.MACHINE,
        ldps=ldps,
        created_at=max(e.created_at for e in evaluations),
    )
