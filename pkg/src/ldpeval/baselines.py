"""Reference-based text overlap baselines: BLEU and ROUGE.

These need a ground-truth reference, unlike the tag-based scores, and are
kept here for head-to-head comparisons.  Tokenization is shared: lowercase,
split on whitespace, ASCII punctuation stripped from token edges.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

_PUNCT = string.punctuation


class EmptyTextError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation from token edges.

    Tokens that are pure punctuation vanish.
    """
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            out.append(tok)
    return out


def _require_tokens(text: str, side: str) -> list[str]:
    toks = tokenize(text)
    if not toks:
        raise EmptyTextError(f"{side} text has no tokens after tokenization")
    return toks


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float

    def to_dict(self) -> dict:
        return {"recall": self.recall, "precision": self.precision, "f1": self.f1}


def bleu_tokens(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """BLEU over pre-tokenized input, no smoothing.

    Geometric mean of clipped n-gram precisions for n = 1..max_n, times the
    brevity penalty.  The n range is capped at the shorter side's length so
    a text compared with itself always scores 1.  Any zero precision zeroes
    the whole score.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    if not candidate or not reference:
        raise EmptyTextError("both sides need at least one token")
    top_n = min(max_n, len(candidate), len(reference))
    log_sum = 0.0
    for n in range(1, top_n + 1):
        cand = ngram_counts(candidate, n)
        ref = ngram_counts(reference, n)
        clipped = sum(min(count, ref[gram]) for gram, count in cand.items())
        total = sum(cand.values())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    geo_mean = math.exp(log_sum / top_n)
    c, r = len(candidate), len(reference)
    bp = math.exp(1.0 - r / c) if c < r else 1.0
    return bp * geo_mean


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    return bleu_tokens(
        _require_tokens(candidate, "candidate"),
        _require_tokens(reference, "reference"),
        max_n,
    )


def rouge_n_tokens(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """ROUGE-N over pre-tokenized input.

    Overlap is the clipped n-gram match count.  A side with no n-grams
    contributes 0 to its ratio.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not candidate or not reference:
        raise EmptyTextError("both sides need at least one token")
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    recall = overlap / ref_total if ref_total else 0.0
    precision = overlap / cand_total if cand_total else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return RougeScore(recall=recall, precision=precision, f1=f1)


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    return rouge_n_tokens(
        _require_tokens(candidate, "candidate"),
        _require_tokens(reference, "reference"),
        n,
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Single-row dynamic program; O(len(a) * len(b)).
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev_diag = 0
        for j, y in enumerate(b, start=1):
            prev_row = row[j]
            if x == y:
                row[j] = prev_diag + 1
            elif row[j - 1] > row[j]:
                row[j] = row[j - 1]
            prev_diag = prev_row
    return row[len(b)]


def rouge_l_tokens(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """ROUGE-L: longest common subsequence against each side's length."""
    if not candidate or not reference:
        raise EmptyTextError("both sides need at least one token")
    lcs = lcs_length(candidate, reference)
    recall = lcs / len(reference)
    precision = lcs / len(candidate)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return RougeScore(recall=recall, precision=precision, f1=f1)


def rouge_l(candidate: str, reference: str) -> RougeScore:
    return rouge_l_tokens(
        _require_tokens(candidate, "candidate"),
        _require_tokens(reference, "reference"),
    )
