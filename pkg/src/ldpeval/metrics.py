"""Scores over tag counts, quarter-point bucketing, and correlation with humans.

Correctness asks "of what the answer asserted, how much was right";
precision penalizes irrelevant material; recall penalizes missing material.
A score whose denominator is zero is undefined and reported as None rather
than coerced to 0 or 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .domain import GRADE_MAX, GRADE_MIN, QUARTERS, ScoreSet, TagCounts


class InsufficientDataError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int

    def to_dict(self) -> dict:
        return {"r": self.r, "p_value": self.p_value, "n": self.n}


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def compute_scores(counts: TagCounts) -> ScoreSet:
    """Derive the four answer scores from tag counts.

    f1 is the harmonic mean of precision and recall.  It is undefined when
    either factor is undefined, and 0 when both are defined but sum to 0.
    """
    c, i, r, m = counts.n_correct, counts.n_incorrect, counts.n_irrelevant, counts.n_missing
    if min(c, i, r, m) < 0:
        raise ValueError("tag counts must be non-negative")
    correctness = _ratio(c, c + i)
    precision = _ratio(c, c + r)
    recall = _ratio(c, c + m)
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ScoreSet(correctness=correctness, precision=precision, recall=recall, f1=f1)


def convert_grade(grade: int) -> float:
    """Map a 1..5 review grade onto the unit interval in quarter steps."""
    if not isinstance(grade, int) or not GRADE_MIN <= grade <= GRADE_MAX:
        raise ValueError(f"grade must be an integer in {GRADE_MIN}..{GRADE_MAX}, got {grade!r}")
    return (grade - 1) * 0.25


def bucket(score: float) -> float:
    """Floor a score in [0, 1] to the nearest lower quarter point.

    Scores are rounded to 10 decimals first so float noise just under a
    quarter boundary lands in the intended bucket.
    """
    s = round(score, 10)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"score must lie in [0, 1], got {score!r}")
    return QUARTERS[min(int(s * 4), 4)]


def bucketed_accuracy(predicted: Sequence[float], human: Sequence[float]) -> float:
    """Fraction of positions where the bucketed prediction equals the human
    quarter score."""
    if len(predicted) != len(human):
        raise ValueError("predicted and human score lists must have equal length")
    if not predicted:
        raise ValueError("score lists must be non-empty")
    for h in human:
        if h not in QUARTERS:
            raise ValueError(f"human scores must be quarter values, got {h!r}")
    hits = sum(1 for p, h in zip(predicted, human) if bucket(p) == h)
    return hits / len(predicted)


def _betacf(a: float, b: float, x: float, tol: float = 1e-10, max_iter: int = 300) -> float:
    # Continued fraction for the regularized incomplete beta, evaluated with
    # the modified Lentz scheme.
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _betai(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def p_value_for_r(r: float, n: int) -> float:
    """Two-tailed p-value for a sample correlation r over n observations,
    from the t statistic with n - 2 degrees of freedom."""
    if n < 3:
        raise InsufficientDataError("correlation needs at least 3 observations")
    df = n - 2
    denom = 1.0 - r * r
    if denom <= 0.0:
        return 0.0
    t2 = r * r * df / denom
    return _betai(df / 2.0, 0.5, df / (df + t2))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Sample Pearson correlation with a two-tailed p-value."""
    if len(xs) != len(ys):
        raise ValueError("input lists must have equal length")
    n = len(xs)
    if n < 3:
        raise InsufficientDataError("correlation needs at least 3 observations")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    syy = sum((y - mean_y) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for constant input")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(r=r, p_value=p_value_for_r(r, n), n=n)
