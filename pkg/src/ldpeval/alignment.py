"""Pairing machine LDPs with human LDPs and scoring tag agreement.

Matching embeds both sides' texts, then greedily takes the globally most
similar remaining pair while it clears the similarity threshold.  Agreement
over a matching counts a matched pair as agreeing when the tags are equal,
an unmatched machine LDP as agreeing when it was tagged irrelevant, and an
unmatched human LDP as agreeing when it was tagged missing.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence

import httpx

from .domain import LegalDataPoint, Tag
from .errors import AuthenticationError, ProviderError

DEFAULT_SIMILARITY_THRESHOLD = 0.80
DEFAULT_ADJUSTED_SIMILARITY_THRESHOLD = 0.90


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not any(self.values):
            raise ValueError("embedding vector must have non-zero norm")


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if len(a.values) != len(b.values):
        raise ValueError("embedding dimensions differ")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    na = math.sqrt(sum(x * x for x in a.values))
    nb = math.sqrt(sum(y * y for y in b.values))
    return dot / (na * nb)


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class OfflineEmbedder:
    """Deterministic local embedder: hashed character trigrams.

    Each trigram of the normalized text is hashed into one of ``dim``
    signed buckets; the bucket vector is unit-normalized.  Identical texts
    always embed identically, so exact duplicates match at similarity 1.0.
    No network, no model weights, stable across runs and platforms.
    """

    model_id = "offline-trigram-v1"

    def __init__(self, seed: int = 0, dim: int = 256):
        if dim < 8:
            raise ValueError("dim must be at least 8")
        self._key = seed.to_bytes(8, "little", signed=False)
        self._dim = dim

    def _trigrams(self, text: str) -> list[str]:
        norm = " ".join(text.lower().split())
        padded = f"^{norm}$"
        return [padded[i : i + 3] for i in range(max(1, len(padded) - 2))]

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        out = []
        for text in texts:
            buckets = [0.0] * self._dim
            for gram in self._trigrams(text):
                h = hashlib.blake2b(gram.encode("utf-8"), key=self._key, digest_size=8)
                value = int.from_bytes(h.digest(), "little")
                sign = 1.0 if value & 1 else -1.0
                buckets[(value >> 1) % self._dim] += sign
            norm = math.sqrt(sum(v * v for v in buckets))
            if norm == 0.0:
                # Degenerate cancellation; fall back to a fixed basis vector.
                buckets[0] = 1.0
                norm = 1.0
            out.append(
                EmbeddingVector(
                    values=tuple(v / norm for v in buckets),
                    model_id=self.model_id,
                )
            )
        return out


class HttpEmbedder:
    """Client for an embeddings endpoint with a batched JSON interface."""

    def __init__(
        self,
        endpoint_url: str,
        model_id: str,
        api_key_ref: Optional[str] = None,
        timeout: float = 30.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint_url = endpoint_url
        self.model_id = model_id
        self._api_key_ref = api_key_ref
        self._timeout = timeout
        self._transport = transport

    def _headers(self) -> dict[str, str]:
        headers = {"content-type": "application/json"}
        if self._api_key_ref:
            key = os.environ.get(self._api_key_ref)
            if not key:
                raise AuthenticationError(
                    f"environment variable {self._api_key_ref} is not set"
                )
            headers["authorization"] = f"Bearer {key}"
        return headers

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        body = {"model": self.model_id, "input": list(texts)}
        try:
            with httpx.Client(transport=self._transport, timeout=self._timeout) as client:
                resp = client.post(self.endpoint_url, json=body, headers=self._headers())
        except httpx.HTTPError as exc:
            raise ProviderError(f"embedding request failed: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthenticationError(f"embedding endpoint rejected credentials: {resp.status_code}")
        if resp.status_code != 200:
            raise ProviderError(f"embedding endpoint returned {resp.status_code}")
        try:
            rows = resp.json()["data"]
            return [
                EmbeddingVector(values=tuple(row["embedding"]), model_id=self.model_id)
                for row in rows
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc


@dataclass(frozen=True)
class AlignConfig:
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    adjusted_similarity_threshold: float = DEFAULT_ADJUSTED_SIMILARITY_THRESHOLD

    def __post_init__(self) -> None:
        for name in ("similarity_threshold", "adjusted_similarity_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.adjusted_similarity_threshold < self.similarity_threshold:
            raise ValueError(
                "adjusted_similarity_threshold must be at least similarity_threshold"
            )


@dataclass(frozen=True)
class MatchedPair:
    machine_index: int
    human_index: int
    similarity: float


@dataclass(frozen=True)
class Matching:
    pairs: tuple[MatchedPair, ...]
    unmatched_machine: tuple[int, ...]
    unmatched_human: tuple[int, ...]


def greedy_match(
    similarities: Sequence[Sequence[float]], threshold: float
) -> Matching:
    """Greedy global-maximum matching over a machine x human similarity grid.

    Repeatedly takes the highest remaining cell at or above the threshold;
    ties break toward the lower (machine index, human index).  The result
    is the lexicographically best matching by descending similarity, which
    keeps it deterministic and order-independent.
    """
    n_machine = len(similarities)
    n_human = len(similarities[0]) if n_machine else 0
    free_m = set(range(n_machine))
    free_h = set(range(n_human))
    pairs: list[MatchedPair] = []
    while free_m and free_h:
        best: Optional[tuple[float, int, int]] = None
        for i in sorted(free_m):
            row = similarities[i]
            for j in sorted(free_h):
                sim = row[j]
                if sim < threshold:
                    continue
                if best is None or sim > best[0]:
                    best = (sim, i, j)
        if best is None:
            break
        sim, i, j = best
        pairs.append(MatchedPair(machine_index=i, human_index=j, similarity=sim))
        free_m.remove(i)
        free_h.remove(j)
    pairs.sort(key=lambda p: (p.machine_index, p.human_index))
    return Matching(
        pairs=tuple(pairs),
        unmatched_machine=tuple(sorted(free_m)),
        unmatched_human=tuple(sorted(free_h)),
    )


def match_ldps(
    machine: Sequence[LegalDataPoint],
    human: Sequence[LegalDataPoint],
    cfg: AlignConfig | None = None,
    embedder: Embedder | None = None,
) -> Matching:
    """Pair machine LDPs with human LDPs by embedding similarity."""
    cfg = cfg or AlignConfig()
    embedder = embedder or OfflineEmbedder()
    if not machine or not human:
        return Matching(
            pairs=(),
            unmatched_machine=tuple(range(len(machine))),
            unmatched_human=tuple(range(len(human))),
        )
    vectors = embedder.embed([ldp.text for ldp in machine] + [ldp.text for ldp in human])
    m_vecs = vectors[: len(machine)]
    h_vecs = vectors[len(machine) :]
    grid = [[cosine(mv, hv) for hv in h_vecs] for mv in m_vecs]
    return greedy_match(grid, cfg.similarity_threshold)


@dataclass(frozen=True)
class PairOutcome:
    machine_index: int
    human_index: int
    similarity: float
    machine_tag: Tag
    human_tag: Tag

    @property
    def agree(self) -> bool:
        return self.machine_tag is self.human_tag


@dataclass(frozen=True)
class AlignmentReport:
    """Agreement between one machine evaluation and one human evaluation."""

    pairs: tuple[PairOutcome, ...]
    unmatched_machine: tuple[tuple[int, Tag], ...]
    unmatched_human: tuple[tuple[int, Tag], ...]
    accuracy: float
    adjusted_accuracy: float
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    adjusted_similarity_threshold: float = DEFAULT_ADJUSTED_SIMILARITY_THRESHOLD

    def to_dict(self) -> dict[str, Any]:
        return {
            "pairs": [
                {
                    "machine_index": p.machine_index,
                    "human_index": p.human_index,
                    "similarity": p.similarity,
                    "machine_tag": p.machine_tag.value,
                    "human_tag": p.human_tag.value,
                    "agree": p.agree,
                }
                for p in self.pairs
            ],
            "unmatched_machine": [
                {"machine_index": i, "tag": t.value} for i, t in self.unmatched_machine
            ],
            "unmatched_human": [
                {"human_index": i, "tag": t.value} for i, t in self.unmatched_human
            ],
            "accuracy": self.accuracy,
            "adjusted_accuracy": self.adjusted_accuracy,
            "similarity_threshold": self.similarity_threshold,
            "adjusted_similarity_threshold": self.adjusted_similarity_threshold,
        }


def score_alignment(
    pairs: Sequence[PairOutcome],
    unmatched_machine: Sequence[tuple[int, Tag]],
    unmatched_human: Sequence[tuple[int, Tag]],
    cfg: AlignConfig | None = None,
) -> tuple[float, float]:
    """Accuracy and adjusted accuracy over matching outcomes.

    Every pair and every unmatched LDP contributes one unit to the
    denominator.  The adjusted variant additionally requires a matched
    pair's similarity to reach the adjusted threshold before its agreement
    counts, so it can never exceed the base accuracy.
    """
    cfg = cfg or AlignConfig()
    total = len(pairs) + len(unmatched_machine) + len(unmatched_human)
    if total == 0:
        raise ValueError("nothing to score: no pairs and no unmatched LDPs")
    base = adjusted = 0
    for p in pairs:
        if p.agree:
            base += 1
            if p.similarity >= cfg.adjusted_similarity_threshold:
                adjusted += 1
    for _, tag in unmatched_machine:
        if tag is Tag.IRRELEVANT:
            base += 1
            adjusted += 1
    for _, tag in unmatched_human:
        if tag is Tag.MISSING:
            base += 1
            adjusted += 1
    return base / total, adjusted / total


def align_evaluations(
    machine_ldps: Sequence[LegalDataPoint],
    human_ldps: Sequence[LegalDataPoint],
    cfg: AlignConfig | None = None,
    embedder: Embedder | None = None,
) -> AlignmentReport:
    """Match two evaluations' LDPs and score their agreement."""
    cfg = cfg or AlignConfig()
    matching = match_ldps(machine_ldps, human_ldps, cfg, embedder)
    pairs = tuple(
        PairOutcome(
            machine_index=p.machine_index,
            human_index=p.human_index,
            similarity=p.similarity,
            machine_tag=machine_ldps[p.machine_index].tag,
            human_tag=human_ldps[p.human_index].tag,
        )
        for p in matching.pairs
    )
    unmatched_m = tuple((i, machine_ldps[i].tag) for i in matching.unmatched_machine)
    unmatched_h = tuple((i, human_ldps[i].tag) for i in matching.unmatched_human)
    accuracy, adjusted = score_alignment(pairs, unmatched_m, unmatched_h, cfg)
    return AlignmentReport(
        pairs=pairs,
        unmatched_machine=unmatched_m,
        unmatched_human=unmatched_h,
        accuracy=accuracy,
        adjusted_accuracy=adjusted,
        similarity_threshold=cfg.similarity_threshold,
        adjusted_similarity_threshold=cfg.adjusted_similarity_threshold,
    )
