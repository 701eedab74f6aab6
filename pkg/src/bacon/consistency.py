"""Semantic-consistency scoring of repeated answers.

Two answers are compared by splitting each into sub-sentences and
counting, per direction, how many sub-sentences of one find an
embedding-similar sub-sentence in the other (cosine >= rho). The pair
score is the symmetric average of the two directional counts; raw mode
keeps the counts as-is, normalized mode divides each count by its own
sub-sentence total so scores land in [0,1].
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .model import split_sentences
from .providers import EmbeddingVector, TextEmbedder, cosine

DEFAULT_RHO = 0.8


@dataclass(frozen=True)
class ConsistencyConfig:
    rho: float = DEFAULT_RHO
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho {self.rho} outside [0,1]")


@dataclass
class AnswerSet:
    """n >= 2 answers to the same question; empty answers are rejected."""

    answers: list[str]

    def __post_init__(self):
        if len(self.answers) < 2:
            raise ValueError("need at least 2 answers")
        for i, answer in enumerate(self.answers):
            if not split_sentences(answer):
                raise ValueError(f"answer {i} has no sub-sentences")

    def sub_sentence_counts(self) -> list[int]:
        return [len(split_sentences(a)) for a in self.answers]


def _embed_subs(answer: str, embedder: TextEmbedder) -> list[EmbeddingVector]:
    return embedder.embed(split_sentences(answer))


def sub_score(
    sub_sentence: str,
    other_answer: str,
    embedder: TextEmbedder,
    rho: float = DEFAULT_RHO,
) -> int:
    """1 iff some sub-sentence of ``other_answer`` has cosine >= rho
    against ``sub_sentence``, else 0."""
    (vec,) = embedder.embed([sub_sentence])
    others = _embed_subs(other_answer, embedder)
    return int(any(cosine(vec, o) >= rho for o in others))


def _directional_count(
    subs_i: Sequence[EmbeddingVector],
    subs_j: Sequence[EmbeddingVector],
    rho: float,
) -> int:
    return sum(
        1 for vi in subs_i if any(cosine(vi, vj) >= rho for vj in subs_j)
    )


def pair_score(
    a_i: str,
    a_j: str,
    embedder: TextEmbedder,
    cfg: ConsistencyConfig = ConsistencyConfig(),
) -> float:
    """Symmetric consistency of two answers.

    Raw mode: 0.5 * (F(i|j) + F(j|i)) with F the directional match
    count, so the range is [0, (k_i+k_j)/2]. Normalized mode divides
    each F by its own sub-sentence count, giving [0,1] and exactly 1 for
    identical answers.
    """
    subs_i = _embed_subs(a_i, embedder)
    subs_j = _embed_subs(a_j, embedder)
    if not subs_i or not subs_j:
        raise ValueError("answers must have at least one sub-sentence")
    f_ij = _directional_count(subs_i, subs_j, cfg.rho)
    f_ji = _directional_count(subs_j, subs_i, cfg.rho)
    if cfg.normalize:
        return 0.5 * (f_ij / len(subs_i) + f_ji / len(subs_j))
    return 0.5 * (f_ij + f_ji)


def pair_matrix(
    answers: AnswerSet,
    embedder: TextEmbedder,
    cfg: ConsistencyConfig = ConsistencyConfig(),
) -> list[list[float]]:
    """Full symmetric n x n matrix of pair scores."""
    n = len(answers.answers)
    matrix = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            s = pair_score(answers.answers[i], answers.answers[j], embedder, cfg)
            matrix[i][j] = s
            matrix[j][i] = s
    return matrix


def set_score(
    answers: AnswerSet,
    embedder: TextEmbedder,
    cfg: ConsistencyConfig = ConsistencyConfig(),
) -> float:
    """Mean pair score over all unordered answer pairs."""
    pairs = list(combinations(range(len(answers.answers)), 2))
    total = sum(
        pair_score(answers.answers[i], answers.answers[j], embedder, cfg)
        for i, j in pairs
    )
    return total / len(pairs)
