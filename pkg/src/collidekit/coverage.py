"""Data-coverage collision detection.

The directed score is ``coverage(A, B) = (1/|B|) sum_{b in B} max_{a in A} sim(a, b)``:
how well intent A's queries cover intent B's. An unordered pair collides when
the aggregated score strictly exceeds the threshold kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .corpus import Intent
from .similarity import SimilarityKind, SimilarityError, sim, tokenize

__all__ = [
    "CoverageConfig",
    "CoverageResult",
    "coverage",
    "detect_collision_coverage",
    "coverage_matrix",
]

AGGREGATIONS = ("directed", "max_of_both", "mean_of_both")


@dataclass(frozen=True)
class CoverageConfig:
    kind: SimilarityKind
    kappa: float = 0.5
    pair_aggregation: str = "max_of_both"

    def __post_init__(self):
        if not np.isfinite(self.kappa):
            raise ValueError("kappa must be finite")
        if self.pair_aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.pair_aggregation!r}")


@dataclass(frozen=True)
class CoverageResult:
    score_ab: float  # A covering B
    score_ba: float  # B covering A
    aggregate: float
    collide: bool


class _EncodedIntent:
    """Per-intent n-gram encoding, computed once and reused across pairs."""

    def __init__(self, intent: Intent, max_order: int):
        if len(intent) == 0:
            raise SimilarityError(f"empty intent {intent.dataset_id}/{intent.name}")
        tokens = [tokenize(q.norm_text) for q in intent.queries]
        self.flat, self.offsets = kernels.encode_queries(tokens, max_order)


def _coverage_ngram(enc_a: _EncodedIntent, enc_b: _EncodedIntent, max_order: int) -> float:
    return float(kernels.coverage_pairs(
        enc_a.flat, enc_a.offsets, enc_b.flat, enc_b.offsets, max_order))


def _coverage_generic(A: Intent, B: Intent, kind: SimilarityKind) -> float:
    total = 0.0
    for b in B.queries:
        total += max(sim(a, b, kind) for a in A.queries)
    return total / len(B.queries)


def coverage(A: Intent, B: Intent, kind: SimilarityKind) -> float:
    """Directed coverage score of A over B; deterministic in B's stored order."""
    if len(A) == 0 or len(B) == 0:
        raise SimilarityError("coverage requires non-empty intents")
    if kind.kind == "ngram":
        n = kind.ngram.max_order if kind.ngram else 3
        return _coverage_ngram(_EncodedIntent(A, n), _EncodedIntent(B, n), n)
    return _coverage_generic(A, B, kind)


def _aggregate(score_ab: float, score_ba: float, mode: str) -> float:
    if mode == "directed":
        return score_ab
    if mode == "max_of_both":
        return max(score_ab, score_ba)
    return (score_ab + score_ba) / 2.0


def detect_collision_coverage(A: Intent, B: Intent, cfg: CoverageConfig) -> CoverageResult:
    score_ab = coverage(A, B, cfg.kind)
    score_ba = coverage(B, A, cfg.kind)
    agg = _aggregate(score_ab, score_ba, cfg.pair_aggregation)
    return CoverageResult(score_ab=score_ab, score_ba=score_ba,
                          aggregate=agg, collide=agg > cfg.kappa)


def coverage_matrix(collection_a: list[Intent], collection_b: list[Intent],
                    cfg: CoverageConfig) -> list[list[CoverageResult]]:
    """All-pairs coverage results, rows over ``collection_a`` in input order."""
    if cfg.kind.kind == "ngram":
        n = cfg.kind.ngram.max_order if cfg.kind.ngram else 3
        enc_a = [_EncodedIntent(it, n) for it in collection_a]
        enc_b = [_EncodedIntent(it, n) for it in collection_b]
        rows = []
        for ea in enc_a:
            row = []
            for eb in enc_b:
                s_ab = _coverage_ngram(ea, eb, n)
                s_ba = _coverage_ngram(eb, ea, n)
                agg = _aggregate(s_ab, s_ba, cfg.pair_aggregation)
                row.append(CoverageResult(s_ab, s_ba, agg, agg > cfg.kappa))
            rows.append(row)
        return rows
    return [[detect_collision_coverage(a, b, cfg) for b in collection_b]
            for a in collection_a]
