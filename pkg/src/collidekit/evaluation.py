"""Threshold-free evaluation of collision detectors against the meta-dataset.

Ground-truth labels always come from the collision graph; scores come from a
detector. AUC is the Mann-Whitney statistic (ties count one half), computed by
sort-and-rank but contract-equal to the quadratic pair-counting definition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .confusion import ConfusionConfig, collision_score, classification_distribution, train_classifier
from .corpus import Corpus, filter_min_queries
from .coverage import CoverageConfig, detect_collision_coverage
from .graph import CollisionGraph, IntentRef

__all__ = [
    "ScoredPair",
    "ExperimentConfig",
    "AUCResult",
    "auc",
    "sample_pairs",
    "run_coverage_experiment",
    "run_confusion_experiment",
]


@dataclass(frozen=True)
class ScoredPair:
    a: IntentRef
    b: IntentRef
    score: float
    label: str  # "collision" | "non_collision"


@dataclass(frozen=True)
class ExperimentConfig:
    min_queries: int = 10
    n_non_collision_sample: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.min_queries < 1:
            raise ValueError("min_queries must be >= 1")
        if self.n_non_collision_sample < 1:
            raise ValueError("sample size must be >= 1")


@dataclass(frozen=True)
class AUCResult:
    auc: float
    n_pos: int
    n_neg: int
    orientation: str  # "score_high_means_collision" | "score_low_means_collision"
    auc_high_means_collision: float = field(default=float("nan"))


def auc(pos_scores, neg_scores) -> float:
    """Fraction of (pos, neg) pairs with pos > neg; ties count 0.5."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("auc requires non-empty score lists")
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(neg))):
        raise ValueError("auc scores must be finite")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return u / (pos.size * neg.size)


def _result_from_scores(pos: list[float], neg: list[float]) -> AUCResult:
    high = auc(pos, neg)
    if high >= 0.5:
        return AUCResult(auc=high, n_pos=len(pos), n_neg=len(neg),
                         orientation="score_high_means_collision",
                         auc_high_means_collision=high)
    return AUCResult(auc=1.0 - high, n_pos=len(pos), n_neg=len(neg),
                     orientation="score_low_means_collision",
                     auc_high_means_collision=high)


def _eligible_refs(corpora: list[Corpus], min_queries: int) -> dict[IntentRef, object]:
    filtered = filter_min_queries(corpora, min_queries)
    refs = {}
    for corpus in filtered:
        for name, intent in corpus.intents.items():
            refs[IntentRef(dataset=corpus.dataset_id, intent=name)] = intent
    return refs


def sample_pairs(graph: CollisionGraph, corpora: list[Corpus],
                 cfg: ExperimentConfig) -> list[tuple[IntentRef, IntentRef, str]]:
    """All surviving collision pairs plus a seeded sample of non-colliding ones.

    The non-colliding universe is every cross-dataset intent pair that passes
    the min-queries filter and is absent from the graph; sampling is uniform
    without replacement.
    """
    refs = _eligible_refs(corpora, cfg.min_queries)
    collision_pairs = [(a, b) for (a, b) in sorted(graph.edges)
                       if a in refs and b in refs]

    all_refs = sorted(refs)
    universe = []
    for i, a in enumerate(all_refs):
        for b in all_refs[i + 1:]:
            if a.dataset == b.dataset:
                continue
            if graph.has_edge(a, b):
                continue
            universe.append((a, b))
    if cfg.n_non_collision_sample > len(universe):
        raise ValueError(
            f"requested {cfg.n_non_collision_sample} non-colliding pairs, "
            f"only {len(universe)} available")
    rng = np.random.default_rng(cfg.seed)
    picks = rng.permutation(len(universe))[:cfg.n_non_collision_sample]
    sampled = [universe[i] for i in sorted(picks)]

    out = [(a, b, "collision") for a, b in collision_pairs]
    out.extend((a, b, "non_collision") for a, b in sampled)
    return out


def run_coverage_experiment(graph: CollisionGraph, corpora: list[Corpus],
                            cfg: ExperimentConfig, cov_cfg: CoverageConfig
                            ) -> tuple[AUCResult, list[ScoredPair]]:
    refs = _eligible_refs(corpora, cfg.min_queries)
    pairs = sample_pairs(graph, corpora, cfg)
    scored: list[ScoredPair] = []
    for a, b, label in pairs:
        result = detect_collision_coverage(refs[a], refs[b], cov_cfg)
        scored.append(ScoredPair(a=a, b=b, score=result.aggregate, label=label))
    pos = [p.score for p in scored if p.label == "collision"]
    neg = [p.score for p in scored if p.label == "non_collision"]
    return _result_from_scores(pos, neg), scored


def run_confusion_experiment(graph: CollisionGraph, corpora: list[Corpus],
                             cfg: ExperimentConfig, conf_cfg: ConfusionConfig
                             ) -> tuple[AUCResult, list[ScoredPair]]:
    """Train a classifier per multi-intent dataset; score every external intent.

    A (trained dataset, candidate) observation is positive when the candidate
    collides with at least one intent of the trained dataset.
    """
    filtered = filter_min_queries(corpora, cfg.min_queries)
    multi = [c for c in filtered if len(c.intents) >= 2]
    if len(multi) < 2 and len(filtered) < 2:
        raise ValueError("confusion experiment needs at least 2 datasets")
    scored: list[ScoredPair] = []
    for trained in multi:
        model = train_classifier(trained, conf_cfg)
        trained_intents = {IntentRef(dataset=trained.dataset_id, intent=name)
                           for name in trained.intents}
        for other in filtered:
            if other.dataset_id == trained.dataset_id:
                continue
            for name, intent in other.intents.items():
                cand = IntentRef(dataset=other.dataset_id, intent=name)
                score = collision_score(classification_distribution(model, intent))
                positive = any(graph.has_edge(cand, t) for t in trained_intents)
                scored.append(ScoredPair(
                    a=IntentRef(dataset=trained.dataset_id, intent="*"),
                    b=cand, score=score,
                    label="collision" if positive else "non_collision"))
    pos = [p.score for p in scored if p.label == "collision"]
    neg = [p.score for p in scored if p.label == "non_collision"]
    return _result_from_scores(pos, neg), scored
