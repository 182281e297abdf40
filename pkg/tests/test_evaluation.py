import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collidekit.confusion import ConfusionConfig
from collidekit.coverage import CoverageConfig
from collidekit.evaluation import (ExperimentConfig, auc, run_confusion_experiment,
                                   run_coverage_experiment, sample_pairs)
from collidekit.graph import CollisionGraph, IntentRef
from collidekit.similarity import SimilarityKind

from conftest import make_corpus, sample_topic_texts


def brute_force_auc(pos, neg):
    wins = ties = 0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1
            elif p == n:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def ref(ds, it):
    return IntentRef(dataset=ds, intent=it)


class TestAUC:
    def test_perfect_separation(self):
        assert auc([0.9, 0.8], [0.1, 0.2]) == 1.0

    def test_all_ties(self):
        assert auc([0.5], [0.5]) == 0.5

    def test_hand_case(self):
        assert auc([0.8, 0.4], [0.6, 0.2]) == 0.75

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            auc([], [0.5])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            auc([float("nan")], [0.5])

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            # coarse grid forces plenty of ties
            pos = rng.integers(0, 6, size=rng.integers(1, 40)) / 5.0
            neg = rng.integers(0, 6, size=rng.integers(1, 40)) / 5.0
            assert auc(pos, neg) == brute_force_auc(list(pos), list(neg))

    @given(st.lists(st.integers(0, 10), min_size=1, max_size=30),
           st.lists(st.integers(0, 10), min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_complement_identity(self, pos, neg):
        assert auc(pos, neg) + auc(neg, pos) == pytest.approx(1.0, abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(1)
        pos = rng.random(20)
        neg = rng.random(30)
        assert auc(pos, neg) == auc(np.exp(3 * pos), np.exp(3 * neg))


@pytest.fixture
def eval_fixture():
    rng = np.random.default_rng(42)
    shared = [f"shared{i}" for i in range(5)]
    a_intents = {t: sample_topic_texts(t, 12, rng) for t in shared}
    a_intents["onlya"] = sample_topic_texts("uniqa", 12, rng)
    b_intents = {f"{t}_b": sample_topic_texts(t, 12, rng) for t in shared}
    b_intents["onlyb"] = sample_topic_texts("uniqb", 12, rng)
    corpora = [make_corpus("ds_a", a_intents), make_corpus("ds_b", b_intents)]
    graph = CollisionGraph()
    for t in shared:
        graph.add_edge(ref("ds_a", t), ref("ds_b", f"{t}_b"))
    return graph, corpora


class TestSamplePairs:
    def test_counts(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=0)
        pairs = sample_pairs(graph, corpora, cfg)
        labels = [label for _, _, label in pairs]
        assert labels.count("collision") == 5
        assert labels.count("non_collision") == 5

    def test_deterministic(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=7)
        assert sample_pairs(graph, corpora, cfg) == sample_pairs(graph, corpora, cfg)

    def test_min_queries_excludes_edges(self, eval_fixture):
        graph, corpora = eval_fixture
        # shrink one colliding endpoint below the threshold
        small = corpora[0].intents["shared0"]
        small.queries = small.queries[:9]
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=0)
        pairs = sample_pairs(graph, corpora, cfg)
        colliding = [(a, b) for a, b, label in pairs if label == "collision"]
        assert ref("ds_a", "shared0") not in {a for a, _ in colliding}
        assert len(colliding) == 4

    def test_oversample_rejected(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=10_000, seed=0)
        with pytest.raises(ValueError, match="available"):
            sample_pairs(graph, corpora, cfg)

    def test_same_dataset_pairs_excluded(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=25, seed=0)
        for a, b, label in sample_pairs(graph, corpora, cfg):
            assert a.dataset != b.dataset


class TestCoverageExperiment:
    def test_separable_fixture(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=0)
        cov_cfg = CoverageConfig(kind=SimilarityKind.for_ngram(), kappa=0.5)
        result, scored = run_coverage_experiment(graph, corpora, cfg, cov_cfg)
        assert result.auc == 1.0
        assert result.orientation == "score_high_means_collision"
        assert len(scored) == 10

    def test_reproducible(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=3)
        cov_cfg = CoverageConfig(kind=SimilarityKind.for_ngram(), kappa=0.5)
        r1, s1 = run_coverage_experiment(graph, corpora, cfg, cov_cfg)
        r2, s2 = run_coverage_experiment(graph, corpora, cfg, cov_cfg)
        assert r1 == r2 and s1 == s2


class TestConfusionExperiment:
    def test_separable_fixture(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=0)
        result, scored = run_confusion_experiment(graph, corpora, cfg,
                                                  ConfusionConfig(seed=13))
        assert result.auc >= 0.9
        assert all(0.0 < p.score <= 1.0 for p in scored)

    def test_scores_in_range(self, eval_fixture):
        graph, corpora = eval_fixture
        cfg = ExperimentConfig(min_queries=10, n_non_collision_sample=5, seed=0)
        _, scored = run_confusion_experiment(graph, corpora, cfg, ConfusionConfig())
        # every (trained dataset, candidate) observation is scored
        assert len(scored) == 12
