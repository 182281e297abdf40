import numpy as np
import pytest

from collidekit import kernels
from collidekit.coverage import (CoverageConfig, coverage, coverage_matrix,
                                 detect_collision_coverage)
from collidekit.similarity import (NGramConfig, SimilarityError, SimilarityKind,
                                   ngram_similarity)

from conftest import make_intent


def brute_force_coverage(A, B, max_order=3):
    cfg = NGramConfig(max_order)
    total = 0.0
    for b in B.queries:
        total += max(ngram_similarity(a, b, cfg) for a in A.queries)
    return total / len(B.queries)


NGRAM = SimilarityKind.for_ngram()


class TestCoverage:
    def test_identical_intents(self):
        A = make_intent("d1", "x", ["a b c", "d e f g"])
        B = make_intent("d2", "y", ["a b c", "d e f g"])
        assert coverage(A, B, NGRAM) == 1.0

    def test_disjoint_vocab(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["x y z"])
        assert coverage(A, B, NGRAM) == 0.0

    def test_hand_case(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["a b d", "a b c"])
        expected = ((2 / 4 + 1 / 3 + 0) / 3 + 1.0) / 2
        assert coverage(A, B, NGRAM) == pytest.approx(expected, abs=1e-12)

    def test_empty_intent_rejected(self):
        A = make_intent("d1", "x", ["a b"])
        B = make_intent("d2", "y", [])
        with pytest.raises(SimilarityError):
            coverage(A, B, NGRAM)

    def test_self_coverage_identity(self):
        # identity holds when all queries have at least max_order tokens
        A = make_intent("d1", "x", ["a b c", "d e f g", "h i j k l"])
        assert coverage(A, A, NGRAM) == 1.0

    def test_monotone_in_covering_set(self):
        rng = np.random.default_rng(3)
        vocab = [f"t{i}" for i in range(12)]
        B = make_intent("d2", "y", [" ".join(rng.choice(vocab, 5)) for _ in range(8)])
        texts = [" ".join(rng.choice(vocab, 5)) for _ in range(8)]
        prev = 0.0
        for k in range(1, len(texts) + 1):
            A = make_intent("d1", "x", texts[:k])
            score = coverage(A, B, NGRAM)
            assert score >= prev - 1e-12
            prev = score

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(7)
        vocab = [f"v{i}" for i in range(20)]
        for _ in range(10):
            A = make_intent("d1", "x", [" ".join(rng.choice(vocab, rng.integers(1, 9)))
                                        for _ in range(int(rng.integers(1, 12)))])
            B = make_intent("d2", "y", [" ".join(rng.choice(vocab, rng.integers(1, 9)))
                                        for _ in range(int(rng.integers(1, 12)))])
            assert coverage(A, B, NGRAM) == pytest.approx(
                brute_force_coverage(A, B), abs=1e-9)


class TestBackends:
    def test_numpy_matches_numba(self):
        rng = np.random.default_rng(11)
        vocab = [f"v{i}" for i in range(15)]
        lists_a = [[vocab[i] for i in rng.integers(0, 15, 6)] for _ in range(5)]
        lists_b = [[vocab[i] for i in rng.integers(0, 15, 6)] for _ in range(7)]
        fa, oa = kernels.encode_queries(lists_a, 3)
        fb, ob = kernels.encode_queries(lists_b, 3)
        k_numba = kernels.get_kernel("numba")
        k_numpy = kernels.get_kernel("numpy")
        assert k_numba(fa, oa, fb, ob, 3) == k_numpy(fa, oa, fb, ob, 3)

    def test_active_backend_reports(self):
        assert kernels.active_backend() in ("numba", "numpy")


class TestDetect:
    def test_aggregate_exactly_kappa_no_collision(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["a b c"])
        cfg = CoverageConfig(kind=NGRAM, kappa=1.0)
        res = detect_collision_coverage(A, B, cfg)
        assert res.aggregate == 1.0 and not res.collide

    def test_identical_intents_collide(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["a b c"])
        res = detect_collision_coverage(A, B, CoverageConfig(kind=NGRAM, kappa=0.9))
        assert res.collide and res.aggregate == 1.0

    def test_disjoint_no_collision(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["x y z"])
        res = detect_collision_coverage(A, B, CoverageConfig(kind=NGRAM, kappa=0.1))
        assert not res.collide

    def test_aggregation_modes(self):
        A = make_intent("d1", "x", ["a b c", "x y z"])
        B = make_intent("d2", "y", ["a b c"])
        ab = coverage(A, B, NGRAM)
        ba = coverage(B, A, NGRAM)
        for mode, expected in (("directed", ab), ("max_of_both", max(ab, ba)),
                               ("mean_of_both", (ab + ba) / 2)):
            res = detect_collision_coverage(
                A, B, CoverageConfig(kind=NGRAM, kappa=0.5, pair_aggregation=mode))
            assert res.aggregate == expected


class TestMatrix:
    def test_single_pair_consistency(self):
        A = make_intent("d1", "x", ["a b c"])
        B = make_intent("d2", "y", ["a b d"])
        cfg = CoverageConfig(kind=NGRAM, kappa=0.5)
        table = coverage_matrix([A], [B], cfg)
        assert table[0][0] == detect_collision_coverage(A, B, cfg)

    def test_cardinality(self):
        mk = lambda d, n, t: make_intent(d, n, [t])
        cfg = CoverageConfig(kind=NGRAM, kappa=0.5)
        table = coverage_matrix(
            [mk("d1", "a", "p q"), mk("d1", "b", "r s")],
            [mk("d2", "c", "p q"), mk("d2", "d", "t u"), mk("d2", "e", "r s")], cfg)
        assert len(table) == 2 and all(len(row) == 3 for row in table)

    def test_permutation_moves_columns(self):
        mk = lambda d, n, t: make_intent(d, n, [t])
        cfg = CoverageConfig(kind=NGRAM, kappa=0.5)
        a = [mk("d1", "a", "p q")]
        b1, b2 = mk("d2", "c", "p q"), mk("d2", "d", "t u")
        t_fwd = coverage_matrix(a, [b1, b2], cfg)
        t_rev = coverage_matrix(a, [b2, b1], cfg)
        assert t_fwd[0][0] == t_rev[0][1] and t_fwd[0][1] == t_rev[0][0]
