import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from authverify.features import FeatureModel, SparseVector
from authverify.impostors import (
    ImpostorParams,
    ImpostorsError,
    PoolCandidate,
    minmax_similarity,
    run_testset,
    verify,
    verify_vectors,
)
from authverify.pairgen import PairSample, SampleCategory


def sparse(dense):
    dense = np.asarray(dense, dtype=np.float64)
    idx = np.nonzero(dense)[0]
    return SparseVector(indices=idx.astype(np.int64), weights=dense[idx])


def minmax_oracle(x_dense, y_dense):
    """Independent elementwise reference."""
    s_min = sum(min(a, b) for a, b in zip(x_dense, y_dense))
    s_max = sum(max(a, b) for a, b in zip(x_dense, y_dense))
    return 0.0 if s_max == 0 else s_min / s_max


dense_vectors = st.lists(
    st.floats(min_value=0.0, max_value=10.0, allow_nan=False), min_size=1, max_size=12
)


class TestMinmax:
    def test_hand_example(self):
        assert minmax_similarity(sparse([1, 2, 0]), sparse([2, 1, 1])) == pytest.approx(0.4)

    def test_identity(self):
        x = sparse([0.5, 0, 2.5])
        assert minmax_similarity(x, x) == 1.0

    def test_disjoint_supports(self):
        assert minmax_similarity(sparse([1, 0, 0]), sparse([0, 2, 3])) == 0.0

    def test_both_empty_is_zero(self):
        assert minmax_similarity(sparse([0, 0]), sparse([0, 0])) == 0.0

    @given(dense_vectors, dense_vectors)
    @settings(max_examples=200)
    def test_axioms_and_oracle(self, xs, ys):
        n = max(len(xs), len(ys))
        xs = xs + [0.0] * (n - len(xs))
        ys = ys + [0.0] * (n - len(ys))
        x, y = sparse(xs), sparse(ys)
        sim = minmax_similarity(x, y)
        assert 0.0 <= sim <= 1.0
        assert sim == minmax_similarity(y, x)
        assert sim == pytest.approx(minmax_oracle(xs, ys), abs=1e-12)

    def test_monotone_under_shared_support_growth(self):
        xs = [1.0, 2.0, 0.0, 0.0]
        ys = [2.0, 1.0, 0.0, 0.0]
        base = minmax_similarity(sparse(xs), sparse(ys))
        xs2, ys2 = list(xs), list(ys)
        xs2[2] = ys2[2] = 1.5  # equal shared mass can only raise similarity
        assert minmax_similarity(sparse(xs2), sparse(ys2)) >= base


def make_sample(para1, para2, label=1, sample_id="s0", author1="A", author2=None):
    if author2 is None:
        author2 = author1 if label else "B"
    return PairSample(
        sample_id=sample_id,
        author1=author1,
        author2=author2,
        year1=1931,
        year2=1933,
        doc1="d1",
        doc2="d2",
        para1=para1,
        para2=para2,
        joined=para1 + " [SEP] " + para2,
        label=label,
        category=SampleCategory.SAME_AUTH_NEAR if label else SampleCategory.DIFF_AUTH_NEAR,
    )


def toy_model_and_pool(seed=0, n_pool=6):
    rng = np.random.default_rng(seed)
    texts = ["".join(rng.choice(list("abcd"), size=60)) for _ in range(n_pool + 4)]
    model = FeatureModel.fit(texts, n=2, max_size=30)
    pool = [PoolCandidate(text=t, author_id=f"imp{i}", doc_id=f"pd{i}") for i, t in enumerate(texts[:n_pool])]
    return model, pool


class TestVerify:
    def test_identical_texts_score_one(self):
        model, pool = toy_model_and_pool()
        text = "abcdabcdabcd" * 4
        sample = make_sample(text, text)
        params = ImpostorParams(iterations=50, feature_fraction=0.9, pool_size=4, impostors_per_iter=2)
        result = verify(sample, model, pool, params, seed=1)
        assert result.score == 1.0
        assert result.label == 1
        assert result.confidence == 1.0

    def test_disputed_equal_to_sole_impostor_scores_zero(self):
        rng = np.random.default_rng(3)
        impostor_text = "".join(rng.choice(list("ab"), size=80))
        known_text = "cdcdcdcdcdcd" * 6  # disjoint bigrams from the impostor/disputed
        model = FeatureModel.fit([impostor_text, known_text], n=2, max_size=30)
        pool = [PoolCandidate(text=impostor_text, author_id="imp", doc_id="pd0")]
        params = ImpostorParams(iterations=40, feature_fraction=0.9, pool_size=1, impostors_per_iter=1)
        result = verify(make_sample(known_text, impostor_text), model, pool, params, seed=2)
        assert result.score == 0.0
        assert result.label == 0

    def test_score_granularity_and_confidence_invariants(self):
        model, pool = toy_model_and_pool(seed=5)
        params = ImpostorParams(iterations=20, pool_size=4, impostors_per_iter=2)
        rng = np.random.default_rng(7)
        text1 = "".join(rng.choice(list("abcd"), size=60))
        text2 = "".join(rng.choice(list("abcd"), size=60))
        result = verify(make_sample(text1, text2), model, pool, params, seed=3)
        assert result.score in {i / 20 for i in range(21)}
        assert 0.5 <= result.confidence <= 1.0
        assert result.label == (1 if result.score > params.threshold else 0)
        assert result.confidence == max(result.score, 1 - result.score)

    def test_threshold_is_strict(self):
        # score exactly 0.5 must give label 0, confidence 0.5
        params = ImpostorParams(iterations=2, pool_size=1, impostors_per_iter=1)
        assert params.threshold == 0.5

    def test_pool_too_small(self):
        model, pool = toy_model_and_pool(n_pool=2)
        params = ImpostorParams(iterations=5, pool_size=10, impostors_per_iter=2)
        with pytest.raises(ImpostorsError, match="pool"):
            verify(make_sample("abab", "abab"), model, pool, params, seed=0)

    def test_author_documents_excluded_from_pool(self):
        model, pool = toy_model_and_pool(n_pool=6)
        # tag two candidates with the sample's authors; they must not be used
        pool[0] = PoolCandidate(text=pool[0].text, author_id="A", doc_id="pd0")
        pool[1] = PoolCandidate(text=pool[1].text, author_id="B", doc_id="pd1")
        sample = make_sample("abcd" * 20, "dcba" * 20, label=0, author1="A", author2="B")
        params = ImpostorParams(iterations=5, pool_size=5, impostors_per_iter=1)
        with pytest.raises(ImpostorsError):
            # only 4 admissible candidates remain < pool_size 5
            verify(sample, model, pool, params, seed=0)


class TestExhaustiveOracle:
    @staticmethod
    def oracle_win_probability(known_d, disputed_d, impostors_d, k, m):
        """Exact win probability by enumerating every (feature subset,
        impostor combination) outcome; independent of the verifier."""
        n_feats = len(disputed_d)
        wins = total = 0
        for feats in itertools.combinations(range(n_feats), k):
            sub = lambda v: [v[i] for i in feats]
            sim_known = minmax_oracle(sub(known_d), sub(disputed_d))
            for chosen in itertools.combinations(range(len(impostors_d)), m):
                total += 1
                if all(
                    sim_known > minmax_oracle(sub(impostors_d[j]), sub(disputed_d))
                    for j in chosen
                ):
                    wins += 1
        return wins / total

    def test_sampled_score_matches_enumeration(self):
        """Statistical agreement at 3 standard errors on random toy problems."""
        rng = np.random.default_rng(2024)
        n_feats, n_pool, m = 6, 3, 2
        params = ImpostorParams(
            iterations=4000,
            feature_fraction=0.75,  # k = ceil(0.75 * 6) = 5
            pool_size=n_pool,
            impostors_per_iter=m,
        )
        k = math.ceil(params.feature_fraction * n_feats)
        hits = 0
        n_problems = 20
        for trial in range(n_problems):
            known_d = rng.random(n_feats) * (rng.random(n_feats) < 0.8)
            disputed_d = rng.random(n_feats) * (rng.random(n_feats) < 0.8)
            impostors_d = [rng.random(n_feats) * (rng.random(n_feats) < 0.8) for _ in range(n_pool)]
            p = self.oracle_win_probability(list(known_d), list(disputed_d),
                                            [list(v) for v in impostors_d], k, m)
            score, _, _ = verify_vectors(
                known=sparse(known_d),
                disputed=sparse(disputed_d),
                pool=[sparse(v) for v in impostors_d],
                vocab_size=n_feats,
                params=params,
                rng=np.random.default_rng(trial),
            )
            se = math.sqrt(p * (1 - p) / params.iterations)
            if abs(score - p) <= 3 * se + 1e-12:
                hits += 1
        assert hits >= round(0.95 * n_problems)


class TestRunTestset:
    def make_dataset(self, n=4, seed=11):
        rng = np.random.default_rng(seed)
        return [
            make_sample(
                "".join(rng.choice(list("abcd"), size=60)),
                "".join(rng.choice(list("abcd"), size=60)),
                sample_id=f"s{i}",
            )
            for i in range(n)
        ]

    def test_one_result_per_sample_and_determinism(self):
        model, pool = toy_model_and_pool(seed=8)
        params = ImpostorParams(iterations=10, pool_size=4, impostors_per_iter=2)
        ds = self.make_dataset()
        r1 = run_testset(ds, model, pool, params, seed=5)
        r2 = run_testset(ds, model, pool, params, seed=5)
        assert len(r1) == len(ds)
        assert r1 == r2

    def test_thread_count_does_not_change_output(self):
        model, pool = toy_model_and_pool(seed=8)
        params = ImpostorParams(iterations=10, pool_size=4, impostors_per_iter=2)
        ds = self.make_dataset(n=6)
        assert run_testset(ds, model, pool, params, seed=5) == run_testset(
            ds, model, pool, params, seed=5, threads=4
        )

    def test_identical_same_doc_pairs_all_label_one(self):
        model, pool = toy_model_and_pool(seed=9)
        text = "abcdabcd" * 8
        ds = [make_sample(text, text, sample_id=f"s{i}") for i in range(3)]
        params = ImpostorParams(iterations=10, pool_size=4, impostors_per_iter=2)
        results = run_testset(ds, model, pool, params, seed=1)
        assert all(r.label == 1 for r in results)

    def test_error_names_sample_index(self):
        model, pool = toy_model_and_pool(n_pool=2)
        params = ImpostorParams(iterations=5, pool_size=10, impostors_per_iter=2)
        with pytest.raises(ImpostorsError, match="sample 0"):
            run_testset(self.make_dataset(n=1), model, pool, params, seed=0)
