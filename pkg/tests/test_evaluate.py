import itertools
import math

import numpy as np
import pytest
import scipy.stats

from authverify.evaluate import (
    ConfusionMatrix,
    EvalError,
    UndefinedCorrelationError,
    by_distance,
    join_results,
    majority_vote,
    mcnemar,
    pearson,
    pool_runs,
    prf,
    report,
)
from authverify.impostors import VerificationResult
from authverify.pairgen import PairSample, SampleCategory


def result(sample_id, truth, label, confidence=0.8):
    return VerificationResult(sample_id=sample_id, truth=truth, label=label, confidence=confidence)


def sample(sample_id, year1, year2, label, category):
    return PairSample(
        sample_id=sample_id,
        author1="A",
        author2="A" if label else "B",
        year1=year1,
        year2=year2,
        doc1="d1",
        doc2="d2",
        para1="x",
        para2="y",
        joined="x [SEP] y",
        label=label,
        category=category,
    )


class TestPrf:
    def test_hand_example(self):
        p, r, f1 = prf(ConfusionMatrix(tp=90, fp=10, fn=20, tn=0))
        assert round(p, 4) == 0.9000
        assert round(r, 4) == 0.8182
        assert round(f1, 4) == 0.8571

    def test_perfect_classifier(self):
        assert prf(ConfusionMatrix(tp=5, fp=0, fn=0, tn=5)) == (1.0, 1.0, 1.0)

    def test_zero_convention(self):
        assert prf(ConfusionMatrix(tp=0, fp=0, fn=0, tn=10)) == (0.0, 0.0, 0.0)

    def test_matches_bruteforce_recount(self):
        rng = np.random.default_rng(0)
        results = [
            result(f"s{i}", int(rng.integers(2)), int(rng.integers(2))) for i in range(200)
        ]
        cm = ConfusionMatrix.from_results(results)
        tp = sum(1 for r in results if r.truth == 1 and r.label == 1)
        fp = sum(1 for r in results if r.truth == 0 and r.label == 1)
        fn = sum(1 for r in results if r.truth == 1 and r.label == 0)
        p, rec, _ = prf(cm)
        assert p == tp / (tp + fp)
        assert rec == tp / (tp + fn)


class TestPoolRuns:
    def test_concatenation_and_confusion_additivity(self):
        run1 = [result("s0", 1, 1), result("s1", 0, 1)]
        run2 = [result("s0", 1, 0), result("s1", 0, 0)]
        pooled = pool_runs([run1, run2])
        assert len(pooled) == 4
        cm = ConfusionMatrix.from_results(pooled)
        assert cm == ConfusionMatrix.from_results(run1) + ConfusionMatrix.from_results(run2)

    def test_single_run_identity(self):
        run = [result("s0", 1, 1)]
        assert pool_runs([run]) == run

    def test_pooled_count(self):
        runs = [[result(f"s{i}", 1, 1) for i in range(3600)] for _ in range(15)]
        assert len(pool_runs(runs)) == 54_000

    def test_mismatched_datasets_rejected(self):
        with pytest.raises(EvalError):
            pool_runs([[result("s0", 1, 1)], [result("other", 1, 1)]])

    def test_majority_vote_mode(self):
        runs = [
            [result("s0", 1, 1)],
            [result("s0", 1, 1)],
            [result("s0", 1, 0)],
        ]
        (voted,) = majority_vote(runs)
        assert voted.label == 1


class TestByDistance:
    def test_single_bucket(self):
        ds = [sample("s0", 1931, 1940, 1, SampleCategory.SAME_AUTH_NEAR)]
        rs = [result("s0", 1, 1, confidence=0.7)]
        (bucket,) = by_distance(join_results(rs, ds))
        assert bucket.distance == 9
        assert bucket.accuracy == 1.0
        assert bucket.mean_confidence == 0.7

    def test_exact_year_buckets(self):
        ds, rs = [], []
        for i, dy in enumerate([9, 9, 13, 17]):
            ds.append(sample(f"s{i}", 1940, 1940 + dy, 1, SampleCategory.SAME_AUTH_FAR))
            rs.append(result(f"s{i}", 1, 1 if dy != 9 else 0))
        buckets = by_distance(join_results(rs, ds), label_filter=1)
        assert [b.distance for b in buckets] == [9, 13, 17]
        assert buckets[0].accuracy == 0.0
        assert buckets[1].accuracy == buckets[2].accuracy == 1.0

    def test_all_correct_bucket(self):
        ds = [sample(f"s{i}", 1930, 1935, 0, SampleCategory.DIFF_AUTH_NEAR) for i in range(4)]
        rs = [result(f"s{i}", 0, 0) for i in range(4)]
        (bucket,) = by_distance(join_results(rs, ds))
        assert bucket.accuracy == 1.0

    def test_label_filter(self):
        ds = [
            sample("s0", 1930, 1935, 1, SampleCategory.SAME_AUTH_NEAR),
            sample("s1", 1930, 1935, 0, SampleCategory.DIFF_AUTH_NEAR),
        ]
        rs = [result("s0", 1, 1), result("s1", 0, 0)]
        assert sum(b.n for b in by_distance(join_results(rs, ds), label_filter=1)) == 1


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([1, 2, 3, 4], [3, 5, 7, 9]).r == 1.0

    def test_negative_linear(self):
        assert pearson([1, 2, 3, 4], [-1, -2, -3, -4]).r == -1.0

    def test_hand_example_against_scipy(self):
        xs, ys = [1, 2, 3, 4, 5], [2, 1, 4, 3, 5]
        stat = pearson(xs, ys)
        ref = scipy.stats.pearsonr(xs, ys)
        assert math.isclose(stat.r, 0.8, abs_tol=1e-12)
        assert math.isclose(stat.p, ref.pvalue, abs_tol=1e-10)
        assert math.isclose(stat.p, 0.104, abs_tol=1e-3)

    def test_random_series_match_scipy(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(3, 40))
            xs = rng.normal(size=n)
            ys = rng.normal(size=n)
            stat = pearson(xs, ys)
            ref = scipy.stats.pearsonr(xs, ys)
            assert math.isclose(stat.r, ref.statistic, abs_tol=1e-12)
            assert math.isclose(stat.p, ref.pvalue, abs_tol=1e-10)

    def test_affine_invariance_and_sign_flip(self):
        rng = np.random.default_rng(1)
        xs = rng.normal(size=20)
        ys = rng.normal(size=20)
        base = pearson(xs, ys).r
        assert math.isclose(pearson(3.0 * xs + 5.0, ys).r, base, abs_tol=1e-12)
        assert math.isclose(pearson(-2.0 * xs, ys).r, -base, abs_tol=1e-12)

    def test_zero_variance_is_an_error_not_zero(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 1.0, 1.0], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(EvalError):
            pearson([1, 2], [3, 4])


def discordant_results(b, c, n_concordant=10):
    """Two result lists with exactly b (A right, B wrong) and c (A wrong, B right)."""
    a_results, b_results = [], []
    i = 0
    for _ in range(b):
        a_results.append(result(f"s{i}", 1, 1))
        b_results.append(result(f"s{i}", 1, 0))
        i += 1
    for _ in range(c):
        a_results.append(result(f"s{i}", 1, 0))
        b_results.append(result(f"s{i}", 1, 1))
        i += 1
    for _ in range(n_concordant):
        a_results.append(result(f"s{i}", 1, 1))
        b_results.append(result(f"s{i}", 1, 1))
        i += 1
    return a_results, b_results


class TestMcnemar:
    def test_chi2_hand_example(self):
        stat, p = mcnemar(*discordant_results(10, 30))
        assert math.isclose(stat, 9.025, abs_tol=1e-12)
        assert math.isclose(p, 0.00266, abs_tol=1e-4)

    def test_identical_classifiers(self):
        assert mcnemar(*discordant_results(0, 0)) == (0.0, 1.0)

    def test_exact_binomial_hand_example(self):
        _, p = mcnemar(*discordant_results(2, 8))
        assert math.isclose(p, 0.1094, abs_tol=1e-4)

    def test_exact_binomial_against_direct_sum(self):
        for b, c in [(1, 5), (0, 7), (3, 3), (4, 9)]:
            _, p = mcnemar(*discordant_results(b, c))
            n, k = b + c, min(b, c)
            expected = min(1.0, 2 * sum(math.comb(n, i) for i in range(k + 1)) / 2**n)
            assert math.isclose(p, expected, abs_tol=1e-12)

    def test_symmetric_p(self):
        ra, rb = discordant_results(10, 30)
        assert mcnemar(ra, rb)[1] == mcnemar(rb, ra)[1]

    def test_chi2_branch_against_scipy(self):
        stat, p = mcnemar(*discordant_results(12, 25))
        assert math.isclose(p, scipy.stats.chi2.sf(stat, df=1), abs_tol=1e-12)

    def test_branches_agree_near_boundary(self):
        # sanity band: within 10% relative p at b+c = 25 boundary cases;
        # the corrected chi-square is only tail-accurate for moderate
        # asymmetry (at (5, 20) the true branches differ by ~25%)
        for b, c in [(8, 17), (10, 15), (12, 13)]:
            _, p_chi2 = mcnemar(*discordant_results(b, c), exact_below=0)
            _, p_exact = mcnemar(*discordant_results(b, c), exact_below=100)
            assert abs(p_chi2 - p_exact) / p_exact < 0.10

    def test_different_samples_rejected(self):
        with pytest.raises(EvalError):
            mcnemar([result("s0", 1, 1)], [result("other", 1, 1)])


class TestReport:
    def make_inputs(self):
        ds, rs = [], []
        cats = list(SampleCategory)
        i = 0
        for cat in cats:
            for dy in (0, 5, 9, 13, 17):
                label = cat.label
                year2 = 1930 + dy
                ds.append(sample(f"s{i}", 1930, year2, label, cat))
                rs.append(result(f"s{i}", label, label, confidence=0.6 + 0.01 * (i % 30)))
                i += 1
        return rs, ds

    def test_all_correct_gives_unit_f1(self, tmp_path):
        rs, ds = self.make_inputs()
        report(rs, ds, tmp_path)
        prf_csv = (tmp_path / "prf.csv").read_text().splitlines()
        for line in prf_csv[1:]:
            fields = line.split(",")
            assert float(fields[-1]) == 1.0

    def test_csv_round_trip_exact(self, tmp_path):
        rs, ds = self.make_inputs()
        report(rs, ds, tmp_path)
        joined = join_results(rs, ds)
        buckets = {
            (1, b.distance): b for b in by_distance(joined, label_filter=1)
        } | {
            (0, b.distance): b for b in by_distance(joined, label_filter=0)
        }
        lines = (tmp_path / "by_distance.csv").read_text().splitlines()[1:]
        assert lines
        for line in lines:
            label, distance, n, acc, conf = line.split(",")
            b = buckets[(int(label), int(distance))]
            assert float(acc) == b.accuracy
            assert float(conf) == b.mean_confidence

    def test_emits_expected_files(self, tmp_path):
        rs, ds = self.make_inputs()
        report(rs, ds, tmp_path, results_b=rs)
        for name in ("prf.csv", "by_category.csv", "by_distance.csv", "correlations.csv",
                     "mcnemar.txt", "summary.txt"):
            assert (tmp_path / name).exists()
