"""Evaluation statistics: confusion/P/R/F1, prediction pooling across runs,
accuracy-vs-year-distance series, Pearson correlation with p-values, and
McNemar's paired test."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import betainc

from authverify.impostors import VerificationResult
from authverify.pairgen import PairSample, SampleCategory


class EvalError(Exception):
    pass


class UndefinedCorrelationError(EvalError):
    """A series has zero variance; correlation is undefined (not zero)."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @classmethod
    def from_results(
        cls, results: Sequence[VerificationResult], positive_class: int = 1
    ) -> "ConfusionMatrix":
        tp = fp = fn = tn = 0
        for r in results:
            truth_pos = r.truth == positive_class
            pred_pos = r.label == positive_class
            if truth_pos and pred_pos:
                tp += 1
            elif not truth_pos and pred_pos:
                fp += 1
            elif truth_pos and not pred_pos:
                fn += 1
            else:
                tn += 1
        return cls(tp, fp, fn, tn)


def prf(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """(precision, recall, f1); zero denominators yield 0 by convention."""
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def pool_runs(runs: Sequence[Sequence[VerificationResult]]) -> list[VerificationResult]:
    """Concatenate per-run predictions into one list (no voting).

    The pooled confusion matrix is therefore the sum of the per-run ones.
    All runs must cover the same sample ids.
    """
    if not runs:
        return []
    ids = {r.sample_id for r in runs[0]}
    for i, run in enumerate(runs[1:], start=2):
        if {r.sample_id for r in run} != ids:
            raise EvalError(f"run {i} covers different samples than run 1")
    return [r for run in runs for r in run]


def majority_vote(runs: Sequence[Sequence[VerificationResult]]) -> list[VerificationResult]:
    """Alternative pooling: per-sample majority label, mean confidence."""
    if not runs:
        return []
    by_id: dict[str, list[VerificationResult]] = {}
    for run in runs:
        for r in run:
            by_id.setdefault(r.sample_id, []).append(r)
    out = []
    for sample_id in sorted(by_id):
        rs = by_id[sample_id]
        votes = sum(r.label for r in rs)
        label = 1 if votes * 2 > len(rs) else 0
        out.append(
            VerificationResult(
                sample_id=sample_id,
                truth=rs[0].truth,
                label=label,
                confidence=sum(r.confidence for r in rs) / len(rs),
            )
        )
    return out


@dataclass(frozen=True)
class DistanceBucket:
    distance: int
    n: int
    accuracy: float
    mean_confidence: float


def join_results(
    results: Sequence[VerificationResult], dataset: Sequence[PairSample]
) -> list[tuple[VerificationResult, PairSample]]:
    """Pair each result with its dataset sample by sample_id."""
    by_id = {s.sample_id: s for s in dataset}
    joined = []
    for r in results:
        if r.sample_id not in by_id:
            raise EvalError(f"result for unknown sample_id {r.sample_id!r}")
        joined.append((r, by_id[r.sample_id]))
    return joined


def by_distance(
    joined: Sequence[tuple[VerificationResult, PairSample]],
    label_filter: int | None = None,
    bucket_width: int = 1,
) -> list[DistanceBucket]:
    """Group results by |year1 - year2| and compute per-bucket accuracy and
    mean confidence. ``label_filter`` restricts to same-author (1) or
    different-author (0) samples; ``bucket_width`` > 1 coarsens sparse data."""
    groups: dict[int, list[tuple[int, float]]] = {}
    for r, s in joined:
        if label_filter is not None and s.label != label_filter:
            continue
        dy = abs(s.year1 - s.year2)
        if bucket_width > 1:
            dy = (dy // bucket_width) * bucket_width
        groups.setdefault(dy, []).append((int(r.label == r.truth), r.confidence))
    return [
        DistanceBucket(
            distance=dy,
            n=len(vals),
            accuracy=sum(v[0] for v in vals) / len(vals),
            mean_confidence=sum(v[1] for v in vals) / len(vals),
        )
        for dy, vals in sorted(groups.items())
    ]


@dataclass(frozen=True)
class CorrelationStat:
    r: float
    p: float
    n: int


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationStat:
    """Product-moment correlation with a two-tailed p-value from the
    t-distribution with n-2 degrees of freedom (via the regularized
    incomplete beta function)."""
    n = len(xs)
    if n != len(ys):
        raise EvalError("series lengths differ")
    if n < 3:
        raise EvalError("need at least 3 points for a p-value")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance in a series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t2 = df * r * r / (1.0 - r * r)
        # two-tailed: P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)
        p = float(betainc(df / 2.0, 0.5, df / (df + t2)))
    return CorrelationStat(r=r, p=p, n=n)


def _chi2_sf_1dof(x: float) -> float:
    return math.erfc(math.sqrt(x / 2.0))


def mcnemar(
    results_a: Sequence[VerificationResult],
    results_b: Sequence[VerificationResult],
    continuity: bool = True,
    exact_below: int = 25,
) -> tuple[float, float]:
    """McNemar's test on the discordant decisions of two classifiers.

    Uses the continuity-corrected chi-square (1 dof) when b + c >= exact_below
    and the exact two-tailed binomial otherwise. Returns (statistic, p); the
    statistic is the chi-square value on that branch and min(b, c) on the
    exact branch. b + c = 0 yields (0, 1) by convention.
    """
    a_by_id = {r.sample_id: r for r in results_a}
    b_by_id = {r.sample_id: r for r in results_b}
    if set(a_by_id) != set(b_by_id):
        raise EvalError("result lists cover different samples")
    b_count = c_count = 0
    for sample_id, ra in a_by_id.items():
        rb = b_by_id[sample_id]
        if ra.truth != rb.truth:
            raise EvalError(f"truth mismatch for sample {sample_id!r}")
        a_right = ra.label == ra.truth
        b_right = rb.label == rb.truth
        if a_right and not b_right:
            b_count += 1
        elif b_right and not a_right:
            c_count += 1
    disc = b_count + c_count
    if disc == 0:
        return 0.0, 1.0
    if disc >= exact_below:
        corr = 1.0 if continuity else 0.0
        stat = (abs(b_count - c_count) - corr) ** 2 / disc
        return stat, _chi2_sf_1dof(stat)
    k = min(b_count, c_count)
    tail = sum(math.comb(disc, i) for i in range(k + 1)) / 2.0**disc
    return float(k), min(1.0, 2.0 * tail)


# --- report files -----------------------------------------------------------

CATEGORY_ORDER = list(SampleCategory)


def _write_csv(path: Path, headers: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def report(
    results: Sequence[VerificationResult],
    dataset: Sequence[PairSample],
    out_dir: str | Path,
    results_b: Sequence[VerificationResult] | None = None,
    bucket_width: int = 1,
) -> dict:
    """Emit the evaluation bundle: per-class P/R/F1, per-category accuracy and
    confidence, distance series with correlations, and (optionally) a McNemar
    comparison. Floats are written at full repr precision so parsing the CSVs
    reproduces the in-memory values exactly."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    joined = join_results(results, dataset)

    prf_rows = []
    for positive in (1, 0):
        cm = ConfusionMatrix.from_results(results, positive_class=positive)
        p, r, f1 = prf(cm)
        prf_rows.append([positive, cm.tp, cm.fp, cm.fn, cm.tn, p, r, f1])
    _write_csv(out / "prf.csv", ["class", "tp", "fp", "fn", "tn", "precision", "recall", "f1"], prf_rows)

    cat_rows = []
    for category in CATEGORY_ORDER:
        sub = [(r, s) for r, s in joined if s.category is category]
        if not sub:
            continue
        acc = sum(r.label == r.truth for r, _ in sub) / len(sub)
        conf = sum(r.confidence for r, _ in sub) / len(sub)
        cat_rows.append([category.name, len(sub), acc, conf])
    _write_csv(out / "by_category.csv", ["category", "n", "accuracy", "mean_confidence"], cat_rows)

    dist_rows = []
    corr_rows = []
    for group_label in (1, 0):
        buckets = by_distance(joined, label_filter=group_label, bucket_width=bucket_width)
        for b in buckets:
            dist_rows.append([group_label, b.distance, b.n, b.accuracy, b.mean_confidence])
        for name, xs in (
            ("distance_vs_accuracy", [float(b.distance) for b in buckets]),
            ("confidence_vs_accuracy", [b.mean_confidence for b in buckets]),
        ):
            ys = [b.accuracy for b in buckets]
            try:
                stat = pearson(xs, ys)
                corr_rows.append([group_label, name, stat.r, stat.p, stat.n])
            except EvalError:
                corr_rows.append([group_label, name, "", "", len(buckets)])
    _write_csv(
        out / "by_distance.csv",
        ["label", "distance", "n", "accuracy", "mean_confidence"],
        dist_rows,
    )
    _write_csv(out / "correlations.csv", ["label", "pair", "r", "p", "n"], corr_rows)

    summary = {"n": len(results), "accuracy": ConfusionMatrix.from_results(results).accuracy}
    lines = [
        f"samples: {summary['n']}",
        f"accuracy: {summary['accuracy']:.4f}",
    ]
    if results_b is not None:
        stat, p = mcnemar(results, results_b)
        summary["mcnemar"] = {"statistic": stat, "p": p}
        (out / "mcnemar.txt").write_text(f"statistic={stat!r}\np={p!r}\n", encoding="utf-8")
        lines.append(f"mcnemar: statistic={stat:.4f} p={p:.6g}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return summary
