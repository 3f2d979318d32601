"""Impostors Method verifier.

For each verification problem the disputed text (second paragraph) is compared
against the known text (first paragraph) and randomly drawn impostor texts
under random feature subsets: the known text "wins" an iteration when it is
strictly more similar (minmax) to the disputed text than every sampled
impostor. The fraction of winning iterations is the score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from authverify.features import FeatureModel, SparseVector
from authverify.pairgen import PairSample


class ImpostorsError(Exception):
    pass


@dataclass(frozen=True)
class ImpostorParams:
    iterations: int = 100
    feature_fraction: float = 0.9
    pool_size: int = 100
    impostors_per_iter: int = 5
    threshold: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.feature_fraction <= 1.0):
            raise ValueError("feature_fraction must be in (0, 1]")
        if self.impostors_per_iter > self.pool_size:
            raise ValueError("impostors_per_iter cannot exceed pool_size")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class VerificationResult:
    sample_id: str
    truth: int
    label: int
    confidence: float
    score: float | None = None


@dataclass(frozen=True)
class PoolCandidate:
    """Impostor candidate: a training paragraph with its provenance."""

    text: str
    author_id: str
    doc_id: str


def minmax_similarity(x: SparseVector, y: SparseVector) -> float:
    """Ruzicka similarity: sum(min(x, y)) / sum(max(x, y)); 0 when both empty.

    For non-negative vectors only the shared support contributes to the
    numerator, and sum(max) = sum(x) + sum(y) - sum(min over shared support).
    """
    shared, ix, iy = np.intersect1d(x.indices, y.indices, assume_unique=True, return_indices=True)
    s_min = float(np.minimum(x.weights[ix], y.weights[iy]).sum()) if len(shared) else 0.0
    s_max = x.total() + y.total() - s_min
    if s_max <= 0.0:
        return 0.0
    return s_min / s_max


def _dense_minmax_arrays(disputed: np.ndarray, others: np.ndarray):
    """Per-feature min/max of the disputed vector against each row of ``others``."""
    mins = np.minimum(disputed[None, :], others)
    maxs = np.maximum(disputed[None, :], others)
    return mins, maxs


def verify_vectors(
    known: SparseVector,
    disputed: SparseVector,
    pool: Sequence[SparseVector],
    vocab_size: int,
    params: ImpostorParams,
    rng: np.random.Generator,
) -> tuple[float, int, float]:
    """Core loop over pre-vectorized texts; returns (score, label, confidence).

    RNG draw order is fixed and part of the output contract: first the
    pool subset (pool_size without replacement), then per iteration the
    feature subset (only when a strict subset) followed by the impostor
    choice. The similarity arithmetic is vectorized but consumes the same
    stream a naive loop would.
    """
    if len(pool) < params.pool_size:
        raise ImpostorsError(
            f"impostor pool too small: {len(pool)} candidates < pool_size {params.pool_size}"
        )
    if vocab_size < 1:
        raise ImpostorsError("empty feature model")

    pool_idx = rng.choice(len(pool), size=params.pool_size, replace=False)
    k = math.ceil(params.feature_fraction * vocab_size)

    d = disputed.to_dense(vocab_size)
    kn = known.to_dense(vocab_size)
    imps = np.zeros((params.pool_size, vocab_size))
    for row, j in enumerate(pool_idx):
        v = pool[j]
        imps[row, v.indices] = v.weights

    # Per-feature contributions; an iteration's similarity is a masked sum
    # of these, so the loop below reduces to indexed sums.
    kn_min = np.minimum(d, kn)
    kn_max = np.maximum(d, kn)
    imp_min, imp_max = _dense_minmax_arrays(d, imps)

    wins = 0
    full = np.arange(vocab_size)
    for _ in range(params.iterations):
        feats = full if k >= vocab_size else rng.choice(vocab_size, size=k, replace=False)
        chosen = rng.choice(params.pool_size, size=params.impostors_per_iter, replace=False)
        denom = kn_max[feats].sum()
        sim_known = kn_min[feats].sum() / denom if denom > 0 else 0.0
        num_i = imp_min[np.ix_(chosen, feats)].sum(axis=1)
        den_i = imp_max[np.ix_(chosen, feats)].sum(axis=1)
        sim_imp = np.where(den_i > 0, num_i / np.maximum(den_i, 1e-300), 0.0)
        if sim_known > sim_imp.max():
            wins += 1

    score = wins / params.iterations
    label = 1 if score > params.threshold else 0
    confidence = max(score, 1.0 - score)
    return score, label, confidence


def _admissible_pool(pool: Sequence[PoolCandidate], sample: PairSample) -> list[int]:
    """Candidates not authored by either author in the problem (no label leakage)."""
    excluded = {sample.author1, sample.author2}
    return [i for i, c in enumerate(pool) if c.author_id not in excluded]


def verify(
    sample: PairSample,
    model: FeatureModel,
    pool: Sequence[PoolCandidate],
    params: ImpostorParams,
    seed: int | np.random.SeedSequence,
    pool_vectors: Sequence[SparseVector] | None = None,
) -> VerificationResult:
    """Verify one pair: para1 is the known text, para2 the disputed one."""
    if pool_vectors is None:
        pool_vectors = [model.transform(c.text) for c in pool]
    keep = _admissible_pool(pool, sample)
    rng = np.random.default_rng(seed)
    score, label, confidence = verify_vectors(
        known=model.transform(sample.para1),
        disputed=model.transform(sample.para2),
        pool=[pool_vectors[i] for i in keep],
        vocab_size=len(model.vocab),
        params=params,
        rng=rng,
    )
    return VerificationResult(
        sample_id=sample.sample_id,
        truth=sample.label,
        label=label,
        confidence=confidence,
        score=score,
    )


def run_testset(
    dataset: Sequence[PairSample],
    model: FeatureModel,
    pool: Sequence[PoolCandidate],
    params: ImpostorParams,
    seed: int,
    threads: int = 1,
) -> list[VerificationResult]:
    """One result per sample; per-sample RNG streams derived from (seed, index)
    make the output independent of evaluation order and thread count."""
    pool_vectors = [model.transform(c.text) for c in pool]

    def one(item):
        i, sample = item
        try:
            return verify(
                sample,
                model,
                pool,
                params,
                seed=np.random.SeedSequence([seed, i]),
                pool_vectors=pool_vectors,
            )
        except ImpostorsError as exc:
            raise ImpostorsError(f"sample {i} ({sample.sample_id}): {exc}") from exc

    items = list(enumerate(dataset))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            return list(pool_exec.map(one, items))
    return [one(item) for item in items]
