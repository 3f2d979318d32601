"""Character n-gram tf-idf features.

The verifier compares texts in a space of the ``max_size`` most frequent
character n-grams of the training texts (n=2 by default), weighted by
smoothed idf and L2-normalized.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from authverify.corpus import normalize_text


class FeatureError(Exception):
    pass


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, weight) pairs; no explicit zeros, weights >= 0."""

    indices: np.ndarray  # int64, strictly increasing
    weights: np.ndarray  # float64, > 0

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def total(self) -> float:
        return float(self.weights.sum())

    def restrict(self, mask: np.ndarray) -> "SparseVector":
        """Keep only entries whose index is set in the boolean ``mask``."""
        keep = mask[self.indices]
        return SparseVector(self.indices[keep], self.weights[keep])

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        out[self.indices] = self.weights
        return out


EMPTY_VECTOR = SparseVector(np.empty(0, dtype=np.int64), np.empty(0))


def _ngrams(text: str, n: int):
    return (text[i : i + n] for i in range(len(text) - n + 1))


@dataclass
class Vocabulary:
    """n-gram -> dense index map, ranked by corpus frequency."""

    index: dict[str, int]
    n: int = 2
    max_size: int = 50_000

    def __len__(self) -> int:
        return len(self.index)


@dataclass
class IdfTable:
    idf: np.ndarray  # indexed by vocabulary index
    n_docs: int


def build_vocabulary(training_texts: list[str], n: int = 2, max_size: int = 50_000) -> Vocabulary:
    """Rank n-grams by total corpus frequency (ties lexicographic) and keep the top ``max_size``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter[str] = Counter()
    for text in training_texts:
        counts.update(_ngrams(normalize_text(text), n))
    if not counts:
        raise FeatureError("empty training corpus: no n-grams observed")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_size]
    return Vocabulary(index={g: i for i, (g, _) in enumerate(ranked)}, n=n, max_size=max_size)


def build_idf(training_texts: list[str], vocab: Vocabulary) -> IdfTable:
    """Smoothed idf: ln((1 + N) / (1 + df)) + 1, df counted per training text."""
    df = np.zeros(len(vocab), dtype=np.int64)
    for text in training_texts:
        seen = {g for g in _ngrams(normalize_text(text), vocab.n) if g in vocab.index}
        for g in seen:
            df[vocab.index[g]] += 1
    n_docs = len(training_texts)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    return IdfTable(idf=idf, n_docs=n_docs)


def vectorize(text: str, vocab: Vocabulary, idf: IdfTable, normalize: bool = True) -> SparseVector:
    """tf * idf over in-vocabulary n-grams, L2-normalized."""
    counts: Counter[int] = Counter()
    for g in _ngrams(normalize_text(text), vocab.n):
        i = vocab.index.get(g)
        if i is not None:
            counts[i] += 1
    if not counts:
        return EMPTY_VECTOR
    indices = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    weights = np.array([counts[i] for i in indices], dtype=np.float64) * idf.idf[indices]
    if normalize:
        weights = weights / math.sqrt(float(np.dot(weights, weights)))
    return SparseVector(indices=indices, weights=weights)


@dataclass
class FeatureModel:
    """Vocabulary + idf built from one training pass, with (de)serialization."""

    vocab: Vocabulary
    idf: IdfTable
    normalize: bool = True

    @classmethod
    def fit(cls, training_texts: list[str], n: int = 2, max_size: int = 50_000) -> "FeatureModel":
        vocab = build_vocabulary(training_texts, n=n, max_size=max_size)
        return cls(vocab=vocab, idf=build_idf(training_texts, vocab))

    def transform(self, text: str) -> SparseVector:
        return vectorize(text, self.vocab, self.idf, normalize=self.normalize)

    def save(self, path: str | Path) -> None:
        ngrams = [""] * len(self.vocab)
        for g, i in self.vocab.index.items():
            ngrams[i] = g
        payload = {
            "version": 1,
            "n": self.vocab.n,
            "max_size": self.vocab.max_size,
            "normalize": self.normalize,
            "ngrams": ngrams,
            "idf": [repr(v) for v in self.idf.idf.tolist()],
            "n_docs": self.idf.n_docs,
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("version") != 1:
            raise FeatureError(f"unsupported feature model version in {path}")
        vocab = Vocabulary(
            index={g: i for i, g in enumerate(payload["ngrams"])},
            n=payload["n"],
            max_size=payload["max_size"],
        )
        idf = IdfTable(
            idf=np.array([float(v) for v in payload["idf"]]), n_docs=payload["n_docs"]
        )
        return cls(vocab=vocab, idf=idf, normalize=payload["normalize"])
