"""Paragraph-pair dataset construction.

Authors are grouped by document-year span, split author-disjointly between
train/dev/test, and pairs are sampled to exact per-category quotas. The five
categories stratify pairs by authorship and publication-year distance around
a horizon (default 10 years).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from authverify.corpus import Document, Paragraph, TokenizerConfig, segment_paragraphs, truncate_pair

SEPARATOR = " [SEP] "
DEFAULT_HORIZON = 10


class PairgenError(Exception):
    pass


class SampleCategory(Enum):
    SAME_DOC = 0
    SAME_AUTH_NEAR = 1
    SAME_AUTH_FAR = 2
    DIFF_AUTH_NEAR = 3
    DIFF_AUTH_FAR = 4

    @property
    def label(self) -> int:
        return 1 if self in (SampleCategory.SAME_DOC, SampleCategory.SAME_AUTH_NEAR, SampleCategory.SAME_AUTH_FAR) else 0


@dataclass(frozen=True)
class PairSample:
    sample_id: str
    author1: str
    author2: str
    year1: int
    year2: int
    doc1: str
    doc2: str
    para1: str
    para2: str
    joined: str
    label: int
    category: SampleCategory


@dataclass(frozen=True)
class QuotaSpec:
    """Per-category target counts for each split."""

    counts: dict  # split name -> {SampleCategory: int}
    horizon: int = DEFAULT_HORIZON
    include_same_doc: bool = True

    def for_split(self, split: str) -> dict:
        quotas = dict(self.counts[split])
        if not self.include_same_doc:
            quotas[SampleCategory.SAME_DOC] = 0
        return quotas


@dataclass(frozen=True)
class AuthorSplit:
    train: frozenset
    dev: frozenset
    test: frozenset
    permutation_seed: int

    def authors(self, split: str) -> frozenset:
        return getattr(self, split)


def categorize_pair(
    author1: str,
    year1: int,
    doc1: str,
    author2: str,
    year2: int,
    doc2: str,
    horizon: int = DEFAULT_HORIZON,
) -> SampleCategory:
    """Pure metadata categorization; |Δyear| equal to the horizon counts as NEAR."""
    if doc1 == doc2:
        if author1 != author2:
            raise PairgenError(
                f"document {doc1!r} attributed to two authors ({author1!r}, {author2!r})"
            )
        return SampleCategory.SAME_DOC
    near = abs(year1 - year2) <= horizon
    if author1 == author2:
        return SampleCategory.SAME_AUTH_NEAR if near else SampleCategory.SAME_AUTH_FAR
    return SampleCategory.DIFF_AUTH_NEAR if near else SampleCategory.DIFF_AUTH_FAR


def group_authors(corpus: Sequence[Document], horizon: int = DEFAULT_HORIZON):
    """Partition authors into (single-document, multi-doc within horizon,
    multi-doc spanning more than the horizon)."""
    years: dict[str, list[int]] = {}
    for doc in corpus:
        years.setdefault(doc.author_id, []).append(doc.year)
    single, multi_near, multi_far = [], [], []
    for author in sorted(years):
        ys = years[author]
        if len(ys) == 1:
            single.append(author)
        elif max(ys) - min(ys) <= horizon:
            multi_near.append(author)
        else:
            multi_far.append(author)
    return single, multi_near, multi_far


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    exact = [n * r for r in ratios]
    base = [int(x) for x in exact]
    short = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def split_authors(
    groups: Sequence[Sequence[str]],
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> AuthorSplit:
    """Split each author group independently at the given ratios.

    Deterministic for a given seed; a group smaller than the number of splits
    goes entirely to train (with a warning).
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    parts: list[list[str]] = [[], [], []]
    for gi, group in enumerate(groups):
        members = sorted(group)
        if 0 < len(members) < len(ratios):
            warnings.warn(
                f"author group {gi} has {len(members)} member(s), fewer than "
                f"{len(ratios)} splits; assigning all to train"
            )
            parts[0].extend(members)
            continue
        rng = np.random.default_rng(np.random.SeedSequence([seed, gi]))
        perm = list(rng.permutation(len(members)))
        sizes = _largest_remainder(len(members), ratios)
        start = 0
        for si, size in enumerate(sizes):
            parts[si].extend(members[i] for i in perm[start : start + size])
            start += size
    return AuthorSplit(
        train=frozenset(parts[0]),
        dev=frozenset(parts[1]),
        test=frozenset(parts[2]),
        permutation_seed=seed,
    )


@dataclass
class _DocEntry:
    doc_id: str
    year: int
    paragraphs: list[Paragraph]


def _index_split(
    corpus: Sequence[Document],
    authors: Iterable[str],
    tok: TokenizerConfig,
    min_tokens: int,
) -> dict[str, list[_DocEntry]]:
    allowed = set(authors)
    by_author: dict[str, list[_DocEntry]] = {}
    for doc in corpus:
        if doc.author_id not in allowed:
            continue
        paras = segment_paragraphs(doc, tok, min_tokens)
        if paras:
            by_author.setdefault(doc.author_id, []).append(
                _DocEntry(doc_id=doc.doc_id, year=doc.year, paragraphs=paras)
            )
    for entries in by_author.values():
        entries.sort(key=lambda e: e.doc_id)
    return by_author


def _year_ok(dy: int, category: SampleCategory, horizon: int) -> bool:
    if category in (SampleCategory.SAME_AUTH_NEAR, SampleCategory.DIFF_AUTH_NEAR):
        return dy <= horizon
    return dy > horizon


class _CategorySampler:
    """Rejection sampler for one category with dataset-wide deduplication."""

    def __init__(self, by_author, horizon, focus_author, rng):
        self.by_author = by_author
        self.horizon = horizon
        self.focus = focus_author
        self.rng = rng
        self._pair_cache: dict = {}

    def _authors_for_positive(self, category):
        if self.focus is not None:
            pool = [self.focus] if self.focus in self.by_author else []
        else:
            pool = sorted(self.by_author)
        if category is SampleCategory.SAME_DOC:
            return [a for a in pool if any(len(e.paragraphs) >= 2 for e in self.by_author[a])]
        return [a for a in pool if self._doc_pairs(a, a, category)]

    def _doc_pairs(self, a1, a2, category):
        """Eligible ordered document pairs (cached per author pair and category)."""
        key = (a1, a2, category)
        if key not in self._pair_cache:
            pairs = []
            for e1 in self.by_author[a1]:
                for e2 in self.by_author[a2]:
                    if a1 == a2 and e1.doc_id == e2.doc_id:
                        continue
                    if _year_ok(abs(e1.year - e2.year), category, self.horizon):
                        pairs.append((e1, e2))
            self._pair_cache[key] = pairs
        return self._pair_cache[key]

    def draw(self, category):
        """One attempt; returns (entry1, para1, entry2, para2, author1, author2) or None."""
        rng = self.rng
        if category is SampleCategory.SAME_DOC:
            eligible = self._authors_for_positive(category)
            if not eligible:
                return None
            author = eligible[rng.integers(len(eligible))]
            docs = [e for e in self.by_author[author] if len(e.paragraphs) >= 2]
            entry = docs[rng.integers(len(docs))]
            i1, i2 = rng.choice(len(entry.paragraphs), size=2, replace=False)
            return entry, entry.paragraphs[i1], entry, entry.paragraphs[i2], author, author
        if category in (SampleCategory.SAME_AUTH_NEAR, SampleCategory.SAME_AUTH_FAR):
            eligible = self._authors_for_positive(category)
            if not eligible:
                return None
            author = eligible[rng.integers(len(eligible))]
            pairs = self._doc_pairs(author, author, category)
            e1, e2 = pairs[rng.integers(len(pairs))]
            p1 = e1.paragraphs[rng.integers(len(e1.paragraphs))]
            p2 = e2.paragraphs[rng.integers(len(e2.paragraphs))]
            return e1, p1, e2, p2, author, author
        # different-author categories
        authors = sorted(self.by_author)
        if len(authors) < 2:
            return None
        if self.focus is not None:
            if self.focus not in self.by_author:
                return None
            a1 = self.focus
        else:
            a1 = authors[rng.integers(len(authors))]
        others = [a for a in authors if a != a1]
        a2 = others[rng.integers(len(others))]
        pairs = self._doc_pairs(a1, a2, category)
        if not pairs:
            return None
        e1, e2 = pairs[rng.integers(len(pairs))]
        p1 = e1.paragraphs[rng.integers(len(e1.paragraphs))]
        p2 = e2.paragraphs[rng.integers(len(e2.paragraphs))]
        return e1, p1, e2, p2, a1, a2


def generate_pairs(
    corpus: Sequence[Document],
    authors: Iterable[str],
    quotas: dict,
    seed: int,
    tok: TokenizerConfig = TokenizerConfig(),
    min_tokens: int = 200,
    max_combined: int = 512,
    reserve: int = 3,
    horizon: int = DEFAULT_HORIZON,
    focus_author: str | None = None,
    rejection_factor: int = 100,
) -> list[PairSample]:
    """Sample pairs to exact per-category quotas.

    Sampling order per attempt: author (uniform over eligible), then document
    pair (uniform over eligible ordered pairs), then one paragraph per
    document; duplicate (doc, paragraph) unordered pairs are rejected.
    Deterministic per seed: each category consumes its own RNG stream derived
    from (seed, category), and categories are processed in enum order.

    In focus-author mode the focus author supplies the first paragraph of
    every sample; the other side comes from the focus author's own works
    (positives) or from the rest of the split (negatives).
    """
    by_author = _index_split(corpus, authors, tok, min_tokens)
    samples: list[PairSample] = []
    seen: set = set()
    counter = 0
    for category in SampleCategory:
        quota = int(quotas.get(category, 0))
        if quota == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence([seed, category.value]))
        sampler = _CategorySampler(by_author, horizon, focus_author, rng)
        produced = 0
        attempts = 0
        max_attempts = rejection_factor * quota
        while produced < quota:
            if attempts >= max_attempts:
                raise PairgenError(
                    f"quota unsatisfiable for category {category.name}: "
                    f"{produced}/{quota} after {attempts} attempts"
                )
            attempts += 1
            drawn = sampler.draw(category)
            if drawn is None:
                # No eligible authors/documents at all: fail fast.
                raise PairgenError(
                    f"quota unsatisfiable for category {category.name}: "
                    "no eligible author/document pairs in this split"
                )
            e1, p1, e2, p2, a1, a2 = drawn
            key = tuple(sorted([(e1.doc_id, p1.index), (e2.doc_id, p2.index)]))
            if key in seen:
                continue
            seen.add(key)
            t1, t2 = truncate_pair(p1.text, p2.text, tok, max_combined, reserve)
            samples.append(
                PairSample(
                    sample_id=f"s{counter:06d}",
                    author1=a1,
                    author2=a2,
                    year1=e1.year,
                    year2=e2.year,
                    doc1=e1.doc_id,
                    doc2=e2.doc_id,
                    para1=t1,
                    para2=t2,
                    joined=t1 + SEPARATOR + t2,
                    label=category.label,
                    category=category,
                )
            )
            counter += 1
            produced += 1
    return samples


def write_dataset(samples: Sequence[PairSample], path: str | Path, header: dict | None = None) -> None:
    """JSON-lines dataset: a header line followed by one sample per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"header": header or {}}, ensure_ascii=False, sort_keys=True) + "\n")
        for s in samples:
            rec = {
                "sample_id": s.sample_id,
                "author1": s.author1,
                "author2": s.author2,
                "year1": s.year1,
                "year2": s.year2,
                "doc1": s.doc1,
                "doc2": s.doc2,
                "para1": s.para1,
                "para2": s.para2,
                "joined": s.joined,
                "label": s.label,
                "category": s.category.name,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_dataset(path: str | Path) -> tuple[dict, list[PairSample]]:
    samples: list[PairSample] = []
    header: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if lineno == 0 and "header" in rec:
                header = rec["header"]
                continue
            rec["category"] = SampleCategory[rec["category"]]
            samples.append(PairSample(**rec))
    return header, samples
