"""Synthetic corpora with controllable author signatures.

Each author writes with an order-1 Markov character model. Documents fall in
two publication eras more than a horizon apart; optionally, a subset of
authors switches to a perturbed transition matrix in the second era, which
degrades cross-era same-author similarity (a controllable "opinion shift").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from authverify.corpus import Document

DEFAULT_ALPHABET = "abcdefghijklmnop"


@dataclass
class SyntheticCorpus:
    documents: list[Document]
    perturbed_authors: frozenset
    alphabet: str


def _markov_text(rng: np.random.Generator, trans: np.ndarray, alphabet: str, length: int) -> str:
    k = len(alphabet)
    cum = np.cumsum(trans, axis=1)
    state = int(rng.integers(k))
    out = [alphabet[state]]
    draws = rng.random(length - 1)
    for u in draws:
        state = int(np.searchsorted(cum[state], u))
        if state >= k:
            state = k - 1
        out.append(alphabet[state])
    return "".join(out)


def _random_transitions(rng: np.random.Generator, k: int, concentration: float) -> np.ndarray:
    return rng.dirichlet(np.full(k, concentration), size=k)


def generate_synthetic_corpus(
    n_authors: int = 20,
    docs_per_era: int = 2,
    paragraphs_per_doc: int = 6,
    paragraph_length: int = 400,
    seed: int = 0,
    alphabet: str = DEFAULT_ALPHABET,
    concentration: float = 0.1,
    perturbed_fraction: float = 0.5,
    perturbation: float = 0.85,
    era1_years: tuple[int, int] = (1920, 1928),
    era2_years: tuple[int, int] = (1941, 1949),
) -> SyntheticCorpus:
    """Build a corpus where authorship is recoverable from character bigrams.

    ``perturbation`` mixes a fresh random transition matrix into the author's
    era-2 model for the first ``perturbed_fraction`` of authors (by index),
    weakening their cross-era stylistic signature while leaving within-era
    pairs untouched.
    """
    rng = np.random.default_rng(seed)
    k = len(alphabet)
    n_perturbed = round(n_authors * perturbed_fraction)
    perturbed = frozenset(f"a{j:03d}" for j in range(n_perturbed))
    documents: list[Document] = []
    for j in range(n_authors):
        author = f"a{j:03d}"
        base = _random_transitions(rng, k, concentration)
        if author in perturbed:
            noise = _random_transitions(rng, k, concentration)
            era2 = (1.0 - perturbation) * base + perturbation * noise
        else:
            era2 = base
        for era, (trans, (y0, y1)) in enumerate(((base, era1_years), (era2, era2_years))):
            for d in range(docs_per_era):
                year = int(rng.integers(y0, y1 + 1))
                paras = [
                    _markov_text(rng, trans, alphabet, paragraph_length)
                    for _ in range(paragraphs_per_doc)
                ]
                documents.append(
                    Document(
                        doc_id=f"{author}-e{era}-d{d}",
                        author_id=author,
                        year=year,
                        text="\n\n".join(paras),
                    )
                )
    return SyntheticCorpus(documents=documents, perturbed_authors=perturbed, alphabet=alphabet)


def write_manifest(corpus: SyntheticCorpus, path) -> None:
    """Write the corpus as an inline-text JSON-lines manifest."""
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "author_id": doc.author_id,
                        "year": doc.year,
                        "text": doc.text,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
