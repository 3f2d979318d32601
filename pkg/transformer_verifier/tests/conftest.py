"""Shared helpers: a small author-signature corpus generator that writes
pair datasets in the upstream pairgen JSON-lines format.

Each author writes with an order-1 Markov character model over a 16-letter
alphabet (rows drawn from a sharp Dirichlet), so same-author pairs are
separable from different-author pairs by character statistics alone. This
mirrors, at short text length, the synthetic corpus the verification
toolkit's own end-to-end tests use.
"""

import json

import numpy as np

ALPHABET = "abcdefghijklmnop"


class MarkovAuthors:
    def __init__(self, n_authors=20, concentration=0.1, seed=0):
        self.rng = np.random.default_rng(seed)
        k = len(ALPHABET)
        self.models = [
            self.rng.dirichlet(np.full(k, concentration), size=k) for _ in range(n_authors)
        ]
        self.cums = [np.cumsum(m, axis=1) for m in self.models]
        self.n_authors = n_authors

    def text(self, author: int, length: int = 62) -> str:
        cum = self.cums[author]
        k = len(ALPHABET)
        state = int(self.rng.integers(k))
        out = [ALPHABET[state]]
        for u in self.rng.random(length - 1):
            state = min(int(np.searchsorted(cum[state], u)), k - 1)
            out.append(ALPHABET[state])
        return "".join(out)

    def pairs(self, n: int, length: int = 62):
        """Balanced same/different-author pairs as pairgen-format records."""
        records = []
        for i in range(n):
            if i % 2 == 0:
                a = b = int(self.rng.integers(self.n_authors))
            else:
                a, b = (int(x) for x in self.rng.choice(self.n_authors, size=2, replace=False))
            t1, t2 = self.text(a, length), self.text(b, length)
            records.append(
                {
                    "sample_id": f"s{i:06d}",
                    "author1": f"a{a:03d}",
                    "author2": f"a{b:03d}",
                    "year1": 1924,
                    "year2": 1926,
                    "doc1": f"a{a:03d}-d0",
                    "doc2": f"a{b:03d}-d1",
                    "para1": t1,
                    "para2": t2,
                    "joined": t1 + " [SEP] " + t2,
                    "label": 1 if a == b else 0,
                    "category": "SAME_AUTH_NEAR" if a == b else "DIFF_AUTH_NEAR",
                }
            )
        return records


def write_dataset(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"header": {"source": "markov-authors"}}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
