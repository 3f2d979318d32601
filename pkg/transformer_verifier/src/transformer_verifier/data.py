"""Dataset loading and character-level tokenization.

The input format is the pair-dataset JSON-lines file produced by the
verification toolkit's pairgen stage: a header line followed by one record
per sample with at least sample_id, para1, para2 and label fields. This
module depends only on that wire format, not on the toolkit itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DataError(Exception):
    pass


@dataclass(frozen=True)
class Pair:
    sample_id: str
    text1: str
    text2: str
    label: int


def load_pairs(path: str | Path) -> list[Pair]:
    pairs: list[Pair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if "header" in rec:
                continue
            try:
                pairs.append(
                    Pair(
                        sample_id=str(rec["sample_id"]),
                        text1=rec["para1"],
                        text2=rec["para2"],
                        label=int(rec["label"]),
                    )
                )
            except KeyError as exc:
                raise DataError(f"{path}:{lineno}: missing field {exc}") from exc
    if not pairs:
        raise DataError(f"{path}: no samples found")
    return pairs


PAD, CLS, SEP, UNK = 0, 1, 2, 3
SPECIALS = {"[PAD]": PAD, "[CLS]": CLS, "[SEP]": SEP, "[UNK]": UNK}


class CharTokenizer:
    """Character vocabulary with BERT-style special tokens.

    The vocabulary is frozen at training time from the training texts;
    unseen characters map to [UNK] at inference.
    """

    def __init__(self, chars: list[str]):
        self.chars = list(chars)
        self.index = {c: i + len(SPECIALS) for i, c in enumerate(self.chars)}

    @classmethod
    def fit(cls, texts) -> "CharTokenizer":
        seen = set()
        for t in texts:
            seen.update(t)
        return cls(sorted(seen))

    def __len__(self) -> int:
        return len(self.chars) + len(SPECIALS)

    def encode_pair(self, text1: str, text2: str, max_seq_len: int):
        """[CLS] text1 [SEP] text2, truncated to max_seq_len.

        Returns (token_ids, segment_ids); segment 0 covers [CLS] and the
        first text, segment 1 the second.
        """
        ids = [CLS]
        segments = [0]
        for c in text1:
            ids.append(self.index.get(c, UNK))
            segments.append(0)
        ids.append(SEP)
        segments.append(0)
        for c in text2:
            ids.append(self.index.get(c, UNK))
            segments.append(1)
        return ids[:max_seq_len], segments[:max_seq_len]

    def to_dict(self) -> dict:
        return {"chars": self.chars}

    @classmethod
    def from_dict(cls, d: dict) -> "CharTokenizer":
        return cls(d["chars"])
