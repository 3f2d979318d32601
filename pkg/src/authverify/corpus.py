"""Corpus ingest, paragraph segmentation and pair truncation.

A corpus is described by a JSON-lines manifest, one object per document:

    {"doc_id": "...", "author_id": "...", "year": 1931, "path": "rel/doc.txt"}

or with the text inline under a ``"text"`` key instead of ``"path"``.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class CorpusError(Exception):
    """Raised for malformed manifests or invalid documents."""


class TokenizerMode(str, Enum):
    UNICODE_CHAR = "unicode_char"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class TokenizerConfig:
    """Token-unit decision.

    ``unicode_char`` counts Unicode scalar values (suited to Japanese and
    other unsegmented scripts); ``whitespace`` counts whitespace-delimited
    tokens.
    """

    mode: TokenizerMode = TokenizerMode.UNICODE_CHAR

    def __post_init__(self):
        if not isinstance(self.mode, TokenizerMode):
            object.__setattr__(self, "mode", TokenizerMode(self.mode))


@dataclass(frozen=True)
class Document:
    doc_id: str
    author_id: str
    year: int
    text: str

    def __post_init__(self):
        if self.year <= 0:
            raise CorpusError(f"document {self.doc_id!r}: year must be positive, got {self.year}")
        if not self.text:
            raise CorpusError(f"document {self.doc_id!r}: empty text")


@dataclass(frozen=True)
class Paragraph:
    doc_id: str
    index: int
    text: str
    token_count: int


_WS_TOKEN = re.compile(r"\S+")


def count_tokens(text: str, tok: TokenizerConfig) -> int:
    if tok.mode is TokenizerMode.UNICODE_CHAR:
        return len(text)
    return len(_WS_TOKEN.findall(text))


def token_prefix(text: str, tok: TokenizerConfig, n: int) -> str:
    """Prefix of ``text`` containing at most the first ``n`` tokens."""
    if n <= 0:
        return ""
    if tok.mode is TokenizerMode.UNICODE_CHAR:
        return text[:n]
    spans = list(_WS_TOKEN.finditer(text))
    if len(spans) <= n:
        return text
    return text[: spans[n - 1].end()]


def load_manifest(path: str | Path) -> list[Document]:
    """Load a JSON-lines manifest into a list of documents.

    Relative ``path`` entries resolve against the manifest's directory.
    Rejects duplicate doc_ids and reports malformed records by line number.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"manifest not found: {path}")
    base = path.parent
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                doc_id = rec["doc_id"]
                author_id = rec["author_id"]
                year = rec["year"]
            except KeyError as exc:
                raise CorpusError(f"{path}:{lineno}: missing field {exc}") from exc
            if not isinstance(year, int):
                raise CorpusError(f"{path}:{lineno}: year must be an integer")
            if doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            if "text" in rec:
                text = rec["text"]
            elif "path" in rec:
                txt_path = base / rec["path"]
                if not txt_path.exists():
                    raise CorpusError(f"{path}:{lineno}: text file not found: {txt_path}")
                text = txt_path.read_text(encoding="utf-8")
            else:
                raise CorpusError(f"{path}:{lineno}: record needs 'text' or 'path'")
            try:
                docs.append(Document(doc_id=doc_id, author_id=author_id, year=year, text=text))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
    return docs


_PARA_SPLIT = re.compile(r"\n+")


def segment_paragraphs(doc: Document, tok: TokenizerConfig, min_tokens: int) -> list[Paragraph]:
    """Split a document on newline boundaries and apply the length filter.

    Paragraph indices refer to positions in the unfiltered paragraph list so
    that they remain stable regardless of ``min_tokens``.
    """
    if min_tokens < 0:
        raise ValueError("min_tokens must be >= 0")
    normalized = doc.text.replace("\r\n", "\n").replace("\r", "\n")
    out: list[Paragraph] = []
    index = 0
    for chunk in _PARA_SPLIT.split(normalized):
        text = chunk.strip()
        if not text:
            continue
        n = count_tokens(text, tok)
        if n >= min_tokens:
            out.append(Paragraph(doc_id=doc.doc_id, index=index, text=text, token_count=n))
        index += 1
    return out


def truncate_pair(
    text1: str,
    text2: str,
    tok: TokenizerConfig,
    max_combined: int,
    reserve: int = 3,
) -> tuple[str, str]:
    """Cap each side of a pair at an equal per-side token budget.

    The budget is ``(max_combined - reserve) // 2`` per side, where ``reserve``
    covers separator/control positions. Texts within budget pass unmodified;
    longer ones are cut to a prefix. Budget surplus on the short side is not
    reallocated to the long side.
    """
    if max_combined < 2:
        raise ValueError("max_combined must be >= 2")
    budget = (max_combined - reserve) // 2
    out = []
    for text in (text1, text2):
        if count_tokens(text, tok) > budget:
            text = token_prefix(text, tok, budget)
        out.append(text)
    return out[0], out[1]


def corpus_summary(docs: list[Document], tok: TokenizerConfig, min_tokens: int) -> dict:
    """Ingest summary: documents, authors and admissible paragraph counts."""
    n_paragraphs = sum(len(segment_paragraphs(d, tok, min_tokens)) for d in docs)
    return {
        "documents": len(docs),
        "authors": len({d.author_id for d in docs}),
        "admissible_paragraphs": n_paragraphs,
    }


def save_corpus(docs: list[Document], path: str | Path) -> None:
    """Serialize a loaded corpus (versioned JSON, deterministic byte output)."""
    payload = {
        "version": 1,
        "documents": [
            {"doc_id": d.doc_id, "author_id": d.author_id, "year": d.year, "text": d.text}
            for d in docs
        ],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True), encoding="utf-8")


def load_corpus(path: str | Path) -> list[Document]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != 1:
        raise CorpusError(f"unsupported corpus file version in {path}")
    return [Document(**rec) for rec in payload["documents"]]


def normalize_text(text: str) -> str:
    """NFC normalization with whitespace runs collapsed to a single space."""
    return re.sub(r"\s+", " ", unicodedata.normalize("NFC", text)).strip()
