"""Loading a directory of plaintext files into an in-memory collection."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DocumentReadError, NoDocuments

_TRAILING_WS = re.compile(r"[^\S\n]+$", re.MULTILINE)
_BLANK_RUNS = re.compile(r"\n{3,}")


def normalize_text(raw: str) -> str:
    """Unify newlines, strip trailing whitespace and collapse blank-line runs."""
    text = raw.replace("\r\n", "\n").replace("\r", "\n")
    text = _TRAILING_WS.sub("", text)
    return _BLANK_RUNS.sub("\n\n", text)


def line_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of each line; the newline belongs to the line it ends.

    The spans tile ``text`` exactly. A trailing newline does not open an
    extra empty line.
    """
    spans = []
    start = 0
    while start < len(text):
        end = text.find("\n", start)
        end = len(text) if end < 0 else end + 1
        spans.append((start, end))
        start = end
    return spans


@dataclass(frozen=True)
class Document:
    doc_ind: int
    doc_id: str
    text: str
    lines: tuple[tuple[int, int], ...] = field(repr=False)

    @classmethod
    def from_text(cls, doc_ind: int, doc_id: str, raw: str) -> Document:
        text = normalize_text(raw)
        return cls(doc_ind, doc_id, text, tuple(line_spans(text)))

    def line_text(self, i: int) -> str:
        start, end = self.lines[i]
        return self.text[start:end].rstrip("\n")

    @property
    def n_lines(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class Corpus:
    docs: tuple[Document, ...]

    def __post_init__(self):
        if not self.docs:
            raise NoDocuments("a corpus needs at least one document")
        for i, doc in enumerate(self.docs):
            if doc.doc_ind != i:
                raise ValueError(f"document {doc.doc_id!r} has doc_ind {doc.doc_ind}, expected {i}")

    @property
    def n(self) -> int:
        return len(self.docs)

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    def __getitem__(self, i: int) -> Document:
        return self.docs[i]

    @classmethod
    def from_texts(cls, texts: dict[str, str] | list[str]) -> Corpus:
        """Build a corpus in memory; dict keys become doc ids."""
        if isinstance(texts, dict):
            items = sorted(texts.items())
        else:
            items = [(f"doc{i:04d}", t) for i, t in enumerate(texts)]
        return cls(tuple(Document.from_text(i, doc_id, raw) for i, (doc_id, raw) in enumerate(items)))


def load_corpus(dir_path: str | Path) -> Corpus:
    """Read every regular file of ``dir_path`` (sorted by name) as UTF-8 text."""
    root = Path(dir_path)
    if not root.is_dir():
        raise NoDocuments(f"{root} is not a directory")
    files = sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise NoDocuments(f"no documents found in {root}")
    docs = []
    for i, path in enumerate(files):
        try:
            raw = path.read_bytes().decode("utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise DocumentReadError(path, exc) from exc
        docs.append(Document.from_text(i, path.stem, raw))
    return Corpus(tuple(docs))
