"""Rule-based header detection and (header, body) segmentation."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field

from .corpus import Corpus, Document
from .errors import ConfigError

ENGLISH_NUMBERING = (
    r"^\d+(\.\d+)*[.)]?\s+\S",
    r"^(item|article|section|chapter|part|schedule|exhibit)\s+[0-9ivxlc]+[a-z]?\b",
    r"^[ivxlc]+[.)]\s+\S",
    r"^\(?[a-z]\)\s+\S",
)
HEBREW_NUMBERING = ENGLISH_NUMBERING + (
    r"^[א-ת]{1,2}['\".)]\s*\S",
    r"^(פרק|סעיף)\s",  # "chapter" / "clause"
)

TERMINAL_PUNCTUATION = (".", "!", "?", ";", "…", "。")


@dataclass(frozen=True)
class HeaderRuleConfig:
    max_header_chars: int = 80
    max_header_tokens: int = 12
    require_no_terminal_punctuation: bool = True
    titlecase_min_ratio: float = 0.5
    numbering_patterns: tuple[str, ...] = ENGLISH_NUMBERING
    noise_doc_fraction: float = 0.5
    noise_position_spread: float = 0.3
    _compiled: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_header_chars < 1 or self.max_header_tokens < 1:
            raise ConfigError("header length limits must be positive")
        if not 0.0 <= self.titlecase_min_ratio <= 1.0:
            raise ConfigError("titlecase_min_ratio must lie in [0, 1]")
        if not 0.0 < self.noise_doc_fraction <= 1.0:
            raise ConfigError("noise_doc_fraction must lie in (0, 1]")
        if not 0.0 <= self.noise_position_spread <= 1.0:
            raise ConfigError("noise_position_spread must lie in [0, 1]")
        try:
            compiled = tuple(re.compile(p, re.IGNORECASE) for p in self.numbering_patterns)
        except re.error as exc:
            raise ConfigError(f"bad numbering pattern: {exc}") from exc
        object.__setattr__(self, "numbering_patterns", tuple(self.numbering_patterns))
        object.__setattr__(self, "_compiled", compiled)

    @classmethod
    def english(cls, **overrides) -> HeaderRuleConfig:
        return cls(**overrides)

    @classmethod
    def hebrew(cls, **overrides) -> HeaderRuleConfig:
        # no capitalization signal; rely on length and numbering
        values = {"titlecase_min_ratio": 0.0, "numbering_patterns": HEBREW_NUMBERING}
        values.update(overrides)
        return cls(**values)

    def matches_numbering(self, line: str) -> bool:
        return any(p.match(line) for p in self._compiled)


HEADER_PROFILES = {"english": HeaderRuleConfig.english, "hebrew": HeaderRuleConfig.hebrew}


@dataclass(frozen=True)
class Segment:
    doc_ind: int
    seg_ind: float
    head_text: str
    body_text: str
    head_span: tuple[int, int]
    body_span: tuple[int, int]
    order: int = 0  # position among the document's segments

    @property
    def span(self) -> tuple[int, int]:
        return (self.head_span[0], self.body_span[1])


def titlecase_ratio(line: str) -> float:
    """Fraction of cased word tokens whose first letter is uppercase."""
    cased = upper = 0
    for token in line.split():
        first = next((ch for ch in token if ch.isalpha()), None)
        if first is None or not (first.isupper() or first.islower()):
            continue
        cased += 1
        upper += first.isupper()
    return upper / cased if cased else 0.0


def is_header_line(line: str, rules: HeaderRuleConfig) -> bool:
    line = line.strip()
    if not line or not any(ch.isalnum() for ch in line):
        return False
    if len(line) > rules.max_header_chars or len(line.split()) > rules.max_header_tokens:
        return False
    if rules.require_no_terminal_punctuation and line.endswith(TERMINAL_PUNCTUATION):
        return False
    if rules.titlecase_min_ratio == 0:
        return True
    return titlecase_ratio(line) >= rules.titlecase_min_ratio or rules.matches_numbering(line)


def detect_header_candidates(doc: Document, rules: HeaderRuleConfig) -> list[int]:
    return [i for i in range(doc.n_lines) if is_header_line(doc.line_text(i), rules)]


def _noise_key(line: str) -> str:
    return " ".join(line.casefold().split())


def _is_page_number(line: str) -> bool:
    stripped = "".join(ch for ch in line if ch.isalnum())
    return stripped.isdigit()


def filter_collection_noise(
    per_doc_candidates: dict[int, list[int]], corpus: Corpus, rules: HeaderRuleConfig
) -> dict[int, list[int]]:
    """Drop candidates that look like recurring page furniture.

    A text is treated as noise when it occurs in more than
    ``noise_doc_fraction`` of the documents (and in at least two of them)
    while its relative line position wanders by more than
    ``noise_position_spread``. Real recurring headers sit at a stable
    position; running heads, signatures and page numbers do not.
    Pure-number lines are always dropped.
    """
    docs_with = defaultdict(set)
    positions = defaultdict(list)
    for doc_ind, lines in per_doc_candidates.items():
        doc = corpus[doc_ind]
        denom = max(1, doc.n_lines - 1)
        for i in lines:
            key = _noise_key(doc.line_text(i))
            docs_with[key].add(doc_ind)
            positions[key].append(i / denom)

    noisy = set()
    for key, docs in docs_with.items():
        spread = max(positions[key]) - min(positions[key])
        if (
            len(docs) >= 2
            and len(docs) / corpus.n > rules.noise_doc_fraction
            and spread > rules.noise_position_spread
        ):
            noisy.add(key)

    filtered = {}
    for doc_ind, lines in per_doc_candidates.items():
        doc = corpus[doc_ind]
        filtered[doc_ind] = [
            i
            for i in lines
            if not _is_page_number(doc.line_text(i)) and _noise_key(doc.line_text(i)) not in noisy
        ]
    return filtered


def segment_document(doc: Document, header_lines: list[int]) -> list[Segment]:
    """Cut ``doc`` at each header line; text before the first header is dropped."""
    m = len(header_lines)
    segments = []
    for i, line_i in enumerate(header_lines):
        line_start, line_end = doc.lines[line_i]
        raw = doc.text[line_start:line_end].rstrip("\n")
        head_start = line_start + len(raw) - len(raw.lstrip())
        head_end = line_start + len(raw.rstrip())
        body_end = doc.lines[header_lines[i + 1]][0] if i + 1 < m else len(doc.text)
        segments.append(
            Segment(
                doc_ind=doc.doc_ind,
                seg_ind=i / max(1, m - 1),
                head_text=raw.strip(),
                body_text=doc.text[head_end:body_end].strip(),
                head_span=(head_start, head_end),
                body_span=(head_end, body_end),
                order=i,
            )
        )
    return segments


def segment_corpus(corpus: Corpus, rules: HeaderRuleConfig) -> list[Segment]:
    """Detect, de-noise and segment every document; segments come out in document order."""
    candidates = {doc.doc_ind: detect_header_candidates(doc, rules) for doc in corpus}
    candidates = filter_collection_noise(candidates, corpus, rules)
    segments = []
    for doc in corpus:
        segments.extend(segment_document(doc, candidates[doc.doc_ind]))
    return segments
