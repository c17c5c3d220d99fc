"""Coverage-maximizing topic selection, medoid labels and span grounding."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import ColltocError, NotEnoughCommunities
from .headers import Segment

_GAIN_DIGITS = 12


@dataclass(frozen=True)
class TocEntry:
    topic_id: int
    label: str
    medoid_node: int
    community: frozenset[int]
    coverage_share: float
    community_id: int = -1

    def to_json(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "label": self.label,
            "medoid_node": self.medoid_node,
            "community_size": len(self.community),
            "coverage_share": round(self.coverage_share, 12),
        }


@dataclass(frozen=True)
class Toc:
    entries: tuple[TocEntry, ...]

    @property
    def k(self) -> int:
        return len(self.entries)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]


@dataclass
class Grounding:
    """(topic, doc_ind) -> sorted, disjoint list of (start, end) spans."""

    spans: dict[tuple, list[tuple[int, int]]] = field(default_factory=dict)

    def topics(self) -> set:
        return {t for t, _ in self.spans}

    def __len__(self) -> int:
        return len(self.spans)


def segments_per_doc(node_docs, n_docs: int) -> np.ndarray:
    return np.bincount(np.asarray(node_docs, dtype=np.int64), minlength=n_docs)


def coverage(selected, node_docs, n_docs: int) -> float:
    """Sum over documents of the fraction of their segments inside ``selected``.

    ``selected`` is an iterable of node collections; ``node_docs[v]`` is the
    document index of node ``v``.
    """
    node_docs = np.asarray(node_docs, dtype=np.int64)
    covered = set()
    for community in selected:
        covered.update(community)
    if not covered:
        return 0.0
    sizes = segments_per_doc(node_docs, n_docs)
    weights = 1.0 / np.maximum(sizes, 1)
    return math.fsum(weights[node_docs[v]] for v in covered)


def select_topics(communities: list, k: int, node_docs, n_docs: int) -> list[tuple[int, float]]:
    """Greedy coverage maximization over community ids.

    Returns ``(community_id, marginal_gain)`` pairs in pick order. Ties go to
    the larger community, then to the lower id.
    """
    if k < 1:
        raise ColltocError("k must be at least 1")
    if k > len(communities):
        raise NotEnoughCommunities(k, len(communities))
    node_docs = np.asarray(node_docs, dtype=np.int64)
    weights = 1.0 / np.maximum(segments_per_doc(node_docs, n_docs), 1)
    covered: set[int] = set()
    remaining = set(range(len(communities)))
    picked = []
    for _ in range(k):
        best_key, best_id, best_gain = None, None, 0.0
        for cid in sorted(remaining):
            gain = math.fsum(weights[node_docs[v]] for v in set(communities[cid]) - covered)
            key = (round(gain, _GAIN_DIGITS), len(communities[cid]), -cid)
            if best_key is None or key > best_key:
                best_key, best_id, best_gain = key, cid, gain
        picked.append((best_id, best_gain))
        covered.update(communities[best_id])
        remaining.discard(best_id)
    return picked


def exhaustive_best_coverage(communities: list, k: int, node_docs, n_docs: int) -> tuple[tuple[int, ...], float]:
    """Optimal k-subset by enumeration (test oracle)."""
    from itertools import combinations

    best, best_value = None, -1.0
    for subset in combinations(range(len(communities)), k):
        value = coverage([communities[c] for c in subset], node_docs, n_docs)
        if value > best_value + 1e-12:
            best, best_value = subset, value
    return best, best_value


def community_medoid(community, weights) -> int:
    """Member with the largest summed weight to the other members; lowest id on ties."""
    members = sorted(community)
    if len(members) == 1:
        return members[0]
    idx = np.asarray(members)
    if hasattr(weights, "tocsr"):
        sub = weights.tocsr()[idx][:, idx].toarray()
    else:
        sub = np.asarray(weights)[np.ix_(idx, idx)]
    sub = sub.copy()
    np.fill_diagonal(sub, 0.0)
    sums = np.array([math.fsum(row) for row in sub])
    best = sums.max()
    # rounding keeps float noise from breaking ties
    winners = np.flatnonzero(np.round(sums - best, _GAIN_DIGITS) == 0)
    return int(idx[winners[0]])


def build_toc(partition_members: list[list[int]], picked: list[tuple[int, float]], graph_weights, segments, n_docs: int) -> Toc:
    """Turn greedy picks into ToC entries; topic ids follow coverage share, descending."""
    entries = []
    order = sorted(range(len(picked)), key=lambda i: (-round(picked[i][1], _GAIN_DIGITS), i))
    for topic_id, i in enumerate(order):
        cid, gain = picked[i]
        members = partition_members[cid]
        medoid = community_medoid(members, graph_weights)
        entries.append(
            TocEntry(
                topic_id=topic_id,
                label=segments[medoid].head_text,
                medoid_node=medoid,
                community=frozenset(members),
                coverage_share=gain / n_docs,
                community_id=cid,
            )
        )
    return Toc(tuple(entries))


def merge_spans(spans) -> list[tuple[int, int]]:
    """Sort spans and merge ones that overlap or touch; empty spans are dropped."""
    out: list[list[int]] = []
    for start, end in sorted((int(s), int(e)) for s, e in spans):
        if end <= start:
            continue
        if out and start <= out[-1][1]:
            out[-1][1] = max(out[-1][1], end)
        else:
            out.append([start, end])
    return [tuple(s) for s in out]


def ground(toc: Toc, segments: list[Segment]) -> Grounding:
    """Map each topic to the spans of its segments, merging consecutive same-topic segments."""
    topic_of = {}
    for entry in toc.entries:
        for node in entry.community:
            topic_of[node] = entry.topic_id
    by_key: dict[tuple, list[list[int]]] = {}
    last = {}  # (topic, doc) -> order of the segment that ended the previous span
    for node in sorted(topic_of, key=lambda v: (segments[v].doc_ind, segments[v].order)):
        seg = segments[node]
        key = (topic_of[node], seg.doc_ind)
        start, end = seg.span
        spans = by_key.setdefault(key, [])
        if spans and last[key] == seg.order - 1:
            spans[-1][1] = end
        else:
            spans.append([start, end])
        last[key] = seg.order
    return Grounding({key: [tuple(s) for s in spans] for key, spans in sorted(by_key.items())})


def toc_to_json(toc: Toc) -> list[dict]:
    return [e.to_json() for e in sorted(toc.entries, key=lambda e: (-e.coverage_share, e.topic_id))]


def grounding_lines(grounding: Grounding, corpus: Corpus) -> list[str]:
    """JSON lines ordered by document then topic; documents without spans are omitted."""
    lines = []
    for (topic, doc_ind), spans in sorted(grounding.spans.items(), key=lambda kv: (kv[0][1], str(kv[0][0]))):
        if not spans:
            continue
        record = {"doc_id": corpus[doc_ind].doc_id, "topic_id": topic, "spans": [list(s) for s in spans]}
        lines.append(json.dumps(record, ensure_ascii=False))
    return lines


def emit_toc(toc: Toc, grounding: Grounding, corpus: Corpus, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``toc.json`` and ``grounding.json`` (JSON lines) into ``out_dir``."""
    out = Path(out_dir)
    toc_path = out / "toc.json"
    grounding_path = out / "grounding.json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        toc_path.write_text(json.dumps(toc_to_json(toc), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        lines = grounding_lines(grounding, corpus)
        grounding_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    except OSError as exc:
        raise ColltocError(f"cannot write ToC artifacts to {out}: {exc}") from exc
    return toc_path, grounding_path

