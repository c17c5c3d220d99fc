"""Grounding evaluation (exact / partial span matches), baselines and header intrusion.

A span set is compared as the set of character positions it covers, so a
split span and the merged span over the same characters are equal.

Scores are aggregated over (class, document) keys present in either the
prediction or the gold grounding:

* micro pools every key; precision is computed over keys with a non-empty
  prediction and recall over keys with non-empty gold.
* macro computes precision, recall and F1 per class and averages them
  unweighted over classes.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import AnnotationError, CannotSample, EmptyEvaluation, FormatError
from .toc import merge_spans

INTRUSION_SHOWN = 10
INTRUSION_FROM_SOURCE = 9


@dataclass(frozen=True)
class MatchFlags:
    partial_precision_hit: bool
    partial_recall_hit: bool
    exact_precision_hit: bool
    exact_recall_hit: bool
    has_pred: bool = True
    has_gold: bool = True


def _intersects(a, b) -> bool:
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i][0] < b[j][1] and b[j][0] < a[i][1]:
            return True
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return False


def _covered_by(a, b) -> bool:
    """True when every character of ``a`` lies in ``b`` (both merged)."""
    j = 0
    for start, end in a:
        while j < len(b) and b[j][1] <= start:
            j += 1
        if j == len(b) or not (b[j][0] <= start and end <= b[j][1]):
            return False
    return True


def match_flags(pred, gold) -> MatchFlags:
    pred = merge_spans(pred)
    gold = merge_spans(gold)
    if not pred and not gold:
        return MatchFlags(True, True, True, True, False, False)
    if not pred or not gold:
        return MatchFlags(False, False, False, False, bool(pred), bool(gold))
    overlap = _intersects(pred, gold)
    return MatchFlags(overlap, overlap, _covered_by(pred, gold), _covered_by(gold, pred))


def _prf(p_hits: int, p_total: int, r_hits: int, r_total: int) -> dict:
    precision = p_hits / p_total if p_total else 0.0
    recall = r_hits / r_total if r_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def _scores(flags: list[MatchFlags], kind: str) -> dict:
    p_total = sum(f.has_pred for f in flags)
    r_total = sum(f.has_gold for f in flags)
    p_hits = sum(f.has_pred and getattr(f, f"{kind}_precision_hit") for f in flags)
    r_hits = sum(f.has_gold and getattr(f, f"{kind}_recall_hit") for f in flags)
    return _prf(p_hits, p_total, r_hits, r_total)


def aggregate_scores(flags_by_key: dict, mode: str) -> dict:
    """``{"partial": {...}, "exact": {...}}`` with precision / recall / f1 each."""
    if not flags_by_key:
        raise EmptyEvaluation("nothing to evaluate: no (class, document) keys")
    if mode == "micro":
        flags = list(flags_by_key.values())
        return {kind: _scores(flags, kind) for kind in ("partial", "exact")}
    if mode != "macro":
        raise ValueError(f"unknown aggregation mode {mode!r}")
    per_class = defaultdict(list)
    for (label, _), f in flags_by_key.items():
        per_class[label].append(f)
    out = {}
    for kind in ("partial", "exact"):
        rows = [_scores(fs, kind) for fs in per_class.values()]
        out[kind] = {m: float(np.mean([r[m] for r in rows])) for m in ("precision", "recall", "f1")}
    return out


def compare(pred: dict, gold: dict) -> dict:
    """Match flags for every (class, document) key of either grounding."""
    keys = set(pred) | set(gold)
    return {key: match_flags(pred.get(key, ()), gold.get(key, ())) for key in keys}


def evaluate_grounding(pred: dict, gold: dict) -> dict:
    """Macro and micro partial / exact scores, shaped like a results table row."""
    flags = compare(pred, gold)
    return {mode: aggregate_scores(flags, mode) for mode in ("macro", "micro")}


def _gold_classes(gold: dict) -> list:
    return sorted({label for label, _ in gold}, key=str)


def baseline_most_frequent(gold: dict) -> dict:
    """Label every gold span with the class holding the most gold spans (smallest label on ties)."""
    if not gold:
        raise EmptyEvaluation("gold grounding is empty")
    counts = Counter()
    per_doc = defaultdict(list)
    for (label, doc), spans in gold.items():
        counts[label] += len(merge_spans(spans))
        per_doc[doc].extend(spans)
    top = max(counts.values())
    winner = min((label for label, c in counts.items() if c == top), key=str)
    return {(winner, doc): merge_spans(spans) for doc, spans in per_doc.items()}


def _random_prediction(gold_spans: list, classes: list, rng: np.random.Generator) -> dict:
    draws = rng.integers(len(classes), size=len(gold_spans))
    pred = defaultdict(list)
    for (doc, span), c in zip(gold_spans, draws):
        pred[(classes[c], doc)].append(span)
    return dict(pred)


def baseline_random(gold: dict, seed: int = 0, trials: int = 100) -> dict:
    """Give each gold span a uniformly random gold class; mean and std of scores over trials."""
    if not gold:
        raise EmptyEvaluation("gold grounding is empty")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    classes = _gold_classes(gold)
    gold_spans = [(doc, span) for (_, doc), spans in sorted(gold.items(), key=lambda kv: (str(kv[0][1]), str(kv[0][0])))
                  for span in merge_spans(spans)]
    rng = np.random.default_rng(seed)
    reports = [evaluate_grounding(_random_prediction(gold_spans, classes, rng), gold) for _ in range(trials)]
    mean, std = {}, {}
    for mode in ("macro", "micro"):
        mean[mode], std[mode] = {}, {}
        for kind in ("partial", "exact"):
            mean[mode][kind], std[mode][kind] = {}, {}
            for metric in ("precision", "recall", "f1"):
                values = [r[mode][kind][metric] for r in reports]
                mean[mode][kind][metric] = float(np.mean(values))
                std[mode][kind][metric] = float(np.std(values))
    return {"mean": mean, "std": std, "trials": trials, "seed": seed}


# --- header intrusion -------------------------------------------------------


@dataclass(frozen=True)
class IntrusionSample:
    sample_id: str
    shown_headers: tuple[str, ...]
    intruder_position: int
    source_community: int
    intruder_community: int

    def to_json(self) -> dict:
        d = asdict(self)
        d["shown_headers"] = list(self.shown_headers)
        return d


@dataclass(frozen=True)
class IntrusionAnnotation:
    sample_id: str
    marked_positions: frozenset[int]
    num_options: int = INTRUSION_SHOWN

    def __post_init__(self):
        if not 1 <= len(self.marked_positions) <= self.num_options:
            raise AnnotationError(
                f"annotation {self.sample_id}: must mark between 1 and {self.num_options} positions"
            )
        if any(not 0 <= p < self.num_options for p in self.marked_positions):
            raise AnnotationError(f"annotation {self.sample_id}: marked position out of range")

    def to_json(self) -> dict:
        return {"sample_id": self.sample_id, "marked_positions": sorted(self.marked_positions), "num_options": self.num_options}


def confidence(num_marked: int, num_options: int = INTRUSION_SHOWN) -> float:
    """Annotator confidence: 1 for a single mark, 1/num_options for marking everything."""
    return 1.0 - (num_marked - 1) / num_options


def make_intrusion_samples(communities: list[list[str]], count: int, seed: int = 0) -> list[IntrusionSample]:
    """Draw ``count`` samples of 9 in-community headers plus 1 intruder.

    ``communities[c]`` holds the header texts of community ``c``. Sources
    must offer at least 9 distinct header texts.
    """
    distinct = [sorted(set(headers)) for headers in communities]
    eligible = [c for c, hs in enumerate(distinct) if len(hs) >= INTRUSION_FROM_SOURCE]
    if len(communities) < 2 or not eligible:
        raise CannotSample(
            "need at least 2 communities and one with "
            f"{INTRUSION_FROM_SOURCE} distinct headers (got {len(communities)} communities)"
        )
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < count:
        source = eligible[rng.integers(len(eligible))]
        picks = rng.choice(len(distinct[source]), size=INTRUSION_FROM_SOURCE, replace=False)
        shown = [distinct[source][i] for i in sorted(picks)]
        shown_set = set(shown)
        others = [c for c in range(len(distinct)) if c != source and set(distinct[c]) - shown_set]
        if not others:
            raise CannotSample(f"no community can supply an intruder for community {source}")
        intruder_comm = others[rng.integers(len(others))]
        pool = [h for h in distinct[intruder_comm] if h not in shown_set]
        headers = shown + [pool[rng.integers(len(pool))]]
        perm = rng.permutation(INTRUSION_SHOWN)
        shuffled = tuple(headers[i] for i in perm)
        position = int(np.flatnonzero(perm == INTRUSION_SHOWN - 1)[0])
        samples.append(
            IntrusionSample(f"s{len(samples):05d}", shuffled, position, int(source), int(intruder_comm))
        )
    return samples


def score_intrusion(samples: list[IntrusionSample], annotations: list[IntrusionAnnotation]) -> dict:
    """Accuracy (intruder among the marks) and mean / std confidence over annotations."""
    by_id = {s.sample_id: s for s in samples}
    if not annotations:
        raise AnnotationError("no annotations to score")
    hits, confs = [], []
    for ann in annotations:
        sample = by_id.get(ann.sample_id)
        if sample is None:
            raise AnnotationError(f"annotation refers to unknown sample {ann.sample_id!r}")
        hits.append(sample.intruder_position in ann.marked_positions)
        confs.append(confidence(len(ann.marked_positions), ann.num_options))
    # fsum keeps a constant confidence exact instead of drifting in the last ulp
    mean = math.fsum(confs) / len(confs)
    return {
        "accuracy": float(np.mean(hits)),
        "confidence_mean": mean,
        "confidence_std": math.sqrt(math.fsum((c - mean) ** 2 for c in confs) / len(confs)),
        "annotations": len(annotations),
    }


def random_annotator(samples: list[IntrusionSample], marks: int = 3, seed: int = 0) -> list[IntrusionAnnotation]:
    """Annotations that mark ``marks`` distinct positions uniformly at random."""
    rng = np.random.default_rng(seed)
    return [
        IntrusionAnnotation(s.sample_id, frozenset(int(p) for p in rng.choice(INTRUSION_SHOWN, size=marks, replace=False)))
        for s in samples
    ]


# --- file formats -------------------------------------------------------------


def _iter_json_lines(path: str | Path):
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise FormatError(path, 0, f"cannot open: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, lineno, f"invalid JSON: {exc.msg}") from exc


def read_grounding(path: str | Path) -> dict:
    """Load grounding JSON lines into ``{(topic, doc_id): merged spans}``."""
    out = defaultdict(list)
    for lineno, rec in _iter_json_lines(path):
        try:
            topic, doc_id, spans = rec["topic_id"], rec["doc_id"], rec["spans"]
            spans = [(int(s), int(e)) for s, e in spans]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, lineno, f"expected doc_id, topic_id and spans: {exc}") from exc
        if isinstance(topic, list):
            raise FormatError(path, lineno, "topic_id must be a string or integer")
        if any(e < s for s, e in spans):
            raise FormatError(path, lineno, "span end precedes start")
        out[(topic, doc_id)].extend(spans)
    return {key: merge_spans(spans) for key, spans in out.items()}


def write_grounding_lines(grounding: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (topic, doc_id), spans in sorted(grounding.items(), key=lambda kv: (str(kv[0][1]), str(kv[0][0]))):
            if spans:
                rec = {"doc_id": doc_id, "topic_id": topic, "spans": [list(s) for s in spans]}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_mapping(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        line = getattr(exc, "lineno", 0)
        raise FormatError(path, line, f"cannot read mapping: {exc}") from exc
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise FormatError(path, 1, "mapping must be a JSON object of topic_id -> gold label")
    return {str(k): v for k, v in data.items()}


def apply_mapping(pred: dict, mapping: dict[str, str]) -> dict:
    """Relabel predicted topics with gold labels; unmapped topics are dropped and merged targets unioned."""
    out = defaultdict(list)
    for (topic, doc), spans in pred.items():
        label = mapping.get(str(topic))
        if label is not None:
            out[(label, doc)].extend(spans)
    return {key: merge_spans(spans) for key, spans in out.items()}


def write_samples(samples: list[IntrusionSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_json(), ensure_ascii=False) + "\n")


def read_samples(path: str | Path) -> list[IntrusionSample]:
    samples = []
    for lineno, rec in _iter_json_lines(path):
        try:
            samples.append(
                IntrusionSample(
                    str(rec["sample_id"]),
                    tuple(rec["shown_headers"]),
                    int(rec["intruder_position"]),
                    int(rec["source_community"]),
                    int(rec["intruder_community"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, lineno, f"bad intrusion sample: {exc}") from exc
    return samples


def read_annotations(path: str | Path) -> list[IntrusionAnnotation]:
    annotations = []
    for lineno, rec in _iter_json_lines(path):
        try:
            annotations.append(
                IntrusionAnnotation(
                    str(rec["sample_id"]),
                    frozenset(int(p) for p in rec["marked_positions"]),
                    int(rec.get("num_options", INTRUSION_SHOWN)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, lineno, f"bad annotation: {exc}") from exc
    return annotations
