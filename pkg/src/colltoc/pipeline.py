"""End-to-end orchestration: corpus -> segments -> graph -> communities -> ToC -> grounding."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .communities import Partition, best_of_louvain, write_partition
from .config import PipelineConfig, stage_seed
from .corpus import Corpus, load_corpus
from .embed import make_embedder
from .errors import ColltocError, EmptyEvaluation, StageError
from .evaluation import (
    apply_mapping,
    baseline_most_frequent,
    baseline_random,
    evaluate_grounding,
    read_grounding,
    read_mapping,
)
from .graph import CollectionGraph, build_graph
from .headers import Segment, segment_corpus
from .toc import Grounding, Toc, build_toc, emit_toc, ground, select_topics, toc_to_json

log = logging.getLogger(__name__)

STAGES = ("ingest", "detect-headers", "build-graph", "communities", "extract-toc", "ground")
QUARANTINE_SUFFIX = ".quarantine"


@dataclass
class RunResult:
    config: PipelineConfig
    corpus: Corpus | None = None
    segments: list[Segment] | None = None
    graph: CollectionGraph | None = None
    partition: Partition | None = None
    modularity: float | None = None
    toc: Toc | None = None
    grounding: Grounding | None = None
    artifacts: dict[str, Path] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)


def segment_record(node_id: int, seg: Segment, corpus: Corpus) -> dict:
    return {
        "node_id": node_id,
        "doc_ind": seg.doc_ind,
        "doc_id": corpus[seg.doc_ind].doc_id,
        "seg_ind": seg.seg_ind,
        "order": seg.order,
        "head_text": seg.head_text,
        "body_text": seg.body_text,
        "head_span": list(seg.head_span),
        "body_span": list(seg.body_span),
    }


def read_segments(path: str | Path) -> list[Segment]:
    segments = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            segments.append(
                Segment(
                    doc_ind=rec["doc_ind"],
                    seg_ind=rec["seg_ind"],
                    head_text=rec["head_text"],
                    body_text=rec["body_text"],
                    head_span=tuple(rec["head_span"]),
                    body_span=tuple(rec["body_span"]),
                    order=rec["order"],
                )
            )
    return segments


def _write_lines(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


ARTIFACT_NAMES = (
    "docs.jsonl",
    "segments.jsonl",
    "nodes.jsonl",
    "edges.tsv",
    "partition.json",
    "toc.json",
    "grounding.json",
    "run_manifest.json",
)


def _quarantine(out: Path, artifacts: dict[str, Path]) -> None:
    # Stale outputs from an earlier run are moved aside too, so a failed run
    # never leaves a valid-looking artifact set behind.
    paths = set(artifacts.values()) | {out / name for name in ARTIFACT_NAMES}
    for path in sorted(paths):
        if path.exists():
            path.replace(path.with_name(path.name + QUARANTINE_SUFFIX))


def _clear_quarantine(out: Path) -> None:
    for name in ARTIFACT_NAMES:
        (out / (name + QUARANTINE_SUFFIX)).unlink(missing_ok=True)


def run_pipeline(config: PipelineConfig, until: str = "ground", embedder=None) -> RunResult:
    """Run the stages up to and including ``until`` and write their artifacts.

    On failure every artifact written so far is renamed with a
    ``.quarantine`` suffix, a quarantined manifest records the error, and a
    ``StageError`` naming the failed stage is raised.
    """
    if until not in STAGES:
        raise ColltocError(f"unknown stage {until!r}; expected one of {STAGES}")
    last = STAGES.index(until)
    out = Path(config.output_dir)
    result = RunResult(config)
    timings: dict[str, float] = {}
    stage = "setup"

    try:
        out.mkdir(parents=True, exist_ok=True)
        _clear_quarantine(out)
        for stage in STAGES[: last + 1]:
            started = time.perf_counter()
            _run_stage(stage, result, out, embedder)
            timings[stage] = round(time.perf_counter() - started, 6)
            log.info("stage %s finished in %.3fs", stage, timings[stage])
    except Exception as exc:
        _quarantine(out, result.artifacts)
        manifest = _manifest(result, timings)
        manifest["error"] = {"stage": stage, "message": str(exc)}
        try:
            (out / ("run_manifest.json" + QUARANTINE_SUFFIX)).write_text(json.dumps(manifest, indent=2) + "\n")
        except OSError:
            pass
        if isinstance(exc, StageError):
            raise
        raise StageError(stage, exc) from exc

    result.manifest = _manifest(result, timings)
    manifest_path = out / "run_manifest.json"
    manifest_path.write_text(json.dumps(result.manifest, indent=2) + "\n", encoding="utf-8")
    result.artifacts["run_manifest"] = manifest_path
    return result


def _run_stage(stage: str, r: RunResult, out: Path, embedder) -> None:
    cfg = r.config
    if stage == "ingest":
        r.corpus = load_corpus(cfg.corpus_dir)
        path = out / "docs.jsonl"
        _write_lines(
            path,
            ({"doc_ind": d.doc_ind, "doc_id": d.doc_id, "n_chars": len(d.text), "n_lines": d.n_lines} for d in r.corpus),
        )
        r.artifacts["docs"] = path
    elif stage == "detect-headers":
        r.segments = segment_corpus(r.corpus, cfg.headers)
        path = out / "segments.jsonl"
        _write_lines(path, (segment_record(i, s, r.corpus) for i, s in enumerate(r.segments)))
        r.artifacts["segments"] = path
    elif stage == "build-graph":
        provider = embedder or make_embedder(cfg.embedding)
        r.graph = build_graph(r.segments, provider, cfg.lambdas, cfg.pos_cap, cfg.sparsify_top_m)
        if cfg.export_graph:
            r.artifacts["nodes"] = out / "nodes.jsonl"
            r.artifacts["edges"] = out / "edges.tsv"
            r.graph.write_nodes(r.artifacts["nodes"])
            r.graph.write_edges(r.artifacts["edges"])
    elif stage == "communities":
        r.partition, r.modularity = best_of_louvain(r.graph, cfg.louvain, cfg.restarts)
        path = out / "partition.json"
        write_partition(r.partition, path)
        r.artifacts["partition"] = path
    elif stage == "extract-toc":
        members = r.partition.members()
        node_docs = [s.doc_ind for s in r.segments]
        picked = select_topics(members, cfg.k, node_docs, r.corpus.n)
        r.toc = build_toc(members, picked, r.graph.weights, r.segments, r.corpus.n)
        path = out / "toc.json"
        path.write_text(json.dumps(toc_to_json(r.toc), indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        r.artifacts["toc"] = path
    elif stage == "ground":
        r.grounding = ground(r.toc, r.segments)
        toc_path, grounding_path = emit_toc(r.toc, r.grounding, r.corpus, out)
        r.artifacts["toc"] = toc_path
        r.artifacts["grounding"] = grounding_path


def _manifest(r: RunResult, timings: dict) -> dict:
    cfg = r.config
    counts = {}
    if r.corpus is not None:
        counts["documents"] = r.corpus.n
    if r.segments is not None:
        counts["nodes"] = len(r.segments)
    if r.graph is not None:
        counts["edges"] = r.graph.n_edges
    if r.partition is not None:
        counts["communities"] = r.partition.n_communities
    if r.toc is not None:
        counts["toc_entries"] = r.toc.k
    if r.grounding is not None:
        counts["grounding_records"] = sum(1 for spans in r.grounding.spans.values() if spans)
    manifest = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "louvain_seed": cfg.louvain.seed,
        "profile": cfg.profile,
        "lambdas": list(cfg.lambdas.as_tuple()),
        "k": cfg.k,
        "stage_timings_s": timings,
        "counts": counts,
        "artifacts": {name: path.name for name, path in sorted(r.artifacts.items())},
    }
    if r.modularity is not None:
        manifest["modularity"] = r.modularity
    return manifest


def run_eval(pred_path, gold_path, mapping_path, seed: int = 0, trials: int = 100) -> dict:
    """Score a predicted grounding against gold, alongside both naive baselines."""
    pred = read_grounding(pred_path)
    gold = read_grounding(gold_path)
    mapping = read_mapping(mapping_path)
    aligned = apply_mapping(pred, mapping)
    if not aligned:
        raise EmptyEvaluation("no predicted topic could be aligned to a gold label through the mapping")
    if not gold:
        raise EmptyEvaluation("gold grounding is empty")
    random_scores = baseline_random(gold, seed=stage_seed(seed, "random-baseline"), trials=trials)
    return {
        "method": evaluate_grounding(aligned, gold),
        "most_frequent_class": evaluate_grounding(baseline_most_frequent(gold), gold),
        "random": random_scores["mean"],
        "random_std": random_scores["std"],
        "random_trials": trials,
    }
