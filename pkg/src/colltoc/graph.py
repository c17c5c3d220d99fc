"""The collection graph: one node per segment, weighted by header, body and position similarity."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .embed import cosine, embed_texts
from .errors import ConfigError, GraphTooSmall
from .headers import Segment

BLOCK_ROWS = 1024
# Larger caps let position swamp the cosine terms and Louvain then splits
# the collection into position bands instead of topics.
DEFAULT_POS_CAP = 1.25


@dataclass(frozen=True)
class SimilarityWeights:
    lambda_head: float
    lambda_body: float
    lambda_pos: float

    def __post_init__(self):
        values = (self.lambda_head, self.lambda_body, self.lambda_pos)
        if min(values) < 0:
            raise ConfigError(f"similarity weights must be non-negative, got {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ConfigError(f"similarity weights must sum to 1, got {sum(values)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lambda_head, self.lambda_body, self.lambda_pos)


# lambda (head, body, pos) presets per corpus style
PROFILES = {
    "strict": SimilarityWeights(0.7, 0.0, 0.3),
    "flexible": SimilarityWeights(0.5, 0.3, 0.2),
    "ordered-flexible": SimilarityWeights(0.5, 0.25, 0.25),
}


@dataclass(frozen=True)
class SegmentNode:
    node_id: int
    segment: Segment
    head_vec: np.ndarray = field(repr=False)
    body_vec: np.ndarray | None = field(default=None, repr=False)

    @property
    def doc_ind(self) -> int:
        return self.segment.doc_ind

    @property
    def seg_ind(self) -> float:
        return self.segment.seg_ind

    @property
    def head_text(self) -> str:
        return self.segment.head_text

    @property
    def body_text(self) -> str:
        return self.segment.body_text


def pos_sim(a, b, pos_cap: float) -> float:
    """Inverse distance between normalized positions, capped at ``pos_cap``."""
    delta = abs(a.seg_ind - b.seg_ind)
    if delta == 0.0:
        return float(pos_cap)
    return min(1.0 / delta, float(pos_cap))


def edge_weight(a: SegmentNode, b: SegmentNode, lambdas: SimilarityWeights, pos_cap: float) -> float:
    w = 0.0
    if lambdas.lambda_head:
        w += lambdas.lambda_head * cosine(a.head_vec, b.head_vec)
    if lambdas.lambda_body:
        w += lambdas.lambda_body * cosine(a.body_vec, b.body_vec)
    if lambdas.lambda_pos:
        w += lambdas.lambda_pos * pos_sim(a, b, pos_cap)
    return w


def weight_bounds(lambdas: SimilarityWeights, pos_cap: float) -> tuple[float, float]:
    lh, lb, lp = lambdas.as_tuple()
    return (-(lh + lb), lh + lb + lp * pos_cap)


@dataclass
class CollectionGraph:
    """Weighted undirected graph over segment nodes.

    ``weights`` is a dense symmetric array with a zero diagonal for the
    complete graph, or a symmetric CSR matrix when sparsified.
    """

    nodes: list[SegmentNode]
    weights: np.ndarray | sp.csr_matrix
    pos_cap: float = DEFAULT_POS_CAP
    lambdas: SimilarityWeights | None = None

    @classmethod
    def from_weights(cls, matrix) -> CollectionGraph:
        """Wrap a bare symmetric weight matrix (nodes carry no text)."""
        if sp.issparse(matrix):
            matrix = sp.csr_matrix(matrix, dtype=float)
        else:
            matrix = np.array(matrix, dtype=float)
            np.fill_diagonal(matrix, 0.0)
        return cls(nodes=[], weights=matrix)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.weights)

    def weight(self, u: int, v: int) -> float:
        return float(self.weights[u, v])

    @property
    def n_edges(self) -> int:
        if self.is_sparse:
            w = sp.triu(self.weights, k=1)
            return int(w.nnz)
        return self.n * (self.n - 1) // 2

    def degree(self, u: int) -> int:
        """Number of incident edges."""
        if self.is_sparse:
            row = self.weights.getrow(u)
            return int(row.nnz - (row[0, u] != 0))
        return self.n - 1

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.weights)

    def write_edges(self, path: str | Path) -> int:
        """One ``a<TAB>b<TAB>weight`` line per edge with ``a < b``."""
        upper = sp.triu(sp.coo_matrix(self.weights), k=1) if self.is_sparse else None
        count = 0
        with open(path, "w", encoding="utf-8") as fh:
            if upper is not None:
                order = np.lexsort((upper.col, upper.row))
                for r, c, w in zip(upper.row[order], upper.col[order], upper.data[order]):
                    fh.write(f"{r}\t{c}\t{w:.9g}\n")
                    count += 1
            else:
                for r in range(self.n):
                    row = self.weights[r]
                    for c in range(r + 1, self.n):
                        fh.write(f"{r}\t{c}\t{row[c]:.9g}\n")
                        count += 1
        return count

    def write_nodes(self, path: str | Path) -> int:
        with open(path, "w", encoding="utf-8") as fh:
            for node in self.nodes:
                fh.write(json.dumps(node_record(node), ensure_ascii=False) + "\n")
        return len(self.nodes)


def node_record(node: SegmentNode) -> dict:
    return {
        "node_id": node.node_id,
        "doc_ind": node.doc_ind,
        "seg_ind": node.seg_ind,
        "head_text": node.head_text,
        "body_text": node.body_text,
    }


def read_edges(path: str | Path, n: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            a, b, w = line.rstrip("\n").split("\t")
            rows.append(int(a))
            cols.append(int(b))
            vals.append(float(w))
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    return (m + m.T).tocsr()


def _weight_block(rows, head, body, pos, lambdas: SimilarityWeights, pos_cap: float) -> np.ndarray:
    lh, lb, lp = lambdas.as_tuple()
    block = np.zeros((len(rows), len(pos)))
    if lh:
        block += lh * np.clip(head[rows] @ head.T, -1.0, 1.0)
    if lb:
        block += lb * np.clip(body[rows] @ body.T, -1.0, 1.0)
    if lp:
        delta = np.abs(pos[rows, None] - pos[None, :])
        with np.errstate(divide="ignore"):
            block += lp * np.minimum(1.0 / delta, pos_cap)
    return block


def build_graph(
    segments: list[Segment],
    provider,
    lambdas: SimilarityWeights,
    pos_cap: float = DEFAULT_POS_CAP,
    sparsify_top_m: int | None = None,
) -> CollectionGraph:
    """Embed every segment and weight all node pairs.

    ``provider`` is an embedding config or an embedder instance. With
    ``sparsify_top_m`` each node keeps only its ``m`` heaviest edges and the
    result is symmetrized by union.
    """
    n = len(segments)
    if n < 2:
        raise GraphTooSmall(f"need at least 2 segments to build a graph, got {n}")
    if pos_cap <= 0:
        raise ConfigError("pos_cap must be positive")
    if sparsify_top_m is not None and sparsify_top_m < 1:
        raise ConfigError("sparsify_top_m must be positive")

    head = embed_texts([s.head_text for s in segments], provider)
    body = embed_texts([s.body_text for s in segments], provider) if lambdas.lambda_body > 0 else None
    pos = np.array([s.seg_ind for s in segments], dtype=float)
    nodes = [
        SegmentNode(i, seg, head[i], body[i] if body is not None else None) for i, seg in enumerate(segments)
    ]

    if sparsify_top_m is None:
        weights = np.empty((n, n))
        for start in range(0, n, BLOCK_ROWS):
            rows = np.arange(start, min(n, start + BLOCK_ROWS))
            weights[rows] = _weight_block(rows, head, body, pos, lambdas, pos_cap)
        # mirror the upper triangle so symmetry is exact
        upper = np.triu(weights, k=1)
        weights = upper + upper.T
    else:
        m = min(sparsify_top_m, n - 1)
        keep_rows, keep_cols = [], []
        for start in range(0, n, BLOCK_ROWS):
            rows = np.arange(start, min(n, start + BLOCK_ROWS))
            block = _weight_block(rows, head, body, pos, lambdas, pos_cap)
            block[np.arange(len(rows)), rows] = -np.inf
            top = np.argsort(-block, axis=1, kind="stable")[:, :m]
            keep_rows.append(np.repeat(rows, m))
            keep_cols.append(top.ravel())
        r = np.concatenate(keep_rows)
        c = np.concatenate(keep_cols)
        lo, hi = np.minimum(r, c), np.maximum(r, c)
        pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
        lo, hi = pairs[:, 0], pairs[:, 1]
        vals = np.empty(len(lo))
        for start in range(0, len(lo), BLOCK_ROWS * 64):
            sl = slice(start, start + BLOCK_ROWS * 64)
            vals[sl] = _pair_weights(lo[sl], hi[sl], head, body, pos, lambdas, pos_cap)
        upper = sp.coo_matrix((vals, (lo, hi)), shape=(n, n))
        weights = (upper + upper.T).tocsr()
    return CollectionGraph(nodes=nodes, weights=weights, pos_cap=pos_cap, lambdas=lambdas)


def _pair_weights(lo, hi, head, body, pos, lambdas, pos_cap) -> np.ndarray:
    lh, lb, lp = lambdas.as_tuple()
    out = np.zeros(len(lo))
    if lh:
        out += lh * np.clip(np.einsum("ij,ij->i", head[lo], head[hi]), -1.0, 1.0)
    if lb:
        out += lb * np.clip(np.einsum("ij,ij->i", body[lo], body[hi]), -1.0, 1.0)
    if lp:
        delta = np.abs(pos[lo] - pos[hi])
        with np.errstate(divide="ignore"):
            out += lp * np.minimum(1.0 / delta, pos_cap)
    return out
