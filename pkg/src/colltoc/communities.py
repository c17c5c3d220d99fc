"""Weighted modularity and Louvain community detection.

Negative edge weights (cosine terms can be negative) are clamped to zero
before any modularity computation. Self-loops on aggregated graphs carry the
full internal weight of a community, so ``P.T @ A @ P`` is the aggregate of
``A`` under indicator matrix ``P``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, GraphTooSmall, OracleTooLarge, PartitionError
from .graph import CollectionGraph

ORACLE_MAX_NODES = 10
_EPS = 1e-12


@dataclass(frozen=True)
class LouvainConfig:
    seed: int = 0
    resolution: float = 1.0
    min_modularity_gain: float = 1e-7
    max_passes: int = 20
    max_sweeps: int = 1000

    def __post_init__(self):
        if self.resolution <= 0:
            raise ConfigError("resolution must be positive")
        if self.min_modularity_gain < 0:
            raise ConfigError("min_modularity_gain must be non-negative")
        if self.max_passes < 1 or self.max_sweeps < 1:
            raise ConfigError("max_passes and max_sweeps must be positive")


class Partition:
    """Node -> community assignment with contiguous community ids.

    Ids are assigned in order of first appearance when scanning nodes
    0..n-1, so equal groupings always get equal labels.
    """

    def __init__(self, labels):
        labels = np.asarray(labels)
        if labels.ndim != 1:
            raise PartitionError("partition labels must be one-dimensional")
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        self.assignment = rank[inverse.ravel()]

    def __len__(self) -> int:
        return len(self.assignment)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.assignment, other.assignment)

    def __repr__(self) -> str:
        return f"Partition({self.assignment.tolist()})"

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(self.assignment.tolist())

    @property
    def n_communities(self) -> int:
        return int(self.assignment.max()) + 1 if len(self.assignment) else 0

    def members(self) -> list[list[int]]:
        groups = [[] for _ in range(self.n_communities)]
        for node, c in enumerate(self.assignment.tolist()):
            groups[c].append(node)
        return groups

    def to_json(self) -> dict:
        return {
            "assignment": {str(node): int(c) for node, c in enumerate(self.assignment.tolist())},
            "communities": {str(c): nodes for c, nodes in enumerate(self.members())},
        }

    @classmethod
    def from_json(cls, data: dict) -> Partition:
        assignment = data["assignment"]
        return cls([assignment[str(i)] for i in range(len(assignment))])


def write_partition(partition: Partition, path: str | Path) -> None:
    Path(path).write_text(json.dumps(partition.to_json(), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def read_partition(path: str | Path) -> Partition:
    return Partition.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _clamped(graph) -> sp.csr_matrix:
    if isinstance(graph, CollectionGraph):
        graph = graph.weights
    a = sp.csr_matrix(graph, dtype=float, copy=True)
    a.data[a.data < 0] = 0.0
    a.eliminate_zeros()
    return a


def _labels_of(partition, n: int) -> np.ndarray:
    labels = partition.assignment if isinstance(partition, Partition) else np.asarray(partition)
    if len(labels) != n:
        raise PartitionError(f"partition covers {len(labels)} nodes but the graph has {n}")
    return labels


def _modularity(a: sp.csr_matrix, labels: np.ndarray, resolution: float) -> float:
    coo = a.tocoo()
    two_m = coo.data.sum()
    if two_m <= 0:
        return 0.0
    n_comm = int(labels.max()) + 1
    same = labels[coo.row] == labels[coo.col]
    inside = np.bincount(labels[coo.row][same], weights=coo.data[same], minlength=n_comm)
    degree = np.asarray(a.sum(axis=1)).ravel()
    total = np.bincount(labels, weights=degree, minlength=n_comm)
    return float(np.sum(inside / two_m - resolution * (total / two_m) ** 2))


def modularity(graph, partition, resolution: float = 1.0) -> float:
    """Weighted modularity; 0 for a graph without positive weight."""
    a = _clamped(graph)
    return _modularity(a, _labels_of(partition, a.shape[0]), resolution)


def _local_moves(a: sp.csr_matrix, order: np.ndarray, resolution: float, max_sweeps: int) -> tuple[np.ndarray, bool]:
    n = a.shape[0]
    degree = np.asarray(a.sum(axis=1)).ravel()
    two_m = degree.sum()
    comm = np.arange(n)
    total = degree.copy()
    indptr, indices, data = a.indptr, a.indices, a.data
    moved_any = False
    for _ in range(max_sweeps):
        moves = 0
        for i in order:
            lo, hi = indptr[i], indptr[i + 1]
            nbrs, w = indices[lo:hi], data[lo:hi]
            keep = nbrs != i
            nbrs, w = nbrs[keep], w[keep]
            own = comm[i]
            total[own] -= degree[i]
            cand, inv = np.unique(np.append(comm[nbrs], own), return_inverse=True)
            k_in = np.bincount(inv.ravel(), weights=np.append(w, 0.0), minlength=len(cand))
            gains = k_in - resolution * total[cand] * degree[i] / two_m
            best = int(np.argmax(gains))  # first maximum -> lowest community id
            own_gain = gains[np.searchsorted(cand, own)]
            target = own
            if gains[best] - own_gain > _EPS * max(1.0, abs(own_gain)):
                target = int(cand[best])
                moves += 1
            total[target] += degree[i]
            comm[i] = target
        if not moves:
            break
        moved_any = True
    return comm, moved_any


def _aggregate(a: sp.csr_matrix, labels: np.ndarray) -> sp.csr_matrix:
    n_comm = int(labels.max()) + 1
    p = sp.csr_matrix((np.ones(len(labels)), (np.arange(len(labels)), labels)), shape=(len(labels), n_comm))
    return (p.T @ a @ p).tocsr()


def louvain(graph, config: LouvainConfig | None = None, history: list | None = None) -> tuple[Partition, float]:
    """Two-phase Louvain: local moves, then aggregation, until Q stops improving.

    Visiting order is reshuffled once per pass from a generator seeded with
    ``config.seed``. When given, ``history`` receives Q after every pass.
    """
    config = config or LouvainConfig()
    original = _clamped(graph)
    n = original.shape[0]
    if n < 2:
        raise GraphTooSmall(f"Louvain needs at least 2 nodes, got {n}")
    rng = np.random.default_rng(config.seed)
    node_labels = np.arange(n)
    best_q = _modularity(original, node_labels, config.resolution)
    if history is not None:
        history.append(best_q)
    a = original
    for _ in range(config.max_passes):
        order = rng.permutation(a.shape[0])
        level, moved = _local_moves(a, order, config.resolution, config.max_sweeps)
        if not moved:
            break
        level = Partition(level).assignment
        candidate = level[node_labels]
        q = _modularity(original, candidate, config.resolution)
        gained = q - best_q
        if q > best_q:
            node_labels, best_q = candidate, q
            if history is not None:
                history.append(q)
        if gained <= config.min_modularity_gain:
            break
        a = _aggregate(a, level)
    partition = Partition(node_labels)
    return partition, _modularity(original, partition.assignment, config.resolution)


def restart_seeds(seed: int, restarts: int) -> list[int]:
    """Seeds for independent restarts; the first is ``seed`` itself."""
    extra = np.random.SeedSequence(seed).generate_state(max(0, restarts - 1)).tolist()
    return [seed] + [int(s) for s in extra]


def best_of_louvain(graph, config: LouvainConfig, restarts: int = 1) -> tuple[Partition, float]:
    """Run Louvain with ``restarts`` seeds and keep the highest modularity (first on ties)."""
    best = None
    for seed in restart_seeds(config.seed, restarts):
        cfg = LouvainConfig(seed, config.resolution, config.min_modularity_gain, config.max_passes, config.max_sweeps)
        result = louvain(graph, cfg)
        if best is None or result[1] > best[1] + _EPS:
            best = result
    return best


def _restricted_growth_strings(n: int):
    """All set partitions of n items as restricted growth strings, in lexicographic order."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(top + 2):
            prefix.append(c)
            yield from rec(prefix, max(top, c))
            prefix.pop()

    yield from rec([0], 0)


def brute_force_best_partition(graph, resolution: float = 1.0) -> tuple[Partition, float]:
    """Exhaustive modularity maximization for tiny graphs (test oracle)."""
    dense = _clamped(graph).toarray()
    n = dense.shape[0]
    if n > ORACLE_MAX_NODES:
        raise OracleTooLarge(f"brute force is limited to {ORACLE_MAX_NODES} nodes, got {n}")
    if n == 0:
        return Partition([]), 0.0
    degree = dense.sum(axis=1)
    two_m = degree.sum()
    best_labels, best_q = None, -np.inf
    for rgs in _restricted_growth_strings(n):
        labels = np.array(rgs)
        if two_m <= 0:
            q = 0.0
        else:
            onehot = np.zeros((n, labels.max() + 1))
            onehot[np.arange(n), labels] = 1.0
            inside = np.einsum("ic,ij,jc->c", onehot, dense, onehot)
            total = degree @ onehot
            q = float(np.sum(inside / two_m - resolution * (total / two_m) ** 2))
        if q > best_q + _EPS:
            best_labels, best_q = labels, q
    return Partition(best_labels), best_q


def partitions_count(n: int) -> int:
    """Bell number; the number of set partitions of n items."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


__all__ = [
    "LouvainConfig",
    "Partition",
    "best_of_louvain",
    "brute_force_best_partition",
    "louvain",
    "modularity",
    "read_partition",
    "write_partition",
]

