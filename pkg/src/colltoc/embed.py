"""Text embedding providers and cosine similarity.

Two providers share one contract: ``embed(texts)`` returns an
``(len(texts), dim)`` float64 array of unit rows, in input order. Empty (or
whitespace-only) text always maps to the first basis vector.

* ``DeterministicEmbedder`` hashes case-folded character n-grams into signed
  buckets. It needs no model and is stable across processes and machines.
* ``RemoteEmbedder`` talks JSON over HTTP to an embedding service
  (``POST {"texts": [...]}`` -> ``{"vectors": [[...], ...]}``).
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import ConfigError, DimensionError, ProviderProtocolError, ProviderUnavailable

log = logging.getLogger(__name__)

_FNV_PRIME = np.uint64(0x100000001B3)
_FNV_OFFSET = 0xCBF29CE484222325
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "deterministic"
    dim: int = 256
    batch_size: int = 64
    ngram_sizes: tuple[int, ...] = (2, 3, 4)
    seed: int = 0
    endpoint: str | None = None
    timeout: float = 30.0
    max_retries: int = 3
    retry_backoff: float = 0.5
    concurrency: int = 4

    def __post_init__(self):
        if self.kind not in ("deterministic", "remote"):
            raise ConfigError(f"unknown embedding provider kind {self.kind!r}")
        if self.dim < 1 or self.batch_size < 1:
            raise ConfigError("dim and batch_size must be positive")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError("remote embedding provider needs an endpoint")
        object.__setattr__(self, "ngram_sizes", tuple(int(n) for n in self.ngram_sizes))
        if not self.ngram_sizes or min(self.ngram_sizes) < 1:
            raise ConfigError("ngram_sizes must be non-empty positive integers")


def basis_vector(dim: int, i: int = 0) -> np.ndarray:
    v = np.zeros(dim)
    v[i] = 1.0
    return v


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        return basis_vector(len(v))
    return v / norm


def _splitmix64(h: np.ndarray) -> np.ndarray:
    h = h ^ (h >> np.uint64(30))
    h = h * np.uint64(0xBF58476D1CE4E5B9)
    h = h ^ (h >> np.uint64(27))
    h = h * np.uint64(0x94D049BB133111EB)
    return h ^ (h >> np.uint64(31))


def ngram_hashes(text: str, n: int, seed: int) -> np.ndarray:
    """64-bit hashes of every length-``n`` character window of ``text``."""
    codes = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.uint64)
    count = len(codes) - n + 1
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    start = (_FNV_OFFSET ^ ((seed * 0x9E3779B97F4A7C15 + n) & _MASK64)) & _MASK64
    h = np.full(count, start, dtype=np.uint64)
    for j in range(n):
        h = (h ^ codes[j : j + count]) * _FNV_PRIME
    return _splitmix64(h)


def deterministic_embed(text: str, config: EmbeddingProviderConfig) -> np.ndarray:
    """Signed feature hashing of case-folded character n-grams, L2-normalized."""
    if not text.strip():
        return basis_vector(config.dim)
    padded = f" {text.casefold()} "
    vec = np.zeros(config.dim)
    for n in config.ngram_sizes:
        h = ngram_hashes(padded, n, config.seed)
        if not len(h):
            continue
        buckets = (h % np.uint64(config.dim)).astype(np.int64)
        signs = np.where(h >> np.uint64(63), -1.0, 1.0)
        vec += np.bincount(buckets, weights=signs, minlength=config.dim)
    return _unit(vec)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of two unit vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionError(f"cannot compare vectors of shape {u.shape} and {v.shape}")
    return float(min(1.0, max(-1.0, float(np.dot(u, v)))))


class DeterministicEmbedder:
    def __init__(self, config: EmbeddingProviderConfig):
        self.config = config

    @property
    def dim(self) -> int:
        return self.config.dim

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.config.dim))
        memo: dict[str, int] = {}
        for i, text in enumerate(texts):
            if text in memo:
                out[i] = out[memo[text]]
            else:
                out[i] = deterministic_embed(text, self.config)
                memo[text] = i
        return out


class RemoteEmbedder:
    """Client for an HTTP embedding service with batching, retries and a per-run cache."""

    def __init__(self, config: EmbeddingProviderConfig, transport: httpx.BaseTransport | None = None):
        if config.kind != "remote":
            raise ConfigError("RemoteEmbedder needs a remote provider config")
        self.config = config
        self._transport = transport
        self._cache: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()
        self._identity = f"{config.endpoint}|{config.dim}"

    @property
    def dim(self) -> int:
        return self.config.dim

    def _key(self, text: str) -> tuple[str, str]:
        return (hashlib.sha256(text.encode("utf-8")).hexdigest(), self._identity)

    def _post(self, client: httpx.Client, batch: list[str]) -> np.ndarray:
        cfg = self.config
        last_error = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.retry_backoff * 2 ** (attempt - 1))
            try:
                resp = client.post(cfg.endpoint, json={"texts": batch})
            except httpx.TransportError as exc:
                last_error = exc
                log.warning("embedding request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                log.warning("embedding service returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if not 200 <= resp.status_code < 300:
                raise ProviderProtocolError(f"embedding service returned HTTP {resp.status_code}")
            return self._parse(resp, len(batch))
        raise ProviderUnavailable(f"embedding service unavailable after {cfg.max_retries + 1} attempts: {last_error}")

    def _parse(self, resp: httpx.Response, expected: int) -> np.ndarray:
        try:
            vectors = resp.json()["vectors"]
            arr = np.asarray(vectors, dtype=float)
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderProtocolError(f"malformed embedding response: {exc}") from exc
        if arr.ndim != 2 or arr.shape[0] != expected:
            raise ProviderProtocolError(f"expected {expected} vectors, got shape {arr.shape}")
        if arr.shape[1] != self.config.dim:
            raise ProviderProtocolError(f"expected dimension {self.config.dim}, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise ProviderProtocolError("embedding response contains non-finite values")
        return np.stack([_unit(row) for row in arr])

    def embed(self, texts: list[str]) -> np.ndarray:
        cfg = self.config
        with self._lock:
            missing = list(dict.fromkeys(t for t in texts if t.strip() and self._key(t) not in self._cache))
        batches = [missing[i : i + cfg.batch_size] for i in range(0, len(missing), cfg.batch_size)]
        if batches:
            with httpx.Client(transport=self._transport, timeout=cfg.timeout) as client:
                with ThreadPoolExecutor(max_workers=max(1, cfg.concurrency)) as pool:
                    results = list(pool.map(lambda b: self._post(client, b), batches))
            with self._lock:
                for batch, vecs in zip(batches, results):
                    for text, vec in zip(batch, vecs):
                        self._cache[self._key(text)] = vec
        out = np.empty((len(texts), cfg.dim))
        with self._lock:
            for i, text in enumerate(texts):
                out[i] = self._cache[self._key(text)] if text.strip() else basis_vector(cfg.dim)
        return out


def make_embedder(config: EmbeddingProviderConfig, transport: httpx.BaseTransport | None = None):
    if config.kind == "remote":
        return RemoteEmbedder(config, transport=transport)
    return DeterministicEmbedder(config)


def embed_texts(texts: list[str], provider) -> np.ndarray:
    """Embed ``texts`` with a provider config or an already-built embedder."""
    embedder = make_embedder(provider) if isinstance(provider, EmbeddingProviderConfig) else provider
    return embedder.embed(list(texts))
