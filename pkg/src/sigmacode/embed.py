"""Numeric initial node features and inverse-edge augmentation.

Feature strings are subtokenized on ".", each subtoken embedded by a
deterministic hashed character-n-gram model (n in [3, 6], FNV-1a into
2^20 buckets, bucket vectors drawn once from seeded uniform[-1/d, 1/d]),
and the mean taken as the node's initial vector. Strict-tied nodes
instead read a shared learnable row; that wiring lives in `model`.
"""

from __future__ import annotations

import re

import numpy as np

INV_PREFIX = "inv_"

HASHED = "hashed"
PRETRAINED = "pretrained"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_NAME_WORDS = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


class AlreadyAugmented(Exception):
    pass


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def subtokenize_feature(feature: str) -> list[str]:
    return [part.lower() for part in feature.split(".") if part]


def subtokenize_name(identifier: str) -> list[str]:
    out: list[str] = []
    for chunk in identifier.split("_"):
        out.extend(w.lower() for w in _NAME_WORDS.findall(chunk))
    return out


class SubwordEmbedder:
    """Deterministic subtoken vectors; hashed n-grams or a lookup table."""

    def __init__(self, dim: int = 300, mode: str = HASHED, buckets: int = 2 ** 20,
                 seed: int = 0, table: dict[str, np.ndarray] | None = None,
                 ngram_min: int = 3, ngram_max: int = 6):
        if mode not in (HASHED, PRETRAINED):
            raise ValueError(f"unknown embedder mode {mode!r}")
        if mode == PRETRAINED and table is None:
            raise ValueError("pretrained mode needs a table")
        self.dim = dim
        self.mode = mode
        self.buckets = buckets
        self.seed = seed
        self.table = table or {}
        self.ngram_min = ngram_min
        self.ngram_max = ngram_max
        self._bucket_cache: dict[int, np.ndarray] = {}
        self._token_cache: dict[str, np.ndarray] = {}

    def _bucket_vector(self, bucket: int) -> np.ndarray:
        vec = self._bucket_cache.get(bucket)
        if vec is None:
            rng = np.random.default_rng((self.seed, bucket))
            vec = rng.uniform(-1.0 / self.dim, 1.0 / self.dim, self.dim)
            self._bucket_cache[bucket] = vec
        return vec

    def _hashed(self, subtoken: str) -> np.ndarray:
        padded = f"<{subtoken}>"
        total = np.zeros(self.dim)
        count = 0
        for n in range(self.ngram_min, self.ngram_max + 1):
            for i in range(len(padded) - n + 1):
                bucket = fnv1a_64(padded[i:i + n].encode("utf-8")) % self.buckets
                total += self._bucket_vector(bucket)
                count += 1
        if count == 0:
            # shorter than the smallest n-gram even with padding markers
            bucket = fnv1a_64(padded.encode("utf-8")) % self.buckets
            return self._bucket_vector(bucket).copy()
        return total / count

    def embed_subtoken(self, subtoken: str) -> np.ndarray:
        cached = self._token_cache.get(subtoken)
        if cached is not None:
            return cached
        if self.mode == PRETRAINED and subtoken in self.table:
            vec = np.asarray(self.table[subtoken], dtype=np.float64)
            if vec.shape != (self.dim,):
                raise ValueError(f"table vector for {subtoken!r} has shape {vec.shape}")
        else:
            vec = self._hashed(subtoken)
        self._token_cache[subtoken] = vec
        return vec

    def feature_vector(self, feature: str) -> np.ndarray:
        subtokens = subtokenize_feature(feature)
        if not subtokens:
            return np.zeros(self.dim)
        return np.mean([self.embed_subtoken(s) for s in subtokens], axis=0)


def node_init_feature(feature: str, embedder: SubwordEmbedder) -> np.ndarray:
    """Mean subtoken embedding of a node's feature string."""
    return embedder.feature_vector(feature)


def load_vector_file(path, dim: int | None = None) -> dict[str, np.ndarray]:
    """Textual word-vector format: optional `<count> <dim>` header, then
    `<token> <v1> ... <vd>` per line."""
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        parts = first.split()
        if len(parts) == 2 and all(p.lstrip("-").isdigit() for p in parts):
            dim = int(parts[1])
        else:
            vec = np.array([float(x) for x in parts[1:]])
            dim = dim or len(vec)
            table[parts[0]] = vec
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            vec = np.array([float(x) for x in parts[1:]])
            if dim is not None and len(vec) != dim:
                raise ValueError(f"vector for {parts[0]!r} has length {len(vec)}, expected {dim}")
            table[parts[0]] = vec
    return table


def add_inverse_edges(g):
    """New graph with (v, inv_r, u) added for every (u, r, v)."""
    from .graphbuild import SigmaEdge, SigmaGraph

    if any(e.etype.startswith(INV_PREFIX) for e in g.edges):
        raise AlreadyAugmented(g.method_id)
    inverses = [SigmaEdge(e.dst, INV_PREFIX + e.etype, e.src) for e in g.edges]
    return SigmaGraph(g.method_id, g.flavor, list(g.nodes), list(g.edges) + inverses)


def with_inverse_edges(graphs):
    """Inverse-augmented copies; graphs already augmented pass through."""
    out = []
    for g in graphs:
        if any(e.etype.startswith(INV_PREFIX) for e in g.edges):
            out.append(g)
        else:
            out.append(add_inverse_edges(g))
    return out
