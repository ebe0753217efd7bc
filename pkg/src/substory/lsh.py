"""Streaming first-story style clustering with random-hyperplane LSH over tf-idf vectors."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Tweet, TfIdfVector


class LshError(ValueError):
    pass


@dataclass(frozen=True)
class LshConfig:
    k_bits: int = 12
    n_tables: int = 56
    bucket_size: int = 10
    cosine_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k_bits <= 64:
            raise LshError("k_bits must be in [1, 64]")
        if self.n_tables < 1 or self.bucket_size < 1:
            raise LshError("n_tables and bucket_size must be positive")
        if not 0.0 <= self.cosine_threshold <= 1.0:
            raise LshError("cosine_threshold must lie in [0, 1]")

    @property
    def name(self) -> str:
        return f"k{self.k_bits}h{self.n_tables}b{self.bucket_size}"


PRESETS = {
    "k12h56b10": dict(k_bits=12, n_tables=56, bucket_size=10),
    "k13h71b10": dict(k_bits=13, n_tables=71, bucket_size=10),
}


def preset(name: str, **overrides) -> LshConfig:
    try:
        params = dict(PRESETS[name])
    except KeyError:
        raise LshError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    params.update(overrides)
    return LshConfig(**params)


def make_hyperplanes(dim: int, k_bits: int, n_tables: int, seed: int) -> list[np.ndarray]:
    """Standard-normal hyperplanes, one (k_bits, dim) array per table.

    Table t draws its planes one after another from its own child seed, so the first k planes
    of a table do not depend on ``k_bits`` or ``n_tables``.
    """
    children = np.random.SeedSequence(seed).spawn(n_tables)
    planes = []
    for child in children:
        rng = np.random.default_rng(child)
        planes.append(np.stack([rng.standard_normal(dim) for _ in range(k_bits)]) if k_bits else np.zeros((0, dim)))
    return planes


def hash_signature(x: TfIdfVector, hyperplanes: np.ndarray) -> int:
    """Bit i is set when the dot product with hyperplane i is strictly positive."""
    if len(x) == 0:
        return 0
    dots = hyperplanes[:, x.indices] @ x.weights
    key = 0
    for i, d in enumerate(dots):
        if d > 0:
            key |= 1 << i
    return key


class HashTables:
    """``n_tables`` hash tables of FIFO buckets holding at most ``bucket_size`` entries each."""

    def __init__(self, dim: int, config: LshConfig):
        self.config = config
        self.dim = dim
        self.hyperplanes = make_hyperplanes(dim, config.k_bits, config.n_tables, config.seed)
        self._stacked = np.concatenate(self.hyperplanes)
        self._powers = np.left_shift(np.uint64(1), np.arange(config.k_bits, dtype=np.uint64))
        self.tables: list[dict[int, deque]] = [{} for _ in range(config.n_tables)]
        self._order = 0
        self.max_occupancy = 0

    def keys(self, x: TfIdfVector) -> list[int]:
        """One signature per table; same bits as :func:`hash_signature`, computed in one product."""
        if len(x) == 0:
            return [0] * self.config.n_tables
        dots = (self._stacked[:, x.indices] @ x.weights).reshape(self.config.n_tables, self.config.k_bits)
        bits = (dots > 0).astype(np.uint64)
        return [int(k) for k in (bits * self._powers).sum(axis=1, dtype=np.uint64)]

    def insert(self, tweet_id: str, x: TfIdfVector, keys: Sequence[int] | None = None) -> None:
        keys = self.keys(x) if keys is None else keys
        entry = (self._order, tweet_id, x)
        self._order += 1
        b = self.config.bucket_size
        for table, key in zip(self.tables, keys):
            bucket = table.get(key)
            if bucket is None:
                bucket = table[key] = deque()
            bucket.append(entry)
            if len(bucket) > b:
                bucket.popleft()
            self.max_occupancy = max(self.max_occupancy, len(bucket))

    def candidates(self, x: TfIdfVector, keys: Sequence[int] | None = None) -> list[tuple[int, str, TfIdfVector]]:
        keys = self.keys(x) if keys is None else keys
        seen = {}
        for table, key in zip(self.tables, keys):
            for entry in table.get(key, ()):
                seen[entry[0]] = entry
        return [seen[o] for o in sorted(seen)]


def nearest_neighbor(x: TfIdfVector, tables: HashTables, keys: Sequence[int] | None = None):
    """Best cosine match among tweets sharing a bucket with ``x`` in any table, or None."""
    best = None
    for _, tid, y in tables.candidates(x, keys):
        cos = x.dot(y)
        if best is None or cos > best[1]:  # strict: earlier insertion wins ties
            best = (tid, cos)
    return best


def cluster_stream(tweets: Sequence[Tweet], vectors: Mapping[str, TfIdfVector], config: LshConfig,
                   dim: int | None = None) -> dict[str, int]:
    """Cluster tweets in time order: join the nearest neighbour's cluster if cosine exceeds
    the threshold, otherwise open a new cluster."""
    if dim is None:
        dim = 1 + max((int(v.indices.max()) for v in vectors.values() if len(v)), default=0)
    tables = HashTables(dim, config)
    out: dict[str, int] = {}
    next_id = 0
    for t in sorted(tweets, key=lambda t: (t.timestamp, t.id)):
        x = vectors[t.id]
        keys = tables.keys(x)
        nn = nearest_neighbor(x, tables, keys)
        if nn is not None and nn[1] > config.cosine_threshold:
            out[t.id] = out[nn[0]]
        else:
            out[t.id] = next_id
            next_id += 1
        tables.insert(t.id, x, keys)
    return out
