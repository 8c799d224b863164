"""Recency-ordered chunk cache with LRU and gLRU replacement.

Each resident file occupies one entry holding the number of its chunks in
the cache (always a prefix of the file).  A request moves the file's entry
to the head; LRU then tops it up to the whole file while gLRU adds at most
one chunk.  Space is reclaimed from the tail entry, chunk by chunk by
default.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from typing import NamedTuple

import numpy as np


class PolicyKind(enum.Enum):
    LRU = "lru"
    GLRU = "glru"

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown policy {value!r}; expected 'lru' or 'glru'") from None


EVICTION_MODES = ("chunk", "file")


class RequestOutcome(NamedTuple):
    chunks_hit: int
    chunks_evicted: list


class ChunkCache:
    """Cache state of capacity ``capacity`` chunks over a fixed catalog.

    ``chunks`` gives the size s(i) of every file in the catalog.  With
    ``eviction="file"`` whole tail entries are dropped instead, which can
    leave the cache below capacity.
    """

    def __init__(self, capacity: int, chunks, eviction: str = "chunk"):
        if capacity < 1:
            raise ValueError("capacity must be >= 1 chunk")
        if eviction not in EVICTION_MODES:
            raise ValueError(f"unknown eviction mode {eviction!r}")
        sizes = [int(c) for c in np.asarray(chunks).ravel()]
        if any(c < 1 for c in sizes):
            raise ValueError("every file needs at least one chunk")
        self.capacity = int(capacity)
        self.sizes = sizes
        self.eviction = eviction
        # iteration order runs tail (least recent) -> head (most recent)
        self._entries: OrderedDict[int, int] = OrderedDict()
        self.occupancy = 0
        self.inserted = 0

    def __len__(self) -> int:
        return len(self._entries)

    def _check_file(self, file: int) -> None:
        if not 0 <= file < len(self.sizes):
            raise KeyError(f"unknown file id {file}")

    def lookup(self, file: int) -> int:
        """Chunks of ``file`` currently cached; recency is left untouched."""
        self._check_file(file)
        return self._entries.get(file, 0)

    def entries(self) -> list[tuple[int, int]]:
        """(file, cached_chunks) pairs from head to tail."""
        return list(reversed(self._entries.items()))

    def snapshot_counts(self) -> dict[int, int]:
        return dict(self._entries)

    def request(self, file: int, policy) -> RequestOutcome:
        self._check_file(file)
        if policy.__class__ is not PolicyKind:
            policy = PolicyKind.parse(policy)
        entries = self._entries
        prev = entries.get(file, 0)
        size = self.sizes[file]
        if policy is PolicyKind.LRU:
            new = size
        else:
            new = prev + 1 if prev < size else size
        entries[file] = new
        entries.move_to_end(file)
        added = new - prev
        self.occupancy += added
        self.inserted += added
        evicted = []
        if self.occupancy > self.capacity:
            self._evict(evicted)
        return RequestOutcome(prev, evicted)

    def _evict(self, evicted: list) -> None:
        entries = self._entries
        whole = self.eviction == "file"
        while self.occupancy > self.capacity:
            tail = next(iter(entries))
            count = entries[tail]
            excess = self.occupancy - self.capacity
            # a file never drops itself entirely: an oversized insert is trimmed
            if count <= excess or (whole and len(entries) > 1):
                del entries[tail]
                self.occupancy -= count
                evicted.append((tail, count))
            else:
                entries[tail] = count - excess
                self.occupancy -= excess
                evicted.append((tail, excess))

    def check_invariants(self) -> None:
        total = 0
        for f, c in self._entries.items():
            if not 1 <= c <= self.sizes[f]:
                raise AssertionError(f"file {f} holds {c} chunks of {self.sizes[f]}")
            total += c
        if total != self.occupancy:
            raise AssertionError("occupancy out of sync with entries")
        if self.occupancy > self.capacity:
            raise AssertionError("cache over capacity")


def lookup(cache: ChunkCache, file: int) -> int:
    return cache.lookup(file)


def request(cache: ChunkCache, file: int, policy) -> RequestOutcome:
    return cache.request(file, policy)


def snapshot_counts(cache: ChunkCache) -> dict[int, int]:
    return cache.snapshot_counts()
