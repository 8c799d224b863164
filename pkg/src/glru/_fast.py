"""Compiled replay loops mirroring ChunkCache + FifoServer.

The cache is an intrusive doubly linked list over file ids: ``toward_head``
and ``toward_tail`` hold neighbour ids (-1 at the ends), ``count`` the
cached chunks (0 when absent).  ``state`` is [head, tail, occupancy,
inserted].  Semantics must stay identical to :class:`glru.cache.ChunkCache`;
tests compare the two request by request.
"""

from __future__ import annotations

import numpy as np
from numba import njit

HEAD, TAIL, OCC, INSERTED = 0, 1, 2, 3


class FastCache:
    def __init__(self, capacity: int, sizes, glru: bool, whole_file: bool = False):
        self.sizes = np.ascontiguousarray(sizes, dtype=np.int64)
        n = self.sizes.size
        self.capacity = int(capacity)
        self.glru = bool(glru)
        self.whole_file = bool(whole_file)
        self.count = np.zeros(n, dtype=np.int64)
        self.toward_head = np.full(n, -1, dtype=np.int64)
        self.toward_tail = np.full(n, -1, dtype=np.int64)
        self.state = np.array([-1, -1, 0, 0], dtype=np.int64)

    @property
    def occupancy(self) -> int:
        return int(self.state[OCC])

    @property
    def inserted(self) -> int:
        return int(self.state[INSERTED])

    def entries(self) -> list[tuple[int, int]]:
        out = []
        f = int(self.state[HEAD])
        while f != -1:
            out.append((f, int(self.count[f])))
            f = int(self.toward_tail[f])
        return out

    def replay(self, files) -> tuple[np.ndarray, np.ndarray]:
        files = np.ascontiguousarray(files, dtype=np.int64)
        hits = np.empty(files.size, dtype=np.int64)
        added = np.empty(files.size, dtype=np.int64)
        _replay(files, self.sizes, self.capacity, self.glru, self.whole_file, self.count,
                self.toward_head, self.toward_tail, self.state, hits, added)
        return hits, added


@njit(cache=True)
def _unlink(f, toward_head, toward_tail, state):
    h = toward_head[f]
    t = toward_tail[f]
    if h == -1:
        state[HEAD] = t
    else:
        toward_tail[h] = t
    if t == -1:
        state[TAIL] = h
    else:
        toward_head[t] = h
    toward_head[f] = -1
    toward_tail[f] = -1


@njit(cache=True)
def _touch(f, sizes, capacity, glru, whole, count, toward_head, toward_tail, state):
    """Apply one request; return (chunks found, chunks added)."""
    prev = count[f]
    size = sizes[f]
    if glru:
        new = prev + 1 if prev < size else size
    else:
        new = size
    if prev > 0:
        _unlink(f, toward_head, toward_tail, state)
    old_head = state[HEAD]
    toward_tail[f] = old_head
    toward_head[f] = -1
    if old_head == -1:
        state[TAIL] = f
    else:
        toward_head[old_head] = f
    state[HEAD] = f
    count[f] = new
    state[OCC] += new - prev
    state[INSERTED] += new - prev
    while state[OCC] > capacity:
        t = state[TAIL]
        c = count[t]
        excess = state[OCC] - capacity
        if c <= excess or (whole and t != f):
            _unlink(t, toward_head, toward_tail, state)
            count[t] = 0
            state[OCC] -= c
        else:
            count[t] = c - excess
            state[OCC] -= excess
    return prev, new - prev


@njit(cache=True)
def _replay(files, sizes, capacity, glru, whole, count, toward_head, toward_tail, state,
            hits, added):
    for k in range(files.size):
        h, a = _touch(files[k], sizes, capacity, glru, whole, count, toward_head,
                      toward_tail, state)
        hits[k] = h
        added[k] = a


@njit(cache=True)
def _replay_vod(files, times, draws, sizes, capacity, glru, whole, count, toward_head,
                toward_tail, state, busy, mu, d_s, L, hits, added, dl, stall):
    """Cache + FIFO replay of one trace segment.

    ``draws`` holds sizes[files[k]] unit exponentials per request, in order;
    ``busy[0]`` carries the server backlog end between segments.
    """
    pos = 0
    for k in range(files.size):
        f = files[k]
        t = times[k]
        h, a = _touch(f, sizes, capacity, glru, whole, count, toward_head, toward_tail,
                      state)
        hits[k] = h
        added[k] = a
        s = sizes[f]
        if h < s:
            start = t if t > busy[0] else busy[0]
            acc = 0.0
            worst = -np.inf
            done = start
            for j in range(h, s):
                acc += draws[pos + j] / mu
                done = start + acc
                v = (done - t) - j * L
                if v > worst:
                    worst = v
            busy[0] = done
            dl[k] = done - t
            late = worst - d_s
            stall[k] = late if late > 0.0 else 0.0
        else:
            dl[k] = 0.0
            stall[k] = 0.0
        pos += s


def replay_vod(cache: FastCache, files, times, rng: np.random.Generator, mu: float,
               d_s: float, L: float, block: int = 1 << 22):
    """Run the whole trace, drawing service times from ``rng`` in blocks.

    Returns (hits, added, download_time, stall) arrays.
    """
    files = np.ascontiguousarray(files, dtype=np.int64)
    times = np.ascontiguousarray(times, dtype=float)
    n = files.size
    hits = np.empty(n, dtype=np.int64)
    added = np.empty(n, dtype=np.int64)
    dl = np.empty(n)
    stall = np.empty(n)
    busy = np.zeros(1)
    need = np.cumsum(cache.sizes[files])
    lo = 0
    used = 0
    while lo < n:
        # largest segment whose draws fit in one block (always at least one request)
        hi = int(np.searchsorted(need, used + block, side="right"))
        hi = max(hi, lo + 1)
        total = int(need[hi - 1] - used)
        draws = rng.standard_exponential(total)
        _replay_vod(files[lo:hi], times[lo:hi], draws, cache.sizes, cache.capacity,
                    cache.glru, cache.whole_file, cache.count, cache.toward_head,
                    cache.toward_tail, cache.state, busy, float(mu), float(d_s), float(L),
                    hits[lo:hi], added[lo:hi], dl[lo:hi], stall[lo:hi])
        used += total
        lo = hi
    return hits, added, dl, stall
