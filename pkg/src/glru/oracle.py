"""Exact stationary analysis of tiny caches by state enumeration.

A cache state is the tuple of (file, cached_chunks) pairs from head to
tail.  Requests form an i.i.d. sequence with P(file i) = q_i / sum q, so
the states visited after each request form a finite Markov chain.  The
transition rule is written out again here on plain tuples, independently
of :mod:`glru.cache`, so that the two can check each other.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .cache import PolicyKind
from .catalog import FileCatalog


def next_state(state: tuple, file: int, sizes, capacity: int, policy: PolicyKind) -> tuple:
    held = dict(state)
    prev = held.get(file, 0)
    if policy is PolicyKind.LRU:
        new = sizes[file]
    else:
        new = min(prev + 1, sizes[file])
    entries = [(file, new)] + [(g, c) for g, c in state if g != file]
    excess = sum(c for _, c in entries) - capacity
    while excess > 0:
        g, c = entries[-1]
        if c <= excess:
            entries.pop()
            excess -= c
        else:
            entries[-1] = (g, c - excess)
            excess = 0
    return tuple(entries)


@dataclass(frozen=True)
class OracleResult:
    policy: PolicyKind
    states: list
    stationary: np.ndarray
    marginals: list
    iterations: int

    def to_csv(self, path) -> None:
        """One row per file: ``rank,s,p0..p{max s}``; each row sums to 1."""
        width = max(m.size for m in self.marginals)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["policy", "rank", "s"] + [f"p{j}" for j in range(width)])
            for i, m in enumerate(self.marginals):
                probs = [repr(float(p)) for p in m] + [""] * (width - m.size)
                w.writerow([self.policy.value, i + 1, m.size - 1] + probs)


def enumerate_states(catalog: FileCatalog, capacity: int, policy, max_states: int = 100_000):
    """Breadth-first search of the states reachable from the empty cache.

    Returns (states, successor table) where ``succ[k][i]`` is the index of
    the state reached from state k by a request for file i.
    """
    policy = PolicyKind.parse(policy)
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    sizes = catalog.chunks.tolist()
    index = {(): 0}
    states = [()]
    succ = []
    queue = deque([()])
    while queue:
        state = queue.popleft()
        row = []
        for f in range(len(sizes)):
            nxt = next_state(state, f, sizes, capacity, policy)
            k = index.get(nxt)
            if k is None:
                if len(states) >= max_states:
                    raise OverflowError(f"more than {max_states} reachable cache states")
                k = index[nxt] = len(states)
                states.append(nxt)
                queue.append(nxt)
            row.append(k)
        succ.append(row)
    return states, succ


def brute_force_oracle(catalog: FileCatalog, capacity: int, policy, *, tol: float = 1e-12,
                       max_states: int = 100_000, max_iter: int = 1_000_000) -> OracleResult:
    """Stationary distribution of the cache chain and per-file chunk marginals.

    Power iteration starts from the empty cache and runs on the lazy chain
    (I + P) / 2, which has the same stationary law and cannot be periodic.
    """
    policy = PolicyKind.parse(policy)
    states, succ = enumerate_states(catalog, capacity, policy, max_states)
    n = len(states)
    probs = catalog.request_probabilities
    rows = np.repeat(np.arange(n), catalog.n_files)
    cols = np.asarray(succ, dtype=np.int64).ravel()
    vals = np.tile(probs, n)
    P = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    PT = P.T.tocsr()
    pi = np.zeros(n)
    pi[0] = 1.0
    for it in range(1, max_iter + 1):
        nxt = 0.5 * (pi + PT @ pi)
        nxt /= nxt.sum()
        delta = np.abs(nxt - pi).sum()
        pi = nxt
        if delta < tol:
            break
    else:
        raise RuntimeError(f"power iteration did not reach {tol} in {max_iter} steps")
    marginals = [np.zeros(int(s) + 1) for s in catalog.chunks]
    for p, state in zip(pi, states):
        held = dict(state)
        for i, m in enumerate(marginals):
            m[held.get(i, 0)] += p
    return OracleResult(policy, states, pi, marginals, it)
