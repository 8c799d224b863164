"""Characteristic-time approximations for LRU and gLRU with chunked files.

For LRU (Che's approximation with file sizes) the characteristic time t
solves

    C = sum_i (1 - exp(-q_i t)) * s_i

and file i is cached with probability 1 - exp(-q_i t).

For gLRU a file holds at least j chunks when its last j inter-request
gaps were all shorter than t, so with x_i = 1 - exp(-q_i t)

    P(at least j chunks of i) = x_i ** j
    C = sum_i sum_{j=1..s_i} x_i ** j
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .cache import PolicyKind
from .catalog import FileCatalog

DEFAULT_TOL = 1e-9


def _miss_and_hit(q, t):
    """Return (exp(-q t), 1 - exp(-q t)) without cancellation."""
    qt = np.asarray(q, dtype=float) * t
    return np.exp(-qt), -np.expm1(-qt)


def _geometric_tail_sum(q, s, t):
    """sum_{j=1..s} x**j with x = 1 - exp(-q t), elementwise.

    Uses x (1 - x**s) / (1 - x); the x -> 1 limit is s.
    """
    miss, x = _miss_and_hit(q, t)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus_xs = -np.expm1(s * np.log1p(-miss))
        out = x * one_minus_xs / miss
    return np.where(miss > 0, out, s)


def expected_occupancy(catalog: FileCatalog, t: float, policy) -> float:
    """Expected number of cached chunks if the characteristic time were ``t``."""
    policy = PolicyKind.parse(policy)
    q, s = catalog.popularity, catalog.chunks
    if policy is PolicyKind.LRU:
        return float(_miss_and_hit(q, t)[1] @ s)
    return float(_geometric_tail_sum(q, s, t).sum())


def bisect_increasing(f, target: float, tol: float, t0: float = 1.0, max_iter: int = 2000):
    """Root of f(t) = target for f continuous and strictly increasing on t > 0.

    Brackets by doubling/halving from ``t0`` then bisects until the residual
    is within ``tol`` or the bracket collapses to adjacent floats.  Returns
    (t, residual).
    """
    lo, hi = 0.0, t0
    while f(hi) < target:
        lo, hi = hi, 2.0 * hi
        if not math.isfinite(hi):
            raise ArithmeticError("could not bracket the root")
    best_t, best_r = hi, abs(f(hi) - target)
    for _ in range(max_iter):
        if best_r <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        val = f(mid)
        r = abs(val - target)
        if r < best_r:
            best_t, best_r = mid, r
        if val < target:
            lo = mid
        else:
            hi = mid
    return best_t, best_r


@dataclass(frozen=True)
class ApproxModel:
    policy: PolicyKind
    t_c: float
    catalog: FileCatalog
    capacity: int
    residual: float

    def hit_base(self, file=None) -> np.ndarray | float:
        """1 - exp(-q t_c) for one file or for all files."""
        q = self.catalog.popularity if file is None else self.catalog.popularity[file]
        return _miss_and_hit(q, self.t_c)[1]


@dataclass(frozen=True)
class ChunkDistribution:
    file: int
    probs: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def at_least(self, j: int) -> float:
        return float(self.probs[j:].sum())


def _solve(catalog: FileCatalog, capacity: int, tol: float, policy: PolicyKind) -> ApproxModel:
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    if capacity >= catalog.total_chunks:
        raise ValueError("capacity holds the whole catalog; characteristic time is undefined")
    if not tol > 0:
        raise ValueError("tol must be positive")
    # start near the scale where the least popular file begins to matter
    t0 = 1.0 / float(catalog.popularity.sum())
    t, res = bisect_increasing(lambda t: expected_occupancy(catalog, t, policy),
                               float(capacity), tol, t0=t0)
    return ApproxModel(policy, t, catalog, int(capacity), res)


def solve_tc_lru(catalog: FileCatalog, capacity: int, tol: float = DEFAULT_TOL) -> ApproxModel:
    return _solve(catalog, capacity, tol, PolicyKind.LRU)


def solve_tc_glru(catalog: FileCatalog, capacity: int, tol: float = DEFAULT_TOL) -> ApproxModel:
    return _solve(catalog, capacity, tol, PolicyKind.GLRU)


def _require(model: ApproxModel, policy: PolicyKind) -> None:
    if model.policy is not policy:
        raise ValueError(f"model was solved for {model.policy.name}, need {policy.name}")


def hit_at_least_j(model: ApproxModel, file: int, j: int) -> float:
    """Probability that at least ``j`` chunks of ``file`` are cached (gLRU)."""
    _require(model, PolicyKind.GLRU)
    size = int(model.catalog.chunks[file])
    if not 1 <= j <= size:
        raise ValueError(f"j must lie in 1..{size}")
    return float(model.hit_base(file)) ** j


def chunk_distribution(model: ApproxModel, file: int) -> ChunkDistribution:
    _require(model, PolicyKind.GLRU)
    size = int(model.catalog.chunks[file])
    miss, x = _miss_and_hit(model.catalog.popularity[file], model.t_c)
    powers = float(x) ** np.arange(size + 1)
    probs = powers * float(miss)
    probs[size] = powers[size]
    return ChunkDistribution(int(file), probs)


def expected_chunks(model: ApproxModel) -> np.ndarray:
    """Mean cached chunks per file under the model."""
    cat = model.catalog
    if model.policy is PolicyKind.LRU:
        return model.hit_base() * cat.chunks
    return _geometric_tail_sum(cat.popularity, cat.chunks, model.t_c)


def lru_hit_probability(model: ApproxModel, file: int) -> float:
    _require(model, PolicyKind.LRU)
    return float(model.hit_base(file))


@dataclass(frozen=True)
class HitCurves:
    rank: np.ndarray
    lru_any: np.ndarray
    glru_any: np.ndarray
    glru_full: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rank", "lru_any", "glru_any", "glru_full"])
            for row in zip(self.rank, self.lru_any, self.glru_any, self.glru_full):
                w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


def hit_curves(catalog: FileCatalog, capacity: int, tol: float = DEFAULT_TOL) -> HitCurves:
    """Per-rank probability of any chunk (LRU, gLRU) and of the full file (gLRU)."""
    lru = solve_tc_lru(catalog, capacity, tol)
    glru = solve_tc_glru(catalog, capacity, tol)
    x = glru.hit_base()
    return HitCurves(
        rank=np.arange(1, catalog.n_files + 1),
        lru_any=lru.hit_base(),
        glru_any=x,
        glru_full=x ** catalog.chunks,
    )


def model_to_csv(model: ApproxModel, path, max_j: int = 10) -> None:
    """Write ``rank,q,s,t_c,h1..h{max_j}``; h_j beyond s is left blank."""
    cat = model.catalog
    x = model.hit_base()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "q", "s", "t_c"] + [f"h{j}" for j in range(1, max_j + 1)])
        for i in range(cat.n_files):
            s = int(cat.chunks[i])
            if model.policy is PolicyKind.LRU:
                hs = [float(x[i])] * min(s, max_j)
            else:
                hs = [float(x[i]) ** j for j in range(1, min(s, max_j) + 1)]
            hs = [repr(h) for h in hs] + [""] * (max_j - len(hs))
            w.writerow([i + 1, repr(float(cat.popularity[i])), s, repr(model.t_c)] + hs)
