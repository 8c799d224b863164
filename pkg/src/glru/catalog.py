"""File populations: Zipf popularity, censored Pareto video lengths, chunking.

File ids are 0-based indices in popularity order, so file ``i`` has rank
``i + 1``.  Popularity weights are kept unnormalized; they double as
per-file request rates when the aggregate rate equals their sum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

CORRELATION_MODES = ("independent", "positive", "negative")


@dataclass(frozen=True)
class FileCatalog:
    popularity: np.ndarray
    chunks: np.ndarray
    video_length_s: np.ndarray | None = None
    chunk_len_s: float | None = None

    def __post_init__(self):
        q = np.asarray(self.popularity, dtype=float)
        s = np.asarray(self.chunks)
        if q.ndim != 1 or q.shape != s.shape:
            raise ValueError("popularity and chunks must be 1-d arrays of equal length")
        if q.size == 0:
            raise ValueError("catalog must contain at least one file")
        if not np.all(q > 0):
            raise ValueError("popularity weights must be positive")
        if np.any(np.diff(q) > 0):
            raise ValueError("popularity must be non-increasing in rank")
        if not np.all(s == np.round(s)) or not np.all(s >= 1):
            raise ValueError("chunk counts must be integers >= 1")
        s = s.astype(np.int64)
        q.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "popularity", q)
        object.__setattr__(self, "chunks", s)
        if self.video_length_s is not None:
            lengths = np.asarray(self.video_length_s, dtype=float)
            if lengths.shape != q.shape:
                raise ValueError("video_length_s must match the number of files")
            lengths.setflags(write=False)
            object.__setattr__(self, "video_length_s", lengths)

    @property
    def n_files(self) -> int:
        return int(self.popularity.size)

    @property
    def total_chunks(self) -> int:
        return int(self.chunks.sum())

    @property
    def request_probabilities(self) -> np.ndarray:
        return self.popularity / self.popularity.sum()

    @property
    def mean_chunks_per_request(self) -> float:
        """Popularity-weighted mean file size in chunks."""
        return float(self.request_probabilities @ self.chunks)

    @classmethod
    def uniform(cls, n_files: int, alpha: float, chunks: int) -> "FileCatalog":
        """Zipf catalog where every file has the same number of chunks."""
        if chunks < 1:
            raise ValueError("chunks must be >= 1")
        q = make_zipf_popularity(n_files, alpha)
        return cls(q, np.full(n_files, chunks, dtype=np.int64))

    def to_csv(self, path) -> None:
        lengths = self.video_length_s
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rank", "q", "chunks", "length_s"])
            for i in range(self.n_files):
                length = "" if lengths is None else repr(float(lengths[i]))
                w.writerow([i + 1, repr(float(self.popularity[i])), int(self.chunks[i]), length])

    @classmethod
    def from_csv(cls, path, chunk_len_s: float | None = None) -> "FileCatalog":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty catalog")
        ranks = [int(r["rank"]) for r in rows]
        if ranks != list(range(1, len(rows) + 1)):
            raise ValueError(f"{path}: ranks must be 1..N in order")
        q = np.array([float(r["q"]) for r in rows])
        s = np.array([int(r["chunks"]) for r in rows])
        raw = [r.get("length_s", "") for r in rows]
        lengths = None if all(v in ("", None) for v in raw) else np.array([float(v) for v in raw])
        return cls(q, s, lengths, chunk_len_s)


def make_zipf_popularity(n_files: int, alpha: float) -> np.ndarray:
    """Unnormalized Zipf weights ``i ** -alpha`` for ranks 1..n_files."""
    if n_files < 1:
        raise ValueError("n_files must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return np.arange(1, n_files + 1, dtype=float) ** -alpha


def make_censored_pareto_lengths(n_files: int, shape: float = 2.0, scale: float = 300.0,
                                 cap: float = 3600.0, rng_seed: int | None = 0) -> np.ndarray:
    """Draw Pareto(shape, scale) lengths, redrawing any value above ``cap``."""
    if not shape > 1:
        raise ValueError("shape must be > 1")
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not cap > scale:
        raise ValueError("cap must exceed scale")
    rng = np.random.default_rng(rng_seed)
    out = np.empty(n_files)
    todo = np.arange(n_files)
    while todo.size:
        # numpy's pareto is the Lomax form; shift by one for the classical law
        draw = (rng.pareto(shape, todo.size) + 1.0) * scale
        ok = draw <= cap
        out[todo[ok]] = draw[ok]
        todo = todo[~ok]
    return out


def chunkize(lengths, chunk_len_s: float) -> np.ndarray:
    if not chunk_len_s > 0:
        raise ValueError("chunk_len_s must be positive")
    lengths = np.asarray(lengths, dtype=float)
    # guard against 600/2 -> 300.00000000000006 style round-off
    ratio = np.round(lengths / chunk_len_s, 9)
    return np.maximum(np.ceil(ratio), 1).astype(np.int64)


def couple_popularity_size(catalog: FileCatalog, mode: str) -> FileCatalog:
    """Re-pair chunk counts with popularity ranks.

    ``positive`` gives the largest files to the most popular ranks,
    ``negative`` the smallest.  The popularity vector is never permuted;
    video lengths travel with their chunk counts.
    """
    if mode not in CORRELATION_MODES:
        raise ValueError(f"unknown correlation mode {mode!r}")
    if mode == "independent":
        return catalog
    order = np.argsort(catalog.chunks, kind="stable")
    if mode == "positive":
        order = order[::-1]
    lengths = None if catalog.video_length_s is None else catalog.video_length_s[order]
    return replace(catalog, chunks=catalog.chunks[order], video_length_s=lengths)


def make_vod_catalog(n_files: int = 1000, alpha: float = 0.8, chunk_len_s: float = 2.0,
                     rng_seed: int | None = 0, shape: float = 2.0, scale: float = 300.0,
                     cap: float = 3600.0, correlation: str = "independent",
                     lengths=None) -> FileCatalog:
    """Video catalog: Zipf popularity, censored Pareto lengths cut into chunks.

    Pass ``lengths`` to reuse one draw of video lengths across chunk lengths.
    """
    if lengths is None:
        lengths = make_censored_pareto_lengths(n_files, shape, scale, cap, rng_seed)
    lengths = np.asarray(lengths, dtype=float)
    if lengths.size != n_files:
        raise ValueError("lengths must have n_files entries")
    cat = FileCatalog(make_zipf_popularity(n_files, alpha), chunkize(lengths, chunk_len_s),
                      lengths, chunk_len_s)
    return couple_popularity_size(cat, correlation)


def capacity_from_proportion(catalog: FileCatalog, proportion: float) -> int:
    """Cache size as a fraction of all catalog chunks, at least one chunk."""
    if not 0 < proportion < 1:
        raise ValueError("proportion must lie in (0, 1)")
    return max(1, int(math.floor(proportion * catalog.total_chunks + 0.5)))


__all__ = [
    "CORRELATION_MODES", "FileCatalog", "make_zipf_popularity",
    "make_censored_pareto_lengths", "chunkize", "couple_popularity_size",
    "make_vod_catalog", "capacity_from_proportion",
]
