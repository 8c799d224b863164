"""Trace-driven simulation of the cache in front of a FIFO chunk server."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._fast import FastCache, replay_vod
from .cache import EVICTION_MODES, ChunkCache, PolicyKind
from .catalog import FileCatalog
from .delivery import STALL_EPS, FifoServer, ServiceConfig, stall_from_offsets
from .workload import RequestTrace

METRICS = ("p_c", "p_m", "T_w", "T_d", "p_d")
# +1: larger is better; -1: smaller is better
METRIC_SENSE = {"p_c": 1, "p_m": -1, "T_w": -1, "T_d": -1, "p_d": -1}


@dataclass
class SimulationRecords:
    """Per-request outcomes for one simulation run."""

    t: np.ndarray
    file: np.ndarray
    s: np.ndarray
    chunks_hit: np.ndarray
    download_time: np.ndarray
    stall: np.ndarray
    warmup: int

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def stalled(self) -> np.ndarray:
        return self.stall > STALL_EPS

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "file", "s", "chunks_hit", "download_time", "stall", "stalled_flag"])
            for row in zip(self.t, self.file, self.s, self.chunks_hit, self.download_time,
                           self.stall, self.stalled):
                w.writerow([repr(float(row[0])), int(row[1]), int(row[2]), int(row[3]),
                            repr(float(row[4])), repr(float(row[5])), int(row[6])])


@dataclass
class MetricsReport:
    config: dict
    p_c: float
    p_m: float
    T_w: float
    T_d: float
    p_d: float
    n_requests: int
    warmup: int
    stderr: dict = field(default_factory=dict)
    trace_digest: str = ""

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {m: self.metric(m) for m in METRICS}


def _per_request_metrics(rec: SimulationRecords, sl: slice) -> dict:
    return {
        "p_m": (rec.chunks_hit[sl] == 0).astype(float),
        "T_w": rec.download_time[sl],
        "T_d": rec.stall[sl],
        "p_d": rec.stalled[sl].astype(float),
    }


def _batch_stderr(num: np.ndarray, den: np.ndarray | None, n_batches: int) -> float:
    """Batch-means standard error of sum(num)/sum(den) (or of mean(num))."""
    n = num.size
    if n < 2 * n_batches:
        return float("nan")
    edges = np.linspace(0, n, n_batches + 1).astype(int)
    nb = np.add.reduceat(num, edges[:-1])
    if den is None:
        db = np.diff(edges).astype(float)
    else:
        db = np.add.reduceat(den, edges[:-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(db > 0, nb / db, 0.0)
    return float(ratios.std(ddof=1) / np.sqrt(n_batches))


def metrics_from_records(rec: SimulationRecords, start: int | None = None, config: dict | None = None,
                         trace_digest: str = "", n_batches: int = 20) -> MetricsReport:
    """Summarize requests ``start:`` (default: after the run's own warm-up)."""
    start = rec.warmup if start is None else int(start)
    sl = slice(start, None)
    n = len(rec) - start
    if n <= 0:
        raise ValueError("no requests left after warm-up")
    hit = rec.chunks_hit[sl].astype(float)
    size = rec.s[sl].astype(float)
    per = _per_request_metrics(rec, sl)
    vals = {"p_c": float(hit.sum() / size.sum())}
    vals.update({k: float(v.mean()) for k, v in per.items()})
    err = {"p_c": _batch_stderr(hit, size, n_batches)}
    err.update({k: _batch_stderr(v, None, n_batches) for k, v in per.items()})
    return MetricsReport(dict(config or {}), n_requests=n, warmup=start, stderr=err,
                         trace_digest=trace_digest, **vals)


def fill_index(chunks_added: np.ndarray, capacity: int) -> int:
    """Number of leading requests needed before cumulative insertions reach ``capacity``."""
    cum = np.cumsum(chunks_added)
    idx = int(np.searchsorted(cum, capacity, side="left"))
    return min(idx + 1, cum.size)


def _replay_python(catalog, policy, capacity, trace, service, rng, eviction, check_every):
    cache = ChunkCache(capacity, catalog.chunks, eviction)
    mu = service.service_rate_chunks_per_s
    d_s, L = service.startup_delay_s, service.chunk_len_s
    server = FifoServer(mu)
    sizes = catalog.chunks.tolist()
    n = len(trace)
    hits = np.empty(n, dtype=np.int64)
    added = np.empty(n, dtype=np.int64)
    dl = np.zeros(n)
    stall = np.zeros(n)
    request = cache.request
    draw = rng.standard_exponential
    for k, (t, f) in enumerate(zip(trace.times.tolist(), trace.files.tolist())):
        before = cache.inserted
        hit = request(f, policy).chunks_hit
        added[k] = cache.inserted - before
        hits[k] = hit
        s = sizes[f]
        service_draws = draw(s)
        if hit < s:
            done = server.enqueue(t, service_draws[hit:] / mu)
            offsets = done - t
            dl[k] = offsets[-1]
            stall[k] = stall_from_offsets(offsets, hit, d_s, L)
        if check_every and k % check_every == 0:
            cache.check_invariants()
    return hits, added, dl, stall


def run_simulation(catalog: FileCatalog, policy, capacity: int, trace: RequestTrace,
                   service: ServiceConfig, *, service_seed=0, warmup: int | None = None,
                   eviction: str = "chunk", config: dict | None = None,
                   engine: str = "fast", check_every: int = 0):
    """Drive cache and FIFO server over ``trace``.

    Every request draws s(file) unit exponentials from the service stream
    whether or not its chunks are cached, and chunk k always uses draw k.
    Runs that share ``trace`` and ``service_seed`` therefore see identical
    service times chunk for chunk, whatever the policy.

    ``engine="python"`` replays through :class:`ChunkCache` and
    :class:`FifoServer` (slow, checks invariants every ``check_every``
    requests); ``"fast"`` uses the compiled loop.  Both consume the random
    stream identically and agree request for request.

    Returns ``(MetricsReport, SimulationRecords)``.
    """
    policy = PolicyKind.parse(policy)
    if capacity >= catalog.total_chunks:
        raise ValueError("capacity must be smaller than the catalog")
    if eviction not in EVICTION_MODES:
        raise ValueError(f"unknown eviction mode {eviction!r}")
    rng = np.random.default_rng(service_seed)
    if engine == "python":
        hits, added, dl, stall = _replay_python(catalog, policy, capacity, trace, service, rng,
                                                eviction, check_every)
    elif engine == "fast":
        cache = FastCache(capacity, catalog.chunks, policy is PolicyKind.GLRU, eviction == "file")
        hits, added, dl, stall = replay_vod(cache, trace.files, trace.times, rng,
                                            service.service_rate_chunks_per_s,
                                            service.startup_delay_s, service.chunk_len_s)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if warmup is None:
        warmup = fill_index(added, capacity)
    rec = SimulationRecords(trace.times, trace.files, catalog.chunks[trace.files], hits, dl,
                            stall, int(warmup))
    cfg = {"policy": policy.value, "capacity": int(capacity), **(config or {})}
    return metrics_from_records(rec, config=cfg, trace_digest=trace.digest), rec


def simulate_hits(catalog: FileCatalog, policy, capacity: int, files, *,
                  eviction: str = "chunk") -> tuple[np.ndarray, int]:
    """Cache-only replay of a file-id sequence.

    Returns chunks found for each request and the fill-based warm-up length.
    """
    policy = PolicyKind.parse(policy)
    cache = FastCache(capacity, catalog.chunks, policy is PolicyKind.GLRU, eviction == "file")
    hits, added = cache.replay(files)
    return hits, fill_index(added, capacity)


def simulate_chunk_frequencies(catalog: FileCatalog, policy, capacity: int, files, *,
                               warmup: int = 0) -> list[np.ndarray]:
    """Fraction of requests after which each file held j chunks.

    Every file is observed after every request from ``warmup`` on, using
    the reference :class:`ChunkCache`.  Only the requested file and the
    evicted ones can change, so holding times are accumulated lazily.
    """
    policy = PolicyKind.parse(policy)
    cache = ChunkCache(capacity, catalog.chunks)
    sizes = catalog.chunks.tolist()
    counts = [[0] * (s + 1) for s in sizes]
    held = [0] * len(sizes)
    since = [warmup] * len(sizes)
    entries = cache._entries
    request = cache.request
    files = np.asarray(files).tolist()
    for k, f in enumerate(files):
        out = request(f, policy)
        changed = [f] + [g for g, _ in out.chunks_evicted]
        for g in changed:
            now = entries.get(g, 0)
            if now != held[g]:
                # held[g] was observed after requests since[g] .. k-1
                if k > since[g]:
                    counts[g][held[g]] += k - since[g]
                since[g] = max(k, warmup)
                held[g] = now
    n = len(files)
    for g in range(len(sizes)):
        if n > since[g]:
            counts[g][held[g]] += n - since[g]
    return [np.asarray(c, dtype=float) / max(n - warmup, 1) for c in counts]
