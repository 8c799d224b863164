"""Single-server FIFO chunk delivery and video playback accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VIDEO_MB_PER_SECOND = 3.13
STALL_EPS = 1e-12


@dataclass(frozen=True)
class ServiceConfig:
    chunk_len_s: float = 2.0
    processing_rate_MBps: float = 10.0
    startup_delay_s: float = 3.0
    video_bitrate_MBps_per_s: float = VIDEO_MB_PER_SECOND

    def __post_init__(self):
        for name in ("chunk_len_s", "processing_rate_MBps", "video_bitrate_MBps_per_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.startup_delay_s < 0:
            raise ValueError("startup_delay_s must be >= 0")

    @property
    def service_rate_chunks_per_s(self) -> float:
        return self.processing_rate_MBps / (self.video_bitrate_MBps_per_s * self.chunk_len_s)


class FifoServer:
    """Work-conserving single server; remembers when its backlog drains."""

    def __init__(self, service_rate: float):
        if not service_rate > 0:
            raise ValueError("service_rate must be positive")
        self.service_rate = float(service_rate)
        self.busy_until = 0.0

    def enqueue(self, request_time: float, service_times) -> np.ndarray:
        """Append chunks with the given service durations; return completion times."""
        service_times = np.asarray(service_times, dtype=float)
        if service_times.size == 0:
            return service_times
        start = max(request_time, self.busy_until)
        done = start + np.cumsum(service_times)
        self.busy_until = float(done[-1])
        return done


def enqueue_request(server: FifoServer, request_time: float, uncached_chunks: int,
                    rng: np.random.Generator) -> np.ndarray:
    if uncached_chunks < 0:
        raise ValueError("uncached_chunks must be >= 0")
    draws = rng.exponential(1.0 / server.service_rate, uncached_chunks)
    return server.enqueue(request_time, draws)


@dataclass(frozen=True)
class DownloadTimeline:
    request_time: float
    per_chunk_ready: np.ndarray
    from_cache: np.ndarray

    @classmethod
    def build(cls, request_time: float, n_chunks: int, n_cached: int,
              completions) -> "DownloadTimeline":
        """Cached prefix is ready at ``request_time``; the rest at ``completions``."""
        completions = np.asarray(completions, dtype=float)
        if completions.size != n_chunks - n_cached:
            raise ValueError("need one completion time per uncached chunk")
        ready = np.concatenate([np.full(n_cached, float(request_time)), completions])
        from_cache = np.arange(n_chunks) < n_cached
        return cls(float(request_time), ready, from_cache)

    @property
    def offsets(self) -> np.ndarray:
        return self.per_chunk_ready - self.request_time


def download_time(timeline: DownloadTimeline) -> float:
    if timeline.per_chunk_ready.size == 0:
        return 0.0
    return float(timeline.per_chunk_ready.max() - timeline.request_time)


def stall_duration(timeline: DownloadTimeline, d_s: float, L: float) -> float:
    """Playback delay beyond the ideal schedule d_s + (s-1) L.

    Chunk k plays at max(play(k-1) + L, ready(k)) and the first one no
    earlier than the start-up delay.
    """
    ready = timeline.offsets
    s = ready.size
    if s == 0:
        return 0.0
    play = max(d_s, ready[0])
    for k in range(1, s):
        play = max(play + L, ready[k])
    return max(0.0, float(play - (d_s + (s - 1) * L)))


def stall_from_offsets(offsets, first_index: int, d_s: float, L: float) -> float:
    """Closed form of :func:`stall_duration` for uncached chunks only.

    ``offsets`` are ready times (relative to the request) of chunks
    ``first_index, first_index + 1, ...``; earlier chunks are ready at 0.
    Unrolling the recursion gives max(0, max_k(ready_k - k L) - d_s) with
    0-based k.
    """
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size == 0:
        return 0.0
    k = np.arange(first_index, first_index + offsets.size)
    return max(0.0, float(np.max(offsets - k * L)) - d_s)
