"""Poisson request traces over a file catalog."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass

import numpy as np

from .catalog import FileCatalog


@dataclass(frozen=True)
class RequestTrace:
    times: np.ndarray
    files: np.ndarray
    total_rate: float

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def digest(self) -> str:
        """sha256 over the raw event arrays; equal digests mean identical traces."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.files, dtype="<i8").tobytes())
        return h.hexdigest()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "file_id"])
            w.writerows((repr(float(t)), int(f)) for t, f in zip(self.times, self.files))

    @classmethod
    def from_csv(cls, path, total_rate: float | None = None) -> "RequestTrace":
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, ndmin=1)
        times = np.asarray(data["t"], dtype=float)
        files = np.asarray(data["file_id"], dtype=np.int64)
        if np.any(np.diff(times) <= 0):
            raise ValueError(f"{path}: arrival times must be strictly increasing")
        if total_rate is None:
            total_rate = times.size / times[-1]
        return cls(times, files, float(total_rate))


def generate_trace(catalog: FileCatalog, total_rate: float, n_requests: int,
                   rng_seed: int | None = 0) -> RequestTrace:
    """Poisson arrivals at ``total_rate``; each request picks file i w.p. q_i / sum q."""
    if not total_rate > 0:
        raise ValueError("total_rate must be positive")
    if n_requests < 1:
        raise ValueError("n_requests must be >= 1")
    rng = np.random.default_rng(rng_seed)
    gaps = rng.exponential(1.0 / total_rate, n_requests)
    times = np.cumsum(gaps)
    # inverse-CDF sampling keeps file ids independent of the arrival stream
    cdf = np.cumsum(catalog.request_probabilities)
    cdf[-1] = 1.0
    files = np.searchsorted(cdf, rng.random(n_requests), side="right").astype(np.int64)
    return RequestTrace(times, files, float(total_rate))


def rate_for_intensity(catalog: FileCatalog, rho: float, service_rate_chunks_per_s: float) -> float:
    """Aggregate request rate giving offered chunk load / service rate = rho."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if not service_rate_chunks_per_s > 0:
        raise ValueError("service rate must be positive")
    return rho * service_rate_chunks_per_s / catalog.mean_chunks_per_request
