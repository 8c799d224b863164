import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glru.delivery import (DownloadTimeline, FifoServer, ServiceConfig, download_time,
                           enqueue_request, stall_duration, stall_from_offsets)


def test_service_rate():
    cfg = ServiceConfig(chunk_len_s=2.0, processing_rate_MBps=10.0)
    assert cfg.service_rate_chunks_per_s == pytest.approx(10 / (3.13 * 2))


def test_service_config_rejects():
    with pytest.raises(ValueError):
        ServiceConfig(chunk_len_s=0)
    with pytest.raises(ValueError):
        ServiceConfig(startup_delay_s=-1)


def test_fully_cached_request():
    tl = DownloadTimeline.build(5.0, 4, 4, [])
    assert download_time(tl) == 0.0
    assert stall_duration(tl, 3.0, 2.0) == 0.0


def test_worked_stall_example():
    # play starts at 4, then 6, then chunk 3 arrives at 10 (ideal 8)
    tl = DownloadTimeline(0.0, np.array([0.0, 0.0, 10.0]), np.array([True, True, False]))
    assert stall_duration(tl, 4.0, 2.0) == pytest.approx(2.0)
    assert stall_from_offsets([10.0], 2, 4.0, 2.0) == pytest.approx(2.0)


def test_fifo_waits_for_backlog():
    srv = FifoServer(1.0)
    a = srv.enqueue(0.0, [2.0, 3.0])
    np.testing.assert_allclose(a, [2.0, 5.0])
    b = srv.enqueue(1.0, [1.0])
    np.testing.assert_allclose(b, [6.0])
    c = srv.enqueue(10.0, [0.5])
    np.testing.assert_allclose(c, [10.5])
    assert srv.busy_until == 10.5


def test_enqueue_request_mean():
    srv = FifoServer(4.0)
    rng = np.random.default_rng(0)
    done = enqueue_request(srv, 0.0, 100_000, rng)
    assert done[-1] / 100_000 == pytest.approx(0.25, rel=0.02)


ready_st = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=15)


@settings(max_examples=200)
@given(ready_st, st.integers(0, 14), st.floats(0, 10), st.floats(0.1, 5))
def test_closed_form_matches_recursion(ready, cached, d_s, L):
    cached = min(cached, len(ready))
    ready = [0.0] * cached + ready[cached:]
    tl = DownloadTimeline(0.0, np.array(ready), np.arange(len(ready)) < cached)
    rec = stall_duration(tl, d_s, L)
    assert rec >= 0
    assert stall_from_offsets(ready[cached:], cached, d_s, L) == pytest.approx(rec, abs=1e-9)


@settings(max_examples=200)
@given(ready_st, st.integers(0, 14), st.floats(0, 20), st.floats(0, 10), st.floats(0.1, 5))
def test_stall_monotone_in_ready_times(ready, k, bump, d_s, L):
    ready = np.array(ready)
    later = ready.copy()
    later[min(k, ready.size - 1)] += bump
    base = stall_duration(DownloadTimeline(0.0, ready, ready < 0), d_s, L)
    worse = stall_duration(DownloadTimeline(0.0, later, later < 0), d_s, L)
    assert worse >= base - 1e-12


@settings(max_examples=200)
@given(ready_st, st.integers(0, 15), st.floats(0, 10), st.floats(0.1, 5))
def test_caching_never_hurts(ready, n_cached, d_s, L):
    ready = np.array(ready)
    cached = ready.copy()
    cached[:n_cached] = 0.0
    a = DownloadTimeline(0.0, ready, ready < 0)
    b = DownloadTimeline(0.0, cached, np.arange(ready.size) < n_cached)
    assert download_time(b) <= download_time(a)
    assert stall_duration(b, d_s, L) <= stall_duration(a, d_s, L) + 1e-12
