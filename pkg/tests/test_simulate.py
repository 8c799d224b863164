import numpy as np
import pytest

from glru.analytic import chunk_distribution, solve_tc_glru
from glru.cache import ChunkCache, PolicyKind
from glru.catalog import FileCatalog, make_vod_catalog
from glru.delivery import ServiceConfig
from glru.simulate import (fill_index, metrics_from_records, run_simulation,
                           simulate_chunk_frequencies, simulate_hits)
from glru.workload import RequestTrace, generate_trace, rate_for_intensity


@pytest.fixture(scope="module")
def setup():
    cat = make_vod_catalog(150, 0.8, 2.0, rng_seed=7)
    svc = ServiceConfig(2.0, 10.0, 3.0)
    rate = rate_for_intensity(cat, 0.7, svc.service_rate_chunks_per_s)
    trace = generate_trace(cat, rate, 20_000, rng_seed=8)
    return cat, svc, trace, int(0.1 * cat.total_chunks)


@pytest.mark.parametrize("policy", ["lru", "glru"])
@pytest.mark.parametrize("eviction", ["chunk", "file"])
def test_engines_agree(setup, policy, eviction):
    cat, svc, trace, cap = setup
    fast, rf = run_simulation(cat, policy, cap, trace, svc, service_seed=5, eviction=eviction)
    slow, rs = run_simulation(cat, policy, cap, trace, svc, service_seed=5, eviction=eviction,
                              engine="python", check_every=97)
    np.testing.assert_array_equal(rf.chunks_hit, rs.chunks_hit)
    np.testing.assert_allclose(rf.download_time, rs.download_time, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(rf.stall, rs.stall, rtol=1e-12, atol=1e-12)
    assert fast.as_dict() == pytest.approx(slow.as_dict(), rel=1e-12)
    assert rf.warmup == rs.warmup


def test_metrics_recomputed_from_records(setup):
    cat, svc, trace, cap = setup
    rep, rec = run_simulation(cat, "glru", cap, trace, svc)
    sl = slice(rec.warmup, None)
    assert rep.p_c == pytest.approx(rec.chunks_hit[sl].sum() / rec.s[sl].sum())
    assert rep.p_m == pytest.approx(np.mean(rec.chunks_hit[sl] == 0))
    assert rep.T_w == pytest.approx(rec.download_time[sl].mean())
    assert rep.T_d == pytest.approx(rec.stall[sl].mean())
    assert rep.p_d == pytest.approx(np.mean(rec.stall[sl] > 1e-12))
    assert rep.n_requests == len(trace) - rec.warmup
    assert rep.trace_digest == trace.digest
    assert 0 <= rep.p_c <= 1 and 0 <= rep.p_m <= 1 and 0 <= rep.p_d <= 1
    assert rep.T_w >= 0 and rep.T_d >= 0
    assert all(np.isfinite(v) and v >= 0 for v in rep.stderr.values())


def test_cached_requests_have_no_delay(setup):
    cat, svc, trace, cap = setup
    _, rec = run_simulation(cat, "lru", cap, trace, svc)
    full = rec.chunks_hit == rec.s
    assert full.any()
    assert np.all(rec.download_time[full] == 0) and np.all(rec.stall[full] == 0)


def test_shared_service_draws_make_cache_help(setup):
    cat, svc, trace, cap = setup
    small, _ = run_simulation(cat, "glru", cap // 4, trace, svc, warmup=2000)
    big, _ = run_simulation(cat, "glru", cap, trace, svc, warmup=2000)
    assert big.p_c > small.p_c


def test_unit_chunk_catalog_policies_identical():
    cat = FileCatalog.uniform(50, 0.8, 1)
    svc = ServiceConfig()
    trace = generate_trace(cat, 0.2, 5000, rng_seed=2)
    a, ra = run_simulation(cat, "lru", 10, trace, svc)
    b, rb = run_simulation(cat, "glru", 10, trace, svc)
    np.testing.assert_array_equal(ra.chunks_hit, rb.chunks_hit)
    assert a.as_dict() == b.as_dict()


def test_single_requested_file_fully_cached():
    cat = FileCatalog(np.array([1.0, 0.5]), np.array([5, 5]))
    trace = RequestTrace(np.arange(1.0, 101.0), np.zeros(100, dtype=np.int64), 1.0)
    for pol in ("lru", "glru"):
        rep, _ = run_simulation(cat, pol, 5, trace, ServiceConfig())
        assert rep.p_c == 1.0 and rep.T_w == 0.0


def test_tiny_cache_rarely_hits():
    cat = FileCatalog.uniform(100, 0.8, 50)
    trace = generate_trace(cat, 0.01, 5000, rng_seed=1)
    rep, _ = run_simulation(cat, "glru", 1, trace, ServiceConfig())
    assert rep.p_c < 0.02


def test_fill_index():
    assert fill_index(np.array([1, 1, 1, 1]), 3) == 3
    assert fill_index(np.array([5, 1]), 3) == 1
    assert fill_index(np.array([1, 1]), 10) == 2


def test_rejects_whole_catalog_capacity(setup):
    cat, svc, trace, _ = setup
    with pytest.raises(ValueError):
        run_simulation(cat, "lru", cat.total_chunks, trace, svc)
    with pytest.raises(ValueError):
        run_simulation(cat, "lru", 10, trace, svc, engine="gpu")


def test_steady_occupancy_matches_capacity(setup):
    cat, _, trace, cap = setup
    cache = ChunkCache(cap, cat.chunks)
    for k, f in enumerate(trace.files.tolist()):
        cache.request(f, PolicyKind.GLRU)
        if cache.inserted >= cap:
            assert cache.occupancy == cap


def test_simulate_hits_matches_records(setup):
    cat, svc, trace, cap = setup
    hits, fill = simulate_hits(cat, "glru", cap, trace.files)
    _, rec = run_simulation(cat, "glru", cap, trace, svc)
    np.testing.assert_array_equal(hits, rec.chunks_hit)
    assert fill == rec.warmup


def test_chunk_frequencies_match_brute_force():
    cat = FileCatalog(np.array([1.0, 0.6, 0.3]), np.array([3, 2, 2]))
    files = np.random.default_rng(0).choice(3, 400, p=cat.request_probabilities)
    freqs = simulate_chunk_frequencies(cat, "glru", 4, files, warmup=50)
    cache = ChunkCache(4, cat.chunks)
    counts = [np.zeros(s + 1) for s in cat.chunks]
    for k, f in enumerate(files.tolist()):
        cache.request(f, PolicyKind.GLRU)
        if k >= 50:
            for g in range(3):
                counts[g][cache.lookup(g)] += 1
    for got, c in zip(freqs, counts):
        np.testing.assert_allclose(got, c / 350)


def test_approximation_roughly_right():
    cat = FileCatalog.uniform(500, 0.8, 5)
    trace = generate_trace(cat, 1.0, 200_000, rng_seed=3)
    hits, fill = simulate_hits(cat, "glru", 250, trace.files)
    model = solve_tc_glru(cat, 250)
    found = hits[fill:][trace.files[fill:] == 0]
    emp = np.bincount(found, minlength=6) / found.size
    assert np.abs(emp - chunk_distribution(model, 0).probs).sum() < 0.1


def test_records_csv(setup, tmp_path):
    cat, svc, trace, cap = setup
    rep, rec = run_simulation(cat, "lru", cap, trace, svc)
    rec.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "t,file,s,chunks_hit,download_time,stall,stalled_flag"
    assert len(lines) == len(trace) + 1
    again = metrics_from_records(rec)
    assert again.as_dict() == rep.as_dict()
