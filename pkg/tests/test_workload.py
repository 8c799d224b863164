import numpy as np
import pytest
from scipy import stats

from glru.catalog import FileCatalog
from glru.workload import RequestTrace, generate_trace, rate_for_intensity


@pytest.fixture(scope="module")
def big_trace():
    cat = FileCatalog.uniform(100, 0.8, 3)
    return cat, generate_trace(cat, 2.5, 1_000_000, rng_seed=11)


def test_mean_gap(big_trace):
    _, tr = big_trace
    gaps = np.diff(np.concatenate([[0.0], tr.times]))
    assert abs(gaps.mean() - 1 / 2.5) / (1 / 2.5) < 0.01


def test_file_frequencies(big_trace):
    # with 100 files and 1e6 draws the chance-level L1 is about 0.007
    cat, tr = big_trace
    freq = np.bincount(tr.files, minlength=cat.n_files) / len(tr)
    assert np.abs(freq - cat.request_probabilities).sum() < 0.01


def test_per_file_gaps_exponential(big_trace):
    cat, tr = big_trace
    for f in (0, 9):
        times = tr.times[tr.files == f]
        rate = 2.5 * cat.request_probabilities[f]
        res = stats.kstest(np.diff(times), "expon", args=(0, 1 / rate))
        assert res.pvalue > 0.001


def test_times_increase_and_seeded():
    cat = FileCatalog.uniform(10, 1.0, 2)
    a = generate_trace(cat, 1.0, 500, rng_seed=3)
    b = generate_trace(cat, 1.0, 500, rng_seed=3)
    assert np.all(np.diff(a.times) > 0)
    assert a.digest == b.digest
    assert a.digest != generate_trace(cat, 1.0, 500, rng_seed=4).digest


def test_trace_csv_roundtrip(tmp_path):
    cat = FileCatalog.uniform(10, 1.0, 2)
    tr = generate_trace(cat, 1.0, 200, rng_seed=1)
    tr.to_csv(tmp_path / "t.csv")
    back = RequestTrace.from_csv(tmp_path / "t.csv", total_rate=1.0)
    np.testing.assert_array_equal(back.times, tr.times)
    np.testing.assert_array_equal(back.files, tr.files)
    assert back.digest == tr.digest


def test_rate_for_intensity():
    cat = FileCatalog(np.array([1.0, 1.0]), np.array([2, 4]))
    # E[s] = 3 chunks, mu = 6 chunks/s: rho 0.5 -> 1 request/s
    assert rate_for_intensity(cat, 0.5, 6.0) == pytest.approx(1.0)
    for rho in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            rate_for_intensity(cat, rho, 6.0)
