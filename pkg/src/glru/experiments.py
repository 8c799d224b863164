"""Experiment drivers: approximation validation, policy sweeps, correlation study."""

from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytic import chunk_distribution, solve_tc_glru
from .cache import PolicyKind
from .catalog import (CORRELATION_MODES, FileCatalog, capacity_from_proportion,
                      make_censored_pareto_lengths, make_vod_catalog)
from .delivery import ServiceConfig
from .simulate import (METRIC_SENSE, METRICS, MetricsReport, SimulationRecords,
                       metrics_from_records, run_simulation, simulate_hits)
from .workload import generate_trace, rate_for_intensity

# parameter values of the VoD study
PARAMETER_GRID = {
    "alpha": (0.8, 1.2),
    "cp": (0.1, 0.2),
    "d_s": (3.0, 4.0),
    "L": (1.0, 2.0, 3.0, 4.0),
    "rho": (0.1, 0.5, 0.9),
    "r": (1.0, 2.0, 10.0, 30.0),
}
GRID_DEFAULTS = {"alpha": 0.8, "cp": 0.1, "d_s": 3.0, "L": 2.0, "rho": 0.5, "r": 10.0}

# 16-configuration desk-scale subset used by the acceptance suite
DESK_GRID = {
    "alpha": (0.8, 1.2),
    "cp": (0.1, 0.2),
    "d_s": (3.0,),
    "L": (2.0, 4.0),
    "rho": (0.5, 0.9),
    "r": (10.0,),
}

POLICIES = (PolicyKind.LRU, PolicyKind.GLRU)


def relative_difference(new: float, base: float) -> float:
    """(new - base) / base with 0/0 taken as 0."""
    if new == base:
        return 0.0
    if base == 0:
        return math.copysign(math.inf, new - base)
    return (new - base) / base


# --------------------------------------------------------------------------
# approximation validation


@dataclass
class ValidationResult:
    rank: int
    empirical: np.ndarray
    analytic: np.ndarray
    samples: int

    @property
    def l1(self) -> float:
        return float(np.abs(self.empirical - self.analytic).sum())


def validate_approximation(catalog: FileCatalog, capacity: int, n_requests: int,
                           ranks=(1, 10, 100, 1000), *, rng_seed=0, warmup: int | None = None):
    """Compare simulated gLRU chunk counts with the analytic distribution.

    The empirical law for a rank is the frequency of finding exactly j of
    its chunks cached at the instants it is requested, after warm-up.
    """
    ranks = [int(r) for r in ranks]
    for r in ranks:
        if not 1 <= r <= catalog.n_files:
            raise ValueError(f"rank {r} outside 1..{catalog.n_files}")
    model = solve_tc_glru(catalog, capacity)
    trace = generate_trace(catalog, 1.0, n_requests, rng_seed)
    hits, fill = simulate_hits(catalog, PolicyKind.GLRU, capacity, trace.files)
    start = fill if warmup is None else warmup
    files, hits = trace.files[start:], hits[start:]
    out = []
    for r in ranks:
        size = int(catalog.chunks[r - 1])
        found = hits[files == r - 1]
        counts = np.bincount(found, minlength=size + 1).astype(float)
        emp = counts / found.size if found.size else counts
        out.append(ValidationResult(r, emp, chunk_distribution(model, r - 1).probs, int(found.size)))
    return out


def write_validation_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "j", "empirical", "analytic"])
        for res in results:
            for j, (e, a) in enumerate(zip(res.empirical, res.analytic)):
                w.writerow([res.rank, j, repr(float(e)), repr(float(a))])


# --------------------------------------------------------------------------
# policy comparison


@dataclass(frozen=True)
class VodConfig:
    alpha: float = 0.8
    cp: float = 0.1
    d_s: float = 3.0
    L: float = 2.0
    rho: float = 0.5
    r: float = 10.0
    correlation: str = "independent"

    def __post_init__(self):
        if self.correlation not in CORRELATION_MODES:
            raise ValueError(f"unknown correlation mode {self.correlation!r}")


def parameter_grid(correlation: str = "independent", **axes) -> list[VodConfig]:
    """Cartesian product of parameter values; unspecified axes use all listed values."""
    unknown = set(axes) - set(PARAMETER_GRID)
    if unknown:
        raise ValueError(f"unknown grid axes {sorted(unknown)}")
    values = {k: tuple(axes.get(k, PARAMETER_GRID[k])) for k in PARAMETER_GRID}
    return [VodConfig(*combo, correlation=correlation) for combo in itertools.product(*values.values())]


@dataclass
class ComparisonRow:
    config_id: int
    metric: str
    lru: float
    glru: float

    @property
    def gross(self) -> float:
        return self.glru - self.lru

    @property
    def relative(self) -> float:
        return relative_difference(self.glru, self.lru)


@dataclass
class ConfigResult:
    config_id: int
    config: VodConfig
    capacity: int
    reports: dict
    trace_digest: str

    @property
    def rows(self) -> list[ComparisonRow]:
        lru, glru = self.reports["lru"], self.reports["glru"]
        return [ComparisonRow(self.config_id, m, lru.metric(m), glru.metric(m)) for m in METRICS]

    def noise(self, metric: str) -> float:
        """Combined batch-means standard error of the two policies' values."""
        e = [self.reports[p].stderr.get(metric, float("nan")) for p in ("lru", "glru")]
        return float(math.hypot(*e))


def compare_policies(config: VodConfig, *, n_files: int = 1000, n_requests: int = 200_000,
                     seed: int = 0, lengths=None, warmup_factor: float = 2.0,
                     eviction: str = "chunk", config_id: int = 0,
                     pareto=(2.0, 300.0, 3600.0)) -> ConfigResult:
    """Simulate LRU and gLRU on one configuration with shared randomness.

    Both policies replay the same trace and the same per-chunk service
    draws.  Metrics cover ``n_requests`` requests starting at
    ``warmup_factor`` times the later of the two cache-fill points.
    """
    if lengths is None:
        lengths = make_censored_pareto_lengths(n_files, *pareto, rng_seed=[seed, 0])
    cat = make_vod_catalog(n_files, config.alpha, config.L, lengths=lengths,
                           correlation=config.correlation)
    capacity = capacity_from_proportion(cat, config.cp)
    service = ServiceConfig(config.L, config.r, config.d_s)
    rate = rate_for_intensity(cat, config.rho, service.service_rate_chunks_per_s)
    lead = int(4 * warmup_factor * capacity)
    while True:
        trace = generate_trace(cat, rate, lead + n_requests, rng_seed=[seed, 1])
        runs = {p.value: run_simulation(cat, p, capacity, trace, service,
                                        service_seed=[seed, 2], eviction=eviction)[1]
                for p in POLICIES}
        start = int(math.ceil(warmup_factor * max(rec.warmup for rec in runs.values())))
        if start + n_requests <= len(trace):
            break
        lead *= 2
    tag = {"config_id": config_id, **asdict(config), "capacity": capacity,
           "n_files": n_files, "seed": seed}
    reports = {}
    for name, rec in runs.items():
        cut = _truncate(rec, start + n_requests)
        reports[name] = metrics_from_records(cut, start, config={**tag, "policy": name},
                                             trace_digest=trace.digest)
    return ConfigResult(config_id, config, capacity, reports, trace.digest)


def _truncate(rec: SimulationRecords, stop: int) -> SimulationRecords:
    return SimulationRecords(rec.t[:stop], rec.file[:stop], rec.s[:stop], rec.chunks_hit[:stop],
                             rec.download_time[:stop], rec.stall[:stop], rec.warmup)


def _compare_job(args):
    config, kwargs = args
    return compare_policies(config, **kwargs)


@dataclass
class SweepResult:
    results: list
    correlation: str = "independent"

    @property
    def rows(self) -> list[ComparisonRow]:
        return [row for res in self.results for row in res.rows]

    def values(self, metric: str, kind: str = "relative") -> np.ndarray:
        return np.array([getattr(r, kind) for r in self.rows if r.metric == metric])

    def histograms(self, bins: int = 20) -> dict:
        """{(kind, metric): (counts, edges)} over finite differences."""
        out = {}
        for kind in ("relative", "gross"):
            for m in METRICS:
                v = self.values(m, kind)
                v = v[np.isfinite(v)]
                out[kind, m] = np.histogram(v, bins=bins) if v.size else (np.zeros(0), np.zeros(1))
        return out

    def summary(self) -> dict:
        """Worst, best and mean improvement of gLRU over LRU per metric.

        Wins and losses only count differences larger than twice the
        combined standard error; the rest are ties.
        """
        out = {}
        for m in METRICS:
            sense = METRIC_SENSE[m]
            rel = self.values(m, "relative")
            gross = self.values(m, "gross")
            finite = rel[np.isfinite(rel)]
            pick_best, pick_worst = (np.max, np.min) if sense > 0 else (np.min, np.max)
            wins = losses = 0
            for res in self.results:
                row = next(r for r in res.rows if r.metric == m)
                margin = 2 * res.noise(m)
                if sense * row.gross > margin:
                    wins += 1
                elif sense * row.gross < -margin:
                    losses += 1
            out[m] = {
                "worst_relative": float(pick_worst(finite)) if finite.size else float("nan"),
                "worst_gross": float(pick_worst(gross)),
                "best_relative": float(pick_best(finite)) if finite.size else float("nan"),
                "best_gross": float(pick_best(gross)),
                "mean_relative": float(finite.mean()) if finite.size else float("nan"),
                "mean_gross": float(gross.mean()),
                "wins": wins,
                "ties": len(self.results) - wins - losses,
                "losses": losses,
            }
        return out


def run_sweep(configs, *, n_files: int = 1000, n_requests: int = 200_000, seed: int = 0,
              resample_catalog: bool = False, warmup_factor: float = 2.0,
              eviction: str = "chunk", workers: int = 1,
              pareto=(2.0, 300.0, 3600.0)) -> SweepResult:
    """Run :func:`compare_policies` over every configuration.

    Video lengths are drawn once from ``seed`` and reused by every
    configuration unless ``resample_catalog`` is set, in which case each
    configuration gets its own draw.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("empty parameter grid")
    modes = {c.correlation for c in configs}
    shared = None
    if not resample_catalog:
        shared = make_censored_pareto_lengths(n_files, *pareto, rng_seed=[seed, 0])
    jobs = []
    for i, cfg in enumerate(configs):
        lengths = shared if shared is not None else make_censored_pareto_lengths(
            n_files, *pareto, rng_seed=[seed, 0, i])
        jobs.append((cfg, dict(n_files=n_files, n_requests=n_requests, seed=seed,
                               lengths=lengths, warmup_factor=warmup_factor,
                               eviction=eviction, config_id=i)))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_compare_job, jobs))
    else:
        results = [_compare_job(j) for j in jobs]
    return SweepResult(results, modes.pop() if len(modes) == 1 else "mixed")


_CONFIG_COLS = ["alpha", "cp", "d_s", "L", "rho", "r", "correlation"]


def write_sweep_csvs(sweep: SweepResult, out_dir, prefix: str = "") -> None:
    os.makedirs(out_dir, exist_ok=True)
    join = lambda name: os.path.join(out_dir, prefix + name)  # noqa: E731
    with open(join("sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_id"] + _CONFIG_COLS + ["capacity", "policy", "metric", "value",
                                                   "stderr", "n_requests", "warmup", "trace_digest"])
        for res in sweep.results:
            cfg = asdict(res.config)
            for pol in ("lru", "glru"):
                rep: MetricsReport = res.reports[pol]
                for m in METRICS:
                    w.writerow([res.config_id] + [cfg[c] for c in _CONFIG_COLS]
                               + [res.capacity, pol, m, repr(rep.metric(m)), repr(rep.stderr[m]),
                                  rep.n_requests, rep.warmup, rep.trace_digest])
    with open(join("comparison.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_id"] + _CONFIG_COLS + ["metric", "lru", "glru", "relative", "gross"])
        for res in sweep.results:
            cfg = asdict(res.config)
            for row in res.rows:
                w.writerow([res.config_id] + [cfg[c] for c in _CONFIG_COLS]
                           + [row.metric, repr(row.lru), repr(row.glru), repr(row.relative),
                              repr(row.gross)])
    with open(join("histograms.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "metric", "bin_lo", "bin_hi", "count"])
        for (kind, m), (counts, edges) in sweep.histograms().items():
            for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
                w.writerow([kind, m, repr(float(lo)), repr(float(hi)), int(c)])
    summary = sweep.summary()
    with open(join("summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        keys = list(next(iter(summary.values())))
        w.writerow(["metric"] + keys)
        for m, vals in summary.items():
            w.writerow([m] + [repr(vals[k]) if isinstance(vals[k], float) else vals[k] for k in keys])


# --------------------------------------------------------------------------
# popularity-size correlation


@dataclass
class CorrelationResult:
    positive: SweepResult
    negative: SweepResult
    pos_vs_neg: dict = field(default_factory=dict)
    glru_gain: dict = field(default_factory=dict)
    excluded: dict = field(default_factory=dict)

    def differences(self, policy: str, metric: str) -> np.ndarray:
        """Negative-minus-positive metric per configuration."""
        return np.array([n.reports[policy].metric(metric) - p.reports[policy].metric(metric)
                         for p, n in zip(self.positive.results, self.negative.results)])


def correlation_study(configs, *, n_files: int = 1000, n_requests: int = 200_000, seed: int = 0,
                      warmup_factor: float = 2.0, workers: int = 1,
                      pareto=(2.0, 300.0, 3600.0)) -> CorrelationResult:
    """Rerun a grid with popularity and size positively, then negatively paired.

    ``pos_vs_neg[policy][metric]`` is the mean over configurations of
    (positive - negative) / negative; ``glru_gain[mode][metric]`` the mean
    relative change of gLRU over LRU.  Non-finite ratios (a zero negative
    value) are left out of the means and counted in ``excluded``.
    """
    base = [VodConfig(**{**asdict(c), "correlation": "independent"}) for c in configs]
    kw = dict(n_files=n_files, n_requests=n_requests, seed=seed, warmup_factor=warmup_factor,
              workers=workers, pareto=pareto)
    sweeps = {}
    for mode in ("positive", "negative"):
        grid = [VodConfig(**{**asdict(c), "correlation": mode}) for c in base]
        sweeps[mode] = run_sweep(grid, **kw)
    res = CorrelationResult(sweeps["positive"], sweeps["negative"])
    for pol in ("glru", "lru"):
        res.pos_vs_neg[pol] = {}
        for m in METRICS:
            ratios = np.array([relative_difference(p.reports[pol].metric(m), n.reports[pol].metric(m))
                               for p, n in zip(res.positive.results, res.negative.results)])
            ok = np.isfinite(ratios)
            res.pos_vs_neg[pol][m] = float(ratios[ok].mean()) if ok.any() else float("nan")
            res.excluded[pol, m] = int((~ok).sum())
    for mode, sweep in sweeps.items():
        res.glru_gain[mode] = {}
        for m in METRICS:
            v = sweep.values(m)
            v = v[np.isfinite(v)]
            res.glru_gain[mode][m] = float(v.mean()) if v.size else float("nan")
    return res


def write_correlation_csvs(res: CorrelationResult, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_sweep_csvs(res.positive, out_dir, prefix="positive_")
    write_sweep_csvs(res.negative, out_dir, prefix="negative_")
    with open(os.path.join(out_dir, "correlation_pos_vs_neg.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "glru", "lru", "glru_excluded", "lru_excluded"])
        for m in METRICS:
            w.writerow([m, repr(res.pos_vs_neg["glru"][m]), repr(res.pos_vs_neg["lru"][m]),
                        res.excluded["glru", m], res.excluded["lru", m]])
    with open(os.path.join(out_dir, "correlation_glru_gain.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "positive", "negative"])
        for m in METRICS:
            w.writerow([m, repr(res.glru_gain["positive"][m]), repr(res.glru_gain["negative"][m])])
    with open(os.path.join(out_dir, "correlation_histograms.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["policy", "metric", "bin_lo", "bin_hi", "count"])
        for pol in ("glru", "lru"):
            for m in METRICS:
                counts, edges = np.histogram(res.differences(pol, m), bins=20)
                for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
                    w.writerow([pol, m, repr(float(lo)), repr(float(hi)), int(c)])
