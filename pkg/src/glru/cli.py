"""Command-line entry point.

    glru validate  [--alpha A] [--n-files N] [--capacity C | --cp P] [--chunks c] ...
    glru sweep     [grid flags, comma-separated lists]
    glru correlate [grid flags]
    glru oracle    [--sizes 3,2,1] [--capacity C] [--policy lru|glru|both]
    glru fig1      [--alpha A] [--n-files N] [--capacity C] [--chunks c]

Settings resolve as command defaults < ``--config`` file < flags.  The
resolved settings are echoed to ``<out>/config.txt`` in the same
``key = value`` format accepted by ``--config``.

Exit status: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import analytic, experiments
from .cache import PolicyKind
from .catalog import (CORRELATION_MODES, FileCatalog, capacity_from_proportion,
                      make_zipf_popularity)
from .oracle import brute_force_oracle
from .simulate import METRICS, simulate_chunk_frequencies
from .workload import generate_trace

log = logging.getLogger("glru")

COMMANDS = ("validate", "sweep", "correlate", "oracle", "fig1")
GRID_KEYS = ("alpha", "cp", "d_s", "L", "rho", "r")


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: tuple = (0.8,)
    n_files: int = 1000
    capacity: int | None = None
    cp: tuple | None = None
    chunks: int | None = None
    pareto: tuple | None = None
    sizes: tuple | None = None
    d_s: tuple = (3.0,)
    L: tuple = (2.0,)
    rho: tuple = (0.5,)
    r: tuple = (10.0,)
    policy: str = "both"
    correlation: str = "independent"
    requests: int = 1_000_000
    seed: int = 0
    ranks: tuple = (1, 10, 100, 1000)
    warmup_factor: float = 2.0
    workers: int = 1
    max_j: int = 10
    out: str = "results"


def _floats(text) -> tuple:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text) -> tuple:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _opt(conv):
    return lambda text: None if str(text).strip().lower() in ("", "none") else conv(text)


# key -> parser from text; keys match RunConfig fields
_PARSERS = {
    "alpha": _floats, "n_files": int, "capacity": _opt(int), "cp": _opt(_floats),
    "chunks": _opt(int), "pareto": _opt(_floats), "sizes": _opt(_ints), "d_s": _floats,
    "L": _floats, "rho": _floats, "r": _floats, "policy": str, "correlation": str,
    "requests": int, "seed": int, "ranks": _ints, "warmup_factor": float, "workers": int,
    "max_j": int, "out": str,
}
_EXCLUSIVE = (("capacity", "cp"), ("chunks", "pareto", "sizes"))

_COMMAND_DEFAULTS = {
    "validate": {"capacity": 500, "chunks": 10},
    "sweep": {**{k: experiments.PARAMETER_GRID[k] for k in GRID_KEYS}, "pareto": (2.0, 300.0, 3600.0)},
    "correlate": {**{k: experiments.PARAMETER_GRID[k] for k in GRID_KEYS}, "pareto": (2.0, 300.0, 3600.0)},
    "oracle": {"sizes": (3, 2, 1), "capacity": 4, "alpha": (1.0,)},
    "fig1": {"n_files": 10000, "capacity": 1000, "chunks": 5},
}


def _normalize_key(key: str) -> str:
    k = key.strip().lstrip("-").replace("-", "_")
    aliases = {"chunk_len": "L", "startup_delay": "d_s", "rate": "r"}
    return aliases.get(k, k)


def read_config_file(path) -> dict:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _normalize_key(key)
        if key != "command" and key not in _PARSERS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glru", description="LRU/gLRU chunk cache experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat 'key = value' settings file")
    p.add_argument("--alpha", help="Zipf exponent(s)")
    p.add_argument("--n-files", dest="n_files")
    cap = p.add_mutually_exclusive_group()
    cap.add_argument("--capacity", help="cache size in chunks")
    cap.add_argument("--cp", help="cache size(s) as a fraction of all chunks")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--chunks", help="constant chunks per file")
    size.add_argument("--pareto", help="censored Pareto lengths: shape,scale,cap (seconds)")
    size.add_argument("--sizes", help="explicit chunk counts by rank, e.g. 3,2,1")
    p.add_argument("--chunk-len", dest="L", help="chunk length(s) L in seconds")
    p.add_argument("--startup-delay", dest="d_s", help="start-up delay(s) in seconds")
    p.add_argument("--rho", help="traffic intensity(ies)")
    p.add_argument("--rate", dest="r", help="processing rate(s) in MBps")
    p.add_argument("--policy", choices=("lru", "glru", "both"))
    p.add_argument("--correlation", choices=CORRELATION_MODES)
    p.add_argument("--requests", help="requests per run (measured, after warm-up)")
    p.add_argument("--seed")
    p.add_argument("--ranks", help="popularity ranks to validate")
    p.add_argument("--warmup-factor", dest="warmup_factor")
    p.add_argument("--workers")
    p.add_argument("--max-j", dest="max_j")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    raw: dict = {}
    if args.config:
        raw.update(read_config_file(args.config))
        cmd = raw.pop("command", args.command)
        if cmd != args.command:
            raise ConfigError(f"config file is for {cmd!r}, not {args.command!r}")
    flags = {k: v for k, v in vars(args).items() if k in _PARSERS and v is not None}
    # a flag for one member of an exclusive group overrides the file's choice
    for group in _EXCLUSIVE:
        if any(k in flags for k in group):
            for k in group:
                raw.pop(k, None)
    raw.update(flags)
    values = dict(_COMMAND_DEFAULTS[args.command])
    for group in _EXCLUSIVE:
        if any(k in raw for k in group):
            for k in group:
                values[k] = None
    for key, text in raw.items():
        try:
            values[key] = _PARSERS[key](text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
    cfg = RunConfig(command=args.command, **values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    def bad(msg):
        raise ConfigError(msg)

    if (cfg.capacity is None) == (cfg.cp is None):
        bad("set exactly one of capacity and cp")
    if cfg.cp is not None and not all(0 < v < 1 for v in cfg.cp):
        bad("cp values must lie in (0, 1)")
    if cfg.capacity is not None and cfg.capacity < 1:
        bad("capacity must be >= 1")
    if sum(v is not None for v in (cfg.chunks, cfg.pareto, cfg.sizes)) != 1:
        bad("set exactly one of chunks, pareto, sizes")
    if cfg.chunks is not None and cfg.chunks < 1:
        bad("chunks must be >= 1")
    if cfg.pareto is not None:
        if len(cfg.pareto) != 3:
            bad("pareto takes shape,scale,cap")
        shape, scale, cap = cfg.pareto
        if not (shape > 1 and scale > 0 and cap > scale):
            bad("pareto needs shape > 1, scale > 0, cap > scale")
    if cfg.sizes is not None:
        if not cfg.sizes or any(s < 1 for s in cfg.sizes):
            bad("sizes must be positive integers")
    if not cfg.alpha or any(a <= 0 for a in cfg.alpha):
        bad("alpha must be positive")
    if cfg.n_files < 1:
        bad("n_files must be >= 1")
    if any(not 0 < v < 1 for v in cfg.rho):
        bad("rho values must lie in (0, 1)")
    for key in ("d_s", "L", "r"):
        vals = getattr(cfg, key)
        if not vals or any(v < 0 if key == "d_s" else v <= 0 for v in vals):
            bad(f"invalid {key} values")
    if cfg.policy not in ("lru", "glru", "both"):
        bad(f"unknown policy {cfg.policy!r}")
    if cfg.correlation not in CORRELATION_MODES:
        bad(f"unknown correlation {cfg.correlation!r}")
    if cfg.requests < 1 and cfg.command != "oracle":
        bad("requests must be >= 1")
    if cfg.workers < 1 or cfg.max_j < 1 or cfg.warmup_factor < 1:
        bad("workers and max_j must be >= 1, warmup_factor >= 1")
    if cfg.command in ("validate", "fig1", "oracle"):
        if len(cfg.alpha) != 1:
            bad(f"{cfg.command} takes a single alpha")
        if cfg.cp is not None and len(cfg.cp) != 1:
            bad(f"{cfg.command} takes a single cp")
        if cfg.pareto is not None:
            bad(f"{cfg.command} needs fixed chunk counts (--chunks or --sizes)")
    if cfg.command in ("sweep", "correlate"):
        if cfg.cp is None:
            bad(f"{cfg.command} sizes the cache with --cp")
        if cfg.pareto is None:
            bad(f"{cfg.command} draws video lengths with --pareto")
    if cfg.command == "validate" and any(not 1 <= k <= cfg.n_files for k in cfg.ranks):
        bad("ranks must lie in 1..n_files")


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def echo_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        for f in fields(cfg):
            fh.write(f"{f.name} = {_fmt(getattr(cfg, f.name))}\n")


# --------------------------------------------------------------------------


def _catalog(cfg: RunConfig) -> FileCatalog:
    alpha = cfg.alpha[0]
    if cfg.sizes is not None:
        return FileCatalog(make_zipf_popularity(len(cfg.sizes), alpha), np.array(cfg.sizes))
    return FileCatalog.uniform(cfg.n_files, alpha, cfg.chunks)


def _capacity(cfg: RunConfig, cat: FileCatalog) -> int:
    if cfg.capacity is not None:
        return cfg.capacity
    return capacity_from_proportion(cat, cfg.cp[0])


def _policies(cfg: RunConfig):
    return [PolicyKind.LRU, PolicyKind.GLRU] if cfg.policy == "both" else [PolicyKind.parse(cfg.policy)]


def _grid(cfg: RunConfig, correlation: str):
    return experiments.parameter_grid(correlation, **{k: getattr(cfg, k) for k in GRID_KEYS})


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise InvariantError(msg)


def _check_sweep(sweep) -> None:
    for res in sweep.results:
        _check(len({rep.trace_digest for rep in res.reports.values()}) == 1,
               f"config {res.config_id}: policies saw different traces")
        for rep in res.reports.values():
            for m in ("p_c", "p_m", "p_d"):
                _check(0 <= rep.metric(m) <= 1, f"config {res.config_id}: {m} outside [0,1]")
            for m in ("T_w", "T_d"):
                _check(rep.metric(m) >= 0, f"config {res.config_id}: negative {m}")


def cmd_validate(cfg: RunConfig, out: str) -> list[str]:
    cat = _catalog(cfg)
    cap = _capacity(cfg, cat)
    results = experiments.validate_approximation(cat, cap, cfg.requests, cfg.ranks, rng_seed=cfg.seed)
    for res in results:
        _check(abs(res.analytic.sum() - 1) < 1e-9, f"rank {res.rank}: analytic law does not sum to 1")
    experiments.write_validation_csv(results, os.path.join(out, "validation.csv"))
    return [f"rank {r.rank:>6}: L1 = {r.l1:.4f} over {r.samples} requests" for r in results]


def cmd_fig1(cfg: RunConfig, out: str) -> list[str]:
    cat = _catalog(cfg)
    cap = _capacity(cfg, cat)
    curves = analytic.hit_curves(cat, cap)
    _check(bool(np.all(curves.glru_full <= curves.glru_any + 1e-15)), "gLRU full-file above any-chunk")
    curves.to_csv(os.path.join(out, "fig1.csv"))
    for pol, solve in (("lru", analytic.solve_tc_lru), ("glru", analytic.solve_tc_glru)):
        analytic.model_to_csv(solve(cat, cap), os.path.join(out, f"model_{pol}.csv"), cfg.max_j)
    return [f"{cat.n_files} files, capacity {cap}: rank-1 any-chunk LRU {curves.lru_any[0]:.4f}, "
            f"gLRU {curves.glru_any[0]:.4f}, gLRU full {curves.glru_full[0]:.4f}"]


def cmd_oracle(cfg: RunConfig, out: str) -> list[str]:
    cat = _catalog(cfg)
    cap = _capacity(cfg, cat)
    lines = []
    rows = []
    for pol in _policies(cfg):
        res = brute_force_oracle(cat, cap, pol)
        for m in res.marginals:
            _check(abs(m.sum() - 1) < 1e-9, "oracle marginal does not sum to 1")
        rows.append(res)
        lines.append(f"{pol.value}: {len(res.states)} states, {res.iterations} iterations")
        if cfg.requests > 0:
            trace = generate_trace(cat, 1.0, cfg.requests, cfg.seed)
            freq = simulate_chunk_frequencies(cat, pol, cap, trace.files,
                                              warmup=min(1000, cfg.requests // 10))
            gap = max(float(np.abs(a - b).max()) for a, b in zip(freq, res.marginals))
            lines.append(f"{pol.value}: simulation vs oracle max abs difference {gap:.5f}")
            with open(os.path.join(out, f"oracle_check_{pol.value}.csv"), "w") as fh:
                fh.write("rank,j,oracle,simulated\n")
                for i, (o, s) in enumerate(zip(res.marginals, freq)):
                    for j, (a, b) in enumerate(zip(o, s)):
                        fh.write(f"{i + 1},{j},{float(a)!r},{float(b)!r}\n")
    width = max(int(s) for s in cat.chunks) + 1
    with open(os.path.join(out, "oracle.csv"), "w") as fh:
        fh.write(",".join(["policy", "rank", "s"] + [f"p{j}" for j in range(width)]) + "\n")
        for res in rows:
            for i, m in enumerate(res.marginals):
                vals = [repr(float(p)) for p in m] + [""] * (width - m.size)
                fh.write(",".join([res.policy.value, str(i + 1), str(m.size - 1)] + vals) + "\n")
    return lines


def _summary_lines(sweep, label: str) -> list[str]:
    lines = [f"{label}: {len(sweep.results)} configurations"]
    for m, s in sweep.summary().items():
        lines.append(f"  {m:>3}: mean rel {s['mean_relative']:+.3f}  worst {s['worst_relative']:+.3f}"
                     f"  best {s['best_relative']:+.3f}  wins/ties/losses "
                     f"{s['wins']}/{s['ties']}/{s['losses']}")
    return lines


def cmd_sweep(cfg: RunConfig, out: str) -> list[str]:
    sweep = experiments.run_sweep(_grid(cfg, cfg.correlation), n_files=cfg.n_files,
                                  n_requests=cfg.requests, seed=cfg.seed,
                                  warmup_factor=cfg.warmup_factor, workers=cfg.workers,
                                  pareto=cfg.pareto)
    _check_sweep(sweep)
    experiments.write_sweep_csvs(sweep, out)
    return _summary_lines(sweep, f"sweep ({cfg.correlation})")


def cmd_correlate(cfg: RunConfig, out: str) -> list[str]:
    res = experiments.correlation_study(_grid(cfg, "independent"), n_files=cfg.n_files,
                                        n_requests=cfg.requests, seed=cfg.seed,
                                        warmup_factor=cfg.warmup_factor, workers=cfg.workers,
                                        pareto=cfg.pareto)
    _check_sweep(res.positive)
    _check_sweep(res.negative)
    experiments.write_correlation_csvs(res, out)
    lines = ["mean (positive - negative) / negative:"]
    lines += [f"  {m:>3}: gLRU {res.pos_vs_neg['glru'][m]:+.3f}  LRU {res.pos_vs_neg['lru'][m]:+.3f}"
              for m in METRICS]
    lines.append("mean relative change gLRU vs LRU:")
    lines += [f"  {m:>3}: positive {res.glru_gain['positive'][m]:+.3f}  "
              f"negative {res.glru_gain['negative'][m]:+.3f}" for m in METRICS]
    return lines


_DISPATCH = {"validate": cmd_validate, "sweep": cmd_sweep, "correlate": cmd_correlate,
             "oracle": cmd_oracle, "fig1": cmd_fig1}


def run(cfg: RunConfig) -> int:
    try:
        os.makedirs(cfg.out, exist_ok=True)
        echo_config(cfg, os.path.join(cfg.out, "config.txt"))
        lines = _DISPATCH[cfg.command](cfg, cfg.out)
        with open(os.path.join(cfg.out, "summary.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except InvariantError as exc:
        log.error("invariant violated: %s", exc)
        return 2
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        log.error("%s failed: %s", cfg.command, exc)
        return 2
    print("\n".join(lines))
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        log.error("%s", exc)
        return 1
    except SystemExit as exc:  # argparse usage errors
        return 1 if exc.code else 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
