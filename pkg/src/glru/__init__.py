"""Chunk-granular LRU and gLRU caches: simulation and characteristic-time analysis."""

from .analytic import (ApproxModel, ChunkDistribution, chunk_distribution, hit_curves,
                       hit_at_least_j, lru_hit_probability, solve_tc_glru, solve_tc_lru)
from .cache import ChunkCache, PolicyKind, RequestOutcome
from .catalog import (FileCatalog, capacity_from_proportion, chunkize, couple_popularity_size,
                      make_censored_pareto_lengths, make_vod_catalog, make_zipf_popularity)
from .delivery import (DownloadTimeline, FifoServer, ServiceConfig, download_time,
                       enqueue_request, stall_duration)
from .experiments import (VodConfig, compare_policies, correlation_study, run_sweep,
                          parameter_grid, validate_approximation)
from .oracle import brute_force_oracle
from .simulate import MetricsReport, SimulationRecords, run_simulation
from .workload import RequestTrace, generate_trace, rate_for_intensity

__version__ = "0.1.0"
