"""
Exact stationary law for a tiny cache
=====================================

Three files of 3, 2 and 1 chunks share a 4-chunk cache.  The reachable
cache states form a small Markov chain, so its stationary law can be
computed exactly and compared with a long simulation.
"""

import numpy as np

from glru import FileCatalog, brute_force_oracle, generate_trace
from glru.catalog import make_zipf_popularity
from glru.simulate import simulate_chunk_frequencies

cat = FileCatalog(make_zipf_popularity(3, 1.0), np.array([3, 2, 1]))
trace = generate_trace(cat, 1.0, 200_000, rng_seed=1)

for policy in ("lru", "glru"):
    exact = brute_force_oracle(cat, 4, policy)
    sim = simulate_chunk_frequencies(cat, policy, 4, trace.files, warmup=100)
    print(f"\n{policy}: {len(exact.states)} reachable states")
    for rank, (p, q) in enumerate(zip(exact.marginals, sim), 1):
        print(f"  rank {rank}  exact {np.round(p, 4)}  simulated {np.round(q, 4)}")
