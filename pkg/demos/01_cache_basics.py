"""
LRU and gLRU on a handful of requests
=====================================

Both caches count capacity in chunks.  LRU stores a requested file
whole, gLRU adds one more chunk per request.  Eviction trims the least
recently used entry chunk by chunk.
"""

from glru import ChunkCache, PolicyKind

sizes = [4, 3, 2]          # chunks of files 0, 1, 2
trace = [0, 1, 0, 2, 0, 1, 1, 1]

for policy in (PolicyKind.LRU, PolicyKind.GLRU):
    cache = ChunkCache(capacity=5, chunks=sizes)
    print(f"\n{policy.name}, capacity 5")
    for f in trace:
        out = cache.request(f, policy)
        print(f"  request {f}: found {out.chunks_hit} of {sizes[f]}  "
              f"cache head->tail {cache.entries()}  evicted {out.chunks_evicted}")

# With single-chunk files the two policies cannot be told apart
a, b = ChunkCache(2, [1, 1, 1]), ChunkCache(2, [1, 1, 1])
for f in [0, 1, 2, 0, 0, 2]:
    a.request(f, "lru")
    b.request(f, "glru")
print("\nunit chunks, same final state:", a.entries() == b.entries())
