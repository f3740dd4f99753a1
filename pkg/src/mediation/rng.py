"""Counter-based, splittable random streams.

Every stream is addressed by a root seed plus an integer path, e.g.
``stream(seed, BOOT, b)`` for bootstrap replicate ``b``. The Philox key is
derived from the full path, so a stream never depends on which other streams
were created before it or on which worker creates it.
"""

import numpy as np

# path tags keep the sub-stream families disjoint
MC = 1
BOOT = 2
SIM = 3
RUN = 4
ORACLE = 5


def _entropy(seed, path):
    # SeedSequence drops trailing zero words and splits big ints into 32-bit
    # words, so fix the seed width and prefix the path length
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be in [0, 2**64)")
    path = [int(p) for p in path]
    if any(not 0 <= p < 2**32 for p in path):
        raise ValueError("path entries must be in [0, 2**32)")
    return [seed & 0xFFFFFFFF, seed >> 32, len(path), *path]


def stream(seed, *path):
    """Return a fresh Philox generator for ``(seed, *path)``."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *path):
    """Derive a 63-bit integer seed for a child computation."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
