"""Counter-based random streams.

All randomness in the package derives from Philox keyed by
``(seed, stream)``; there is no global RNG state, so replicas can run on
any thread layout and still reproduce bit-identically.
"""

import numpy as np

# stream ids reserved by the engine and samplers
STREAM_BASE = 0
STREAM_POOL = 1
STREAM_ENSEMBLE = 2
STREAM_INIT = 3


def stream(seed, stream_id=0):
    """Generator for an independent Philox stream keyed by (seed, stream_id)."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) << 64 | (int(stream_id) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def replica_seed(seed, replica):
    """Derive a per-replica seed from the experiment seed.

    Uses a splitmix64-style mix so neighbouring replicas get unrelated keys.
    """
    z = (int(seed) + 0x9E3779B97F4A7C15 * (int(replica) + 1)) & 0xFFFFFFFFFFFFFFFF
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)
