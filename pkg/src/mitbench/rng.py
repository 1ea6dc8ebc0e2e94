"""Reproducible random streams.

All randomness in the package flows from a root 64-bit seed through
:func:`derive_seed`, which feeds NumPy's ``SeedSequence`` spawn keys. Draws are
made with the Philox4x64 counter-based generator, so a stream depends only on
its key path and never on execution order or thread count.
"""

import numpy as np

# Stable integer labels for stream keys; never renumber.
STREAMS = {
    "circuit": 1,
    "filter": 2,
    "none": 10,
    "zne": 11,
    "cdr": 12,
    "shots": 20,
    "fold": 21,
    "training": 22,
    "retry": 23,
    "term": 24,
}

_MASK64 = (1 << 64) - 1


def _key(k):
    if isinstance(k, str):
        return STREAMS[k]
    k = int(k)
    if k < 0:
        raise ValueError("stream keys must be non-negative")
    return k


def derive_seed(seed, *keys):
    """Derive a child 64-bit seed from ``seed`` and a path of stream keys.

    Keys are non-negative integers or names from :data:`STREAMS`.
    """
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def make_rng(seed, *keys):
    """Return a Philox-backed ``numpy.random.Generator`` for the given stream."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
