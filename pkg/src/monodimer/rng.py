"""Seeded, splittable random streams.

Every sampled object draws from its own Philox (counter-based) generator whose
key is derived from ``(seed, *keys)``, so results do not depend on the order
in which objects are produced or on how work is scheduled.
"""
import numpy as np


def stream(seed, *keys):
    """Independent generator for the stream labelled ``(seed, *keys)``."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    ss = np.random.SeedSequence(words)
    return np.random.Generator(np.random.Philox(ss))


def spawn_seed(seed, *keys):
    """A 63-bit integer seed for a child computation."""
    g = stream(seed, *keys)
    return int(g.integers(0, 2**63 - 1))
