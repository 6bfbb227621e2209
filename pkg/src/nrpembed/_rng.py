"""Named random sub-streams derived from a single integer seed.

Each consumer asks for its own stream by name, so adding a new consumer
never shifts the draws seen by existing ones.
"""
import zlib

import numpy as np


def stream(seed, name):
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))
