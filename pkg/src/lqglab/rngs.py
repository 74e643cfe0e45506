"""Counter-based random streams.

Every stochastic operation draws from a Philox generator keyed by
(base seed, replicate index, stream id), so replicates can be evaluated
in any order or in parallel without changing results.
"""
from __future__ import annotations

import numpy as np

# stream ids (keep stable: they are part of the reproducibility contract)
STREAM_FIELD = 0
STREAM_PATH = 1
STREAM_WALKERS = 2
STREAM_EXPONENT = 3


def rng_for(base_seed: int, replicate: int = 0, stream: int = 0) -> np.random.Generator:
    key = np.array(
        [np.uint64(base_seed & 0xFFFFFFFFFFFFFFFF), np.uint64(replicate << 8 | stream)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
