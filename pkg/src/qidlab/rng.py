"""Seeded random streams.

Contract ``pcg64-seedseq-v1``: stream ``k`` for seed ``s`` is
``numpy.random.Generator(PCG64(SeedSequence(s, spawn_key=(k,))))``.  Streams
depend only on ``(s, k)``, so trials can run in any order or on any number
of workers and still produce identical draws.
"""

from __future__ import annotations

import numpy as np

PRNG_CONTRACT = "pcg64-seedseq-v1"
SEED_MAX = 2**64 - 1


def stream(seed: int, index: int) -> np.random.Generator:
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
