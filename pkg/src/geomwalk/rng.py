"""Counter-based random streams.

Every replica derives its generator from (master seed, index path), so a run
parallelized over any number of workers draws exactly the same numbers as a
serial run.
"""
from __future__ import annotations

import numpy as np


def child_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``(master_seed, *path)``.

    The same address always yields the same stream; distinct addresses give
    statistically independent streams.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def spawn_children(rng_or_seed: np.random.Generator | int, n: int) -> list[np.random.Generator]:
    """n independent child generators, in index order.

    Accepts either a master seed (preferred: addressing is reproducible by
    value) or an existing Generator (children are spawned from its seed
    sequence, advancing it).
    """
    if isinstance(rng_or_seed, (int, np.integer)):
        return [child_rng(int(rng_or_seed), i) for i in range(n)]
    return rng_or_seed.spawn(n)
