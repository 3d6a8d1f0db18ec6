"""Deterministic task fan-out.

Work items carry their own child-stream addresses, so the mapping is a pure
function of the item list; results always come back in submission order and
are byte-identical for any worker count.
"""
from __future__ import annotations

import multiprocessing as mp


def parallel_map(fn, items: list, n_workers: int = 1) -> list:
    """Apply fn to every item, preserving order.

    n_workers <= 1 runs serially; otherwise a process pool is used and the
    (picklable) results are collected in submission order.
    """
    items = list(items)
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    ctx = mp.get_context("spawn")
    with ctx.Pool(processes=min(n_workers, len(items))) as pool:
        return pool.map(fn, items, chunksize=1)
