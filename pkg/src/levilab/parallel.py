"""Deterministic parallel map and per-item random streams."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def default_threads() -> int:
    return os.cpu_count() or 1


def pmap(fn, items, threads: int | None = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = default_threads() if threads is None else int(threads)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


def item_rng(seed: int, index: int) -> np.random.Generator:
    """Random stream for item ``index``; independent of scheduling and thread count."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
