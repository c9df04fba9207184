"""Shared plumbing: thread cap, seed derivation, tolerant deduplication."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


class BudgetExhausted(RuntimeError):
    """A combinatorial search ran out of its node budget."""


def thread_count() -> int:
    """Parallelism cap from MMFIELD_THREADS; defaults to 1 (serial)."""
    raw = os.environ.get("MMFIELD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map; uses threads only when the cap allows it.

    Results are collected in input order, so output is schedule independent.
    """
    items = list(items)
    k = thread_count()
    if k <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(k, len(items))) as pool:
        return list(pool.map(fn, items))


def spawn_seeds(seed: int, k: int) -> list:
    """k reproducible child seeds derived from one root seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]


def dedupe_sorted(values, tol: float = 1e-12) -> np.ndarray:
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    if vals.size == 0:
        return vals
    keep = [vals[0]]
    for v in vals[1:]:
        if v - keep[-1] > tol:
            keep.append(v)
    return np.array(keep)
