"""Deterministic work partitioning.

Heavy scans split an index range into contiguous chunks, run the chunks on a
thread pool, and merge the partial results in range order. Every merge used
in the package is associative over ordered chunks (sums, concatenations,
unions of disjoint blocks), so results are identical for any worker count;
that invariant is load-bearing and tested.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

ENV_WORKERS = "PRISMVC_WORKERS"


def effective_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(ENV_WORKERS, "").strip()
        workers = int(env) if env else 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def split_range(n: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous (start, end) chunks covering range(n), at most `parts` of them."""
    parts = max(1, min(parts, n)) if n else 1
    base, extra = divmod(n, parts)
    out = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append((start, start + size))
        start += size
    return out


def run_chunks(fn: Callable[[int, int], T], n: int,
               workers: int | None = None) -> list[T]:
    """fn(start, end) on each chunk; partial results in chunk order."""
    w = effective_workers(workers)
    chunks = split_range(n, w)
    if w == 1 or len(chunks) == 1:
        return [fn(a, b) for a, b in chunks]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(lambda ab: fn(*ab), chunks))


def run_items(fn: Callable[[T], object], items: Sequence[T],
              workers: int | None = None) -> list:
    """fn over items, results in item order."""
    w = effective_workers(workers)
    if w == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))
