"""Seed derivation.

A single 64-bit master seed deterministically labels every random decision in
an experiment. Child seeds come from hashing the master together with integer
coordinates (trial index, sample size, stage tag) through splitmix64, so
changing the trial count or running trials in parallel never shifts the
stream any individual trial sees.
"""
from __future__ import annotations

import random

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, *parts: int) -> int:
    """Child seed for the decision labelled by the given integer parts."""
    x = splitmix64(master & _MASK)
    for p in parts:
        x = splitmix64(x ^ (p & _MASK))
    return x


def rng_for(master: int, *parts: int) -> random.Random:
    return random.Random(derive_seed(master, *parts))


def sample_indices(n: int, size: int, seed: int) -> list[int]:
    """`size` distinct indices from range(n), uniform without replacement.

    Partial Fisher-Yates with a sparse swap map, so memory is O(size) and the
    result depends only on the seed, not on library version details.
    """
    if not 0 <= size <= n:
        raise ValueError(f"cannot sample {size} items from {n}")
    rng = random.Random(seed)
    swap: dict[int, int] = {}
    out = []
    for i in range(size):
        j = rng.randrange(i, n)
        vi = swap.get(i, i)
        vj = swap.get(j, j)
        swap[i], swap[j] = vj, vi
        out.append(vj)
    return out
