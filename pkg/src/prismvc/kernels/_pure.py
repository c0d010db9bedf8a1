"""Pure numpy backend for the hot kernels.

Same contracts as the compiled backend in _core.pyx; outputs are bit-for-bit
identical. Bitsets are packed little-endian into uint64 words: point j lives
in word j >> 6 at bit j & 63.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def norm_table(q: int, d: int) -> np.ndarray:
    """Norm of every point of F_q^d in canonical index order."""
    n = q ** d
    idx = np.arange(n, dtype=np.int64)
    total = np.zeros(n, dtype=np.int64)
    for _ in range(d):
        idx, c = np.divmod(idx, q)
        total += (c * c) % q
    return total % q


def coords_table(q: int, d: int) -> np.ndarray:
    """Coordinates of every point, shape (q^d, d), canonical index order."""
    n = q ** d
    idx = np.arange(n, dtype=np.int64)
    out = np.empty((n, d), dtype=np.int64)
    for col in range(d - 1, -1, -1):
        idx, c = np.divmod(idx, q)
        out[:, col] = c
    return out


def _pack_bool(rows: np.ndarray) -> np.ndarray:
    """bool (r, n) -> uint64 (r, ceil(n/64)), little-endian bit order."""
    r, n = rows.shape
    words = (n + 63) >> 6
    packed8 = np.packbits(rows, axis=1, bitorder="little")
    padded = np.zeros((r, words * 8), dtype=np.uint8)
    padded[:, : packed8.shape[1]] = packed8
    return padded.view(np.uint64)


def pair_rows(coords_a: np.ndarray, coords_b: np.ndarray,
              q: int, t: int) -> np.ndarray:
    """Packed rows: bit j of row i set iff ||coords_a[i] - coords_b[j]|| = t."""
    diff = (coords_a[:, None, :] - coords_b[None, :, :]) % q
    dn = np.einsum("ijk,ijk->ij", diff, diff) % q
    return _pack_bool(dn == t)


def distance_rows(coords: np.ndarray, q: int, t: int,
                  row_start: int, row_end: int) -> np.ndarray:
    """Packed rows: bit j of row i set iff ||coords[i] - coords[j]|| = t.

    The diagonal is never set because t != 0.
    """
    return pair_rows(coords[row_start:row_end], coords, q, t)


def popcount(a: np.ndarray) -> np.ndarray:
    """Elementwise popcount of a uint64 array, summed over the last axis."""
    return _POP8[a.view(np.uint8).reshape(a.shape[:-1] + (-1,))].sum(axis=-1)


def common_neighbor_counts(rows: np.ndarray,
                           row_start: int, row_end: int) -> np.ndarray:
    """counts[i - row_start, j] = popcount(rows[i] & rows[j])."""
    n = rows.shape[0]
    out = np.empty((row_end - row_start, n), dtype=np.int64)
    for i in range(row_start, row_end):
        out[i - row_start] = popcount(rows[i] & rows)
    return out


def mask_tally(rows: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Tally of the bit patterns that each row induces on the given positions.

    Returns an int64 vector of length 2^m, m = len(positions): entry p counts
    the rows u whose restriction to the positions equals the pattern p
    (bit j of p is bit positions[j] of row u).
    """
    m = len(positions)
    if m > 16:
        raise ValueError("mask tally limited to 16 positions")
    pos = np.asarray(positions, dtype=np.int64)
    cols = (pos >> 6).astype(np.intp)
    shifts = (pos & 63).astype(np.uint64)
    bits = (rows[:, cols] >> shifts) & np.uint64(1)
    weights = (np.uint64(1) << np.arange(m, dtype=np.uint64))
    masks = (bits * weights).sum(axis=1).astype(np.int64)
    return np.bincount(masks, minlength=1 << m).astype(np.int64)


def shatter_flags(rows: np.ndarray, cands: np.ndarray, pair_kind: bool) -> np.ndarray:
    """Shatter check for a block of candidate sets, one uint8 flag per row
    of cands (shape (B, m), m <= 5).

    A candidate is shattered when the hypothesis class realizes all 2^m
    labelings: single kind realizes the patterns of the rows themselves,
    pair kind the ANDs of patterns of two distinct rows (the same pattern
    class works as both operands only when it holds at least two rows).
    """
    cands = np.ascontiguousarray(cands, dtype=np.int64)
    b, m = cands.shape
    if m > 5:
        raise ValueError("shatter flags limited to 5 positions")
    n_pat = 1 << m
    want = (1 << n_pat) - 1
    out = np.zeros(b, dtype=np.uint8)
    if rows.shape[0] == 0 or b == 0:
        return out
    weights = np.uint64(1) << np.arange(m, dtype=np.uint64)
    # bounded slices keep the (rows, slice, m) gather off the heap cliff
    step = max(1, (1 << 21) // max(1, rows.shape[0]))
    for lo in range(0, b, step):
        part = cands[lo:lo + step]
        cols = (part >> 6).astype(np.intp)
        shifts = (part & 63).astype(np.uint64)
        bits = (rows[:, cols] >> shifts[None, :, :]) & np.uint64(1)
        patterns = (bits * weights).sum(axis=2).astype(np.int64)
        k = part.shape[0]
        offsets = np.arange(k, dtype=np.int64) * n_pat
        counts = np.bincount((patterns + offsets).ravel(),
                             minlength=k * n_pat).reshape(k, n_pat)
        nonzero = counts > 0
        realized = np.zeros(k, dtype=np.int64)
        if not pair_kind:
            for a in range(n_pat):
                realized |= nonzero[:, a].astype(np.int64) << a
        else:
            for a in range(n_pat):
                ok_a = nonzero[:, a]
                if not ok_a.any():
                    continue
                for c in range(a, n_pat):
                    if a == c:
                        usable = counts[:, a] >= 2
                    else:
                        usable = ok_a & nonzero[:, c]
                    realized |= usable.astype(np.int64) << (a & c)
        out[lo:lo + step][realized == want] = 1
    return out
