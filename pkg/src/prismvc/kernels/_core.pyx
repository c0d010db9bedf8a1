# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot kernels.

Same contracts and bit-for-bit identical outputs as the pure numpy backend;
see _pure.py for the reference semantics.
"""
import numpy as np

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int POPCOUNT64(unsigned long long x) {
        int c = 0;
        while (x) { x &= x - 1; ++c; }
        return c;
    }
    #endif
    """
    int POPCOUNT64(unsigned long long x) nogil

BACKEND_NAME = "compiled"


def norm_table(int q, int d):
    cdef long long n = 1
    cdef int i
    for i in range(d):
        n *= q
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long j, rem, c, total
    with nogil:
        for j in range(n):
            rem = j
            total = 0
            for i in range(d):
                c = rem % q
                rem //= q
                total += (c * c) % q
            o[j] = total % q
    return out


def coords_table(int q, int d):
    cdef long long n = 1
    cdef int i
    for i in range(d):
        n *= q
    out = np.empty((n, d), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef long long j, rem
    with nogil:
        for j in range(n):
            rem = j
            for i in range(d - 1, -1, -1):
                o[j, i] = rem % q
                rem //= q
    return out


def pair_rows(ca, cb, int q, int t):
    cdef long long[:, :] a = np.ascontiguousarray(ca, dtype=np.int64)
    cdef long long[:, :] b = np.ascontiguousarray(cb, dtype=np.int64)
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t words = (nb + 63) >> 6
    out = np.zeros((na, words if words else 1), dtype=np.uint64)
    if nb == 0 or na == 0:
        return out[:, :words]
    cdef unsigned long long[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef long long diff, s
    with nogil:
        for i in range(na):
            for j in range(nb):
                s = 0
                for k in range(d):
                    diff = a[i, k] - b[j, k]
                    s += diff * diff
                if s % q == t:
                    o[i, j >> 6] |= (<unsigned long long>1) << (j & 63)
    return out[:, :words]


def distance_rows(coords, int q, int t, Py_ssize_t row_start, Py_ssize_t row_end):
    return pair_rows(coords[row_start:row_end], coords, q, t)


def common_neighbor_counts(rows, Py_ssize_t row_start, Py_ssize_t row_end):
    cdef unsigned long long[:, ::1] r = rows
    cdef Py_ssize_t n = r.shape[0], w = r.shape[1]
    out = np.empty((row_end - row_start, n), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef long long c
    with nogil:
        for i in range(row_start, row_end):
            for j in range(n):
                c = 0
                for k in range(w):
                    c += POPCOUNT64(r[i, k] & r[j, k])
                o[i - row_start, j] = c
    return out


def mask_tally(rows, positions):
    cdef Py_ssize_t m = len(positions)
    if m > 16:
        raise ValueError("mask tally limited to 16 positions")
    cdef unsigned long long[:, ::1] r = rows
    cdef long long[::1] pos = np.asarray(positions, dtype=np.int64)
    out = np.zeros(1 << m, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i, jj
    cdef unsigned long long bit
    cdef long long mask
    with nogil:
        for i in range(n):
            mask = 0
            for jj in range(m):
                bit = (r[i, pos[jj] >> 6] >> (pos[jj] & 63)) & 1
                mask |= (<long long>bit) << jj
            o[mask] += 1
    return out


def shatter_flags(rows, cands, bint pair_kind):
    cdef unsigned long long[:, ::1] r = rows
    c_arr = np.ascontiguousarray(cands, dtype=np.int64)
    cdef long long[:, ::1] c = c_arr
    cdef Py_ssize_t b = c.shape[0], m = c.shape[1]
    if m > 5:
        raise ValueError("shatter flags limited to 5 positions")
    out = np.zeros(b, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i, u, jj, a, e
    cdef long long n_pat = 1 << m
    cdef long long want = (<long long>1 << n_pat) - 1
    cdef long long counts[32]
    cdef long long realized
    cdef unsigned long long bit
    cdef long long pat
    if n == 0 or b == 0:
        return out
    with nogil:
        for i in range(b):
            for a in range(n_pat):
                counts[a] = 0
            for u in range(n):
                pat = 0
                for jj in range(m):
                    bit = (r[u, c[i, jj] >> 6] >> (c[i, jj] & 63)) & 1
                    pat |= (<long long>bit) << jj
                counts[pat] += 1
            realized = 0
            if pair_kind:
                for a in range(n_pat):
                    if counts[a] == 0:
                        continue
                    for e in range(a, n_pat):
                        if a == e:
                            if counts[a] >= 2:
                                realized |= <long long>1 << a
                        elif counts[e] > 0:
                            realized |= <long long>1 << (a & e)
            else:
                for a in range(n_pat):
                    if counts[a] > 0:
                        realized |= <long long>1 << a
            if realized == want:
                o[i] = 1
    return out
