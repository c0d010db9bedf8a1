"""Prisms: tail pairs with a tuple of common t-neighbors between them.

A prism with n center points is (y, z, x^1..x^n) where every x^i is at
distance class t from both tails. Nondegenerate means all n+2 components are
pairwise distinct (automatic for the tails-vs-centers part since t != 0).
Affinely nondegenerate additionally requires the center to be affinely
independent, i.e. to span an (n-1)-dimensional flat.

Counting is over ordered tails and ordered centers throughout, hence the
2 * n! symmetry factor against unordered counts.
"""
from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from . import parallel
from .field import FieldParams, Point, PointSet, index_point
from .geometry import affine_rank, sphere_points
from .graph import DistanceGraph, PairPathCounts


@dataclass(frozen=True)
class Prism:
    tails: tuple[Point, Point]
    center: tuple[Point, ...]

    @property
    def n(self) -> int:
        return len(self.center)

    def components(self) -> tuple[Point, ...]:
        return self.tails + self.center


@dataclass(frozen=True)
class PrismClass:
    nondegenerate: bool
    affinely_nondegenerate: bool


def classify_prism(prism: Prism, params: FieldParams) -> PrismClass:
    comps = prism.components()
    nondeg = len(set(comps)) == len(comps)
    if not nondeg:
        return PrismClass(False, False)
    aff = affine_rank(prism.center, params.q) == prism.n - 1
    return PrismClass(True, aff)


def falling_factorial(k: int, n: int) -> int:
    out = 1
    for i in range(n):
        out *= k - i
        if out == 0:
            return 0
    return out


def count_prisms_formula(counts: PairPathCounts, n_centers: int) -> int:
    """Nondegenerate prisms with n ordered centers: sum of falling factorials
    of the pair counts over ordered tail pairs. Exact, arbitrary precision."""
    m = counts.matrix
    total = 0
    for i in range(m.shape[0]):
        row = m[i]
        for j in range(m.shape[1]):
            if i != j:
                total += falling_factorial(int(row[j]), n_centers)
    return total


def _common_positions(graph: DistanceGraph, i: int, j: int) -> list[int]:
    mask = graph.common_neighbors_mask(i, j)
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def enumerate_prisms(graph: DistanceGraph, n_centers: int,
                     kind: str = "nondegenerate",
                     limit: int | None = None):
    """Prisms of G_t(E) in index-lexicographic order.

    Order: ordered tail pairs by (first, second) vertex position, then ordered
    center tuples lexicographically. kind selects 'nondegenerate' or
    'affinely_nondegenerate'.
    """
    if kind not in ("nondegenerate", "affinely_nondegenerate"):
        raise ValueError(f"unknown prism kind {kind!r}")
    params = graph.params
    yielded = 0
    for i in range(graph.n):
        for j in range(graph.n):
            if i == j:
                continue
            common = _common_positions(graph, i, j)
            if len(common) < n_centers:
                continue
            tails = (graph.vertex_point(i), graph.vertex_point(j))
            for tup in itertools.permutations(common, n_centers):
                center = tuple(graph.vertex_point(p) for p in tup)
                if kind == "affinely_nondegenerate":
                    if affine_rank(center, params.q) != n_centers - 1:
                        continue
                yield Prism(tails, center)
                yielded += 1
                if limit is not None and yielded >= limit:
                    return


@lru_cache(maxsize=8192)
def _sphere_mask(params: FieldParams, p: Point) -> int:
    return sphere_points(p, params).mask


@dataclass(frozen=True)
class BadSetEntry:
    subset: tuple[Point, ...]
    pole_count: int
    bad: bool
    vacuous: bool


@dataclass(frozen=True)
class BadSetReport:
    prism: Prism
    entries: tuple[BadSetEntry, ...]

    @property
    def bad_subsets(self) -> tuple[tuple[Point, ...], ...]:
        return tuple(e.subset for e in self.entries if e.bad)

    @property
    def admits_bad_set(self) -> bool:
        return any(e.bad for e in self.entries)

    def pole_cardinalities(self) -> dict[tuple[Point, ...], int]:
        return {e.subset: e.pole_count for e in self.entries}


def find_bad_sets(prism: Prism, params: FieldParams) -> BadSetReport:
    """Subsets A of the center whose full-space pole set is covered by the
    spheres around the remaining center points.

    Pole(A) = empty counts as vacuously bad (nothing escapes the cover) and
    is flagged. Subset sizes run from 1 to min(d, n) - 1 so the complement
    is never empty; subsets are enumerated in center-position order.
    """
    center = prism.center
    n = len(center)
    full = (1 << params.space_size) - 1
    entries = []
    for k in range(1, min(params.d, n)):
        for pos in itertools.combinations(range(n), k):
            pole = full
            for a in pos:
                pole &= _sphere_mask(params, center[a])
            cover = 0
            for c in range(n):
                if c not in pos:
                    cover |= _sphere_mask(params, center[c])
            npoles = pole.bit_count()
            vacuous = npoles == 0
            bad = vacuous or (pole & ~cover) == 0
            entries.append(BadSetEntry(tuple(center[a] for a in pos),
                                       npoles, bad, vacuous))
    return BadSetReport(prism, tuple(entries))


def prisms_admitting_no_bad_set(graph: DistanceGraph, n_centers: int,
                                limit: int | None = None,
                                scan_limit: int | None = None):
    """Affinely nondegenerate prisms none of whose center subsets is bad.

    scan_limit caps how many affinely nondegenerate prisms are examined.
    """
    params = graph.params
    yielded = 0
    scanned = 0
    for prism in enumerate_prisms(graph, n_centers, "affinely_nondegenerate"):
        scanned += 1
        if not find_bad_sets(prism, params).admits_bad_set:
            yield prism
            yielded += 1
            if limit is not None and yielded >= limit:
                return
        if scan_limit is not None and scanned >= scan_limit:
            return


@dataclass(frozen=True)
class PoleBoundEntry:
    subset: tuple[Point, ...]
    pole_count: int
    bound: int
    within: bool


@dataclass(frozen=True)
class BadPrismCensus:
    subset: tuple[Point, ...]
    ordered_prisms_containing: int
    ordered_prisms_bad_in: int
    bound_exponent: int
    bound: int
    empirical_constant: float
    truncated: bool


def bad_prism_census(graph: DistanceGraph, subset: tuple[Point, ...],
                     workers: int | None = None,
                     max_tail_pairs: int | None = None) -> BadPrismCensus:
    """Count affinely nondegenerate d-center prisms containing the subset in
    their center, and how many of those have the subset bad.

    Ordered-prism counts (both tail orders, all d! center orders); badness
    and affine nondegeneracy depend only on the center set, so the scan walks
    unordered center sets and multiplies by the symmetry factor. The reported
    bound is q^(d^2 - kd - d + k - 1); the empirical constant is the ratio of
    the bad count against it.
    """
    params = graph.params
    d = params.d
    k = len(subset)
    if not 1 <= k <= d - 1:
        raise ValueError(f"subset size must be in [1, d-1], got {k}")
    sub_pos = []
    for p in subset:
        sub_pos.append(graph.position_of(p))
    sub_mask = 0
    for p in sub_pos:
        sub_mask |= 1 << p
    rows = graph.row_ints()
    n = graph.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if max_tail_pairs is not None:
        pairs = pairs[:max_tail_pairs]
    orderings = 2 * _factorial(d)

    full = (1 << params.space_size) - 1
    pole = full
    for p in subset:
        pole &= _sphere_mask(params, p)

    def scan(a: int, b: int) -> tuple[int, int]:
        containing = 0
        bad = 0
        for i, j in pairs[a:b]:
            common = rows[i] & rows[j]
            if common & sub_mask != sub_mask:
                continue
            rest_pos = _positions(common & ~sub_mask)
            if len(rest_pos) < d - k:
                continue
            base = tuple(subset)
            for extra in itertools.combinations(rest_pos, d - k):
                others = tuple(graph.vertex_point(p) for p in extra)
                center = base + others
                if affine_rank(center, params.q) != d - 1:
                    continue
                containing += 1
                cover = 0
                for c in others:
                    cover |= _sphere_mask(params, c)
                if pole & ~cover == 0:
                    bad += 1
        return containing, bad

    parts = parallel.run_chunks(scan, len(pairs), workers)
    containing = sum(p[0] for p in parts) * orderings
    bad = sum(p[1] for p in parts) * orderings
    expo = d * d - k * d - d + k - 1
    bound = params.q ** expo
    return BadPrismCensus(subset, containing, bad, expo, bound,
                          bad / bound, max_tail_pairs is not None)


def _factorial(n: int) -> int:
    return math.factorial(n)


@dataclass(frozen=True)
class NondegenerateFraction:
    method: str
    affinely_nondegenerate: int | None
    nondegenerate: int | None
    samples: int | None
    fraction: float | None


def affinely_nondegenerate_fraction(graph: DistanceGraph, n_centers: int,
                                    exact_limit: int = 2_000_000,
                                    samples: int = 20_000,
                                    seed: int = 0,
                                    workers: int | None = None) -> NondegenerateFraction:
    """Fraction of nondegenerate prisms that are affinely nondegenerate.

    Exact when the unordered scan fits the budget, otherwise seeded sampling;
    the method is reported either way. An instance with no prisms at all
    reports fraction None.
    """
    rows = graph.row_ints()
    n = graph.n
    params = graph.params
    # unordered scan size estimate: sum over i<j of C(k_ij, n_centers)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def exact_scan(a: int, b: int) -> tuple[int, int]:
        tot = 0
        aff = 0
        for i, j in pairs[a:b]:
            common = _positions(rows[i] & rows[j])
            if len(common) < n_centers:
                continue
            for comb in itertools.combinations(common, n_centers):
                tot += 1
                center = tuple(graph.vertex_point(p) for p in comb)
                if affine_rank(center, params.q) == n_centers - 1:
                    aff += 1
        return tot, aff

    work = 0
    for i, j in pairs:
        c = (rows[i] & rows[j]).bit_count()
        if c >= n_centers:
            work += _binom(c, n_centers)
    if work <= exact_limit:
        parts = parallel.run_chunks(exact_scan, len(pairs), workers)
        tot = sum(p[0] for p in parts)
        aff = sum(p[1] for p in parts)
        if tot == 0:
            return NondegenerateFraction("exact", 0, 0, None, None)
        sym = 2 * _factorial(n_centers)
        return NondegenerateFraction("exact", aff * sym, tot * sym, None, aff / tot)
    # seeded sampling over ordered prisms via pair counts
    rng = random.Random(seed)
    eligible = [(i, j) for i, j in pairs
                if (rows[i] & rows[j]).bit_count() >= n_centers]
    if not eligible:
        return NondegenerateFraction("sampled", None, None, 0, None)
    weights = [falling_factorial((rows[i] & rows[j]).bit_count(), n_centers)
               for i, j in eligible]
    cum = list(itertools.accumulate(weights))
    total_w = cum[-1]
    aff = 0
    for _ in range(samples):
        r = rng.randrange(total_w)
        pi = bisect.bisect_right(cum, r)
        i, j = eligible[pi]
        common = _positions(rows[i] & rows[j])
        tup = rng.sample(common, n_centers)
        center = tuple(graph.vertex_point(p) for p in tup)
        if affine_rank(center, params.q) == n_centers - 1:
            aff += 1
    return NondegenerateFraction("sampled", None, None, samples, aff / samples)


def _positions(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def pole_bound_entries(report: BadSetReport, params: FieldParams) -> list[PoleBoundEntry]:
    """For each affinely independent bad subset, the pole count against the
    strict bad-set bound 2 (d-k) q^(d-k-1). Subsets of an affinely
    nondegenerate center are always affinely independent. Reported, not
    asserted."""
    out = []
    d = params.d
    for e in report.entries:
        if not e.bad or e.vacuous:
            continue
        k = len(e.subset)
        if affine_rank(e.subset, params.q) != k - 1:
            continue
        bound = 2 * (d - k) * params.q ** (d - k - 1)
        out.append(PoleBoundEntry(e.subset, e.pole_count, bound,
                                  e.pole_count < bound))
    return out


def greedy_independent_poles(pole_set: PointSet, tails: tuple[Point, Point],
                             size: int, params: FieldParams) -> list[Point] | None:
    """Greedy subset J of the pole set, |J| = size, with J plus the tails
    affinely independent; first-index scan mirroring the span-growing
    construction. None when the scan exhausts the poles."""
    y, z = tails
    chosen: list[Point] = []
    base = [y, z]
    for idx in pole_set.indices():
        p = index_point(idx, params)
        trial = base + chosen + [p]
        if affine_rank(trial, params.q) == len(trial) - 1:
            chosen.append(p)
            if len(chosen) == size:
                return chosen
    return None
