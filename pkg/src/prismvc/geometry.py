"""Spheres, affine subspaces, and pole sets.

A sphere here is a level set of the quadratic form: S_t + c = {x : ||x-c|| = t}.
Everything is computed by full-space scans against cached norm tables; there
is no floating point and no square root anywhere.

One structural fact shapes several contracts in this module. A line whose
direction vector v satisfies ||v|| = 0 (an isotropic direction; these exist
for every odd prime q once d >= 3) meets any sphere of nonzero radius class
in 0 points, 1 point, or all q of its points, because the restriction of
||x - c|| - t to the line degenerates from a quadratic to a linear function
of the line parameter. Full containment really happens for some radii, so
the classical "a line meets a sphere at most twice" bound, and the pole-count
bounds built on top of it, hold only outside those configurations. Operations
in this module therefore *report* those bounds instead of asserting them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels, parallel
from .field import FieldParams, Point, PointSet, index_point, point_index, reduce_point


@lru_cache(maxsize=32)
def _tables(q: int, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(coords, norms, strides) for F_q^d, cached; treat as read-only."""
    coords = kernels.coords_table(q, d)
    norms = kernels.norm_table(q, d)
    strides = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return coords, norms, strides


def _bits_to_mask(bits: np.ndarray) -> int:
    packed = np.packbits(bits, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def sphere_points(center: Point, params: FieldParams) -> PointSet:
    """All x with ||x - center|| = t, as a dense PointSet."""
    q, d = params.q, params.d
    coords, _, _ = _tables(q, d)
    c = np.asarray(reduce_point(center, params), dtype=np.int64)
    diff = (coords - c) % q
    norms = np.einsum("ij,ij->i", diff, diff) % q
    return PointSet(params.space_size, _bits_to_mask(norms == params.t))


def sphere_sizes(params: FieldParams, workers: int | None = None) -> dict[int, int]:
    """|S_t'| for every nonzero radius class t', one norm-table pass."""
    q, d = params.q, params.d
    _, norms, _ = _tables(q, d)

    def tally(a: int, b: int) -> np.ndarray:
        return np.bincount(norms[a:b], minlength=q)

    parts = parallel.run_chunks(tally, len(norms), workers)
    total = sum(parts)
    return {t: int(total[t]) for t in range(1, q)}


@dataclass(frozen=True)
class Sphere:
    """Sphere with its points materialized on demand.

    Materialization asserts the size window q^(d-1) - q^(d/2) < |S| <
    q^(d-1) + q^(d/2); the exact counts sit strictly inside it for every
    odd prime q and d >= 2, so a violation means a broken build.
    """

    params: FieldParams
    center: Point

    def points(self) -> PointSet:
        ps = sphere_points(self.center, self.params)
        q, d = self.params.q, self.params.d
        lo = q ** (d - 1) - q ** (d / 2)
        hi = q ** (d - 1) + q ** (d / 2)
        assert lo < ps.size < hi, f"sphere size {ps.size} outside ({lo}, {hi})"
        return ps


@dataclass(frozen=True)
class SphereSizeCheck:
    t: int
    size: int
    lower: float
    upper: float
    within: bool


def verify_sphere_size_bounds(params: FieldParams,
                              workers: int | None = None) -> list[SphereSizeCheck]:
    """Size window check for every radius class of the instance."""
    q, d = params.q, params.d
    lo = q ** (d - 1) - q ** (d / 2)
    hi = q ** (d - 1) + q ** (d / 2)
    out = []
    for t, size in sphere_sizes(params, workers).items():
        out.append(SphereSizeCheck(t, size, lo, hi, lo < size < hi))
    return out


def affine_rank(points: list[Point] | tuple[Point, ...], q: int) -> int:
    """Rank over F_q of the differences against the first point.

    k points are affinely independent iff this is k - 1.
    """
    pts = list(points)
    if len(pts) <= 1:
        return 0
    rows = [[(c - b) % q for c, b in zip(p, pts[0])] for p in pts[1:]]
    rank = 0
    ncols = len(rows[0])
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, q)
        rows[rank] = [(x * inv) % q for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % q for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def is_affinely_independent(points, q: int) -> bool:
    pts = list(points)
    return affine_rank(pts, q) == len(pts) - 1


@dataclass(frozen=True)
class AffineSubspace:
    """base + span(basis); the basis must be linearly independent."""

    params: FieldParams
    base: Point
    basis: tuple[Point, ...]

    def __post_init__(self):
        q = self.params.q
        if not self.basis:
            raise ValueError("basis must be nonempty")
        zero = (0,) * self.params.d
        vecs = [zero] + [reduce_point(v, self.params) for v in self.basis]
        if affine_rank(vecs, q) != len(self.basis):
            raise ValueError("basis vectors are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def enumerate_points(self) -> np.ndarray:
        """All q^dim points as an int64 array of coordinate rows."""
        q, d = self.params.q, self.params.d
        n = self.dim
        coeffs = kernels.coords_table(q, n)
        basis = np.asarray([reduce_point(v, self.params) for v in self.basis],
                           dtype=np.int64)
        base = np.asarray(reduce_point(self.base, self.params), dtype=np.int64)
        return (coeffs @ basis + base) % q


def affine_sphere_intersection(sub: AffineSubspace, params: FieldParams) -> PointSet:
    """Points of the subspace lying on the origin sphere S_t."""
    q = params.q
    pts = sub.enumerate_points()
    norms = np.einsum("ij,ij->i", pts, pts) % q
    _, _, strides = _tables(q, params.d)
    on = pts[norms == params.t] @ strides
    return PointSet.from_indices(on.tolist(), params)


@dataclass(frozen=True)
class SliceBoundCheck:
    size: int
    bound: int
    within: bool


def slice_bound_check(sub: AffineSubspace, params: FieldParams) -> SliceBoundCheck:
    """|subspace ∩ S_t| against 2 q^(n-1).

    Reported, not asserted: full isotropic lines inside spheres violate it
    (see the module docstring), and they occur at desk scale.
    """
    size = affine_sphere_intersection(sub, params).size
    bound = 2 * params.q ** (sub.dim - 1)
    return SliceBoundCheck(size, bound, size <= bound)


def poles(points_a, domain: PointSet, params: FieldParams,
          workers: int | None = None) -> PointSet:
    """Common t-neighbors within the domain: domain ∩ ⋂_{a} (S_t + a).

    The domain is explicit because badness of a center subset quantifies
    over the whole space while classifier construction may only use points
    of the working set E.
    """
    pts = list(points_a)
    if not pts:
        raise ValueError("pole set of the empty family is the whole space; "
                         "pass the points explicitly")
    spheres = parallel.run_items(lambda p: sphere_points(p, params), pts, workers)
    mask = domain.mask
    for s in spheres:
        mask &= s.mask
    return PointSet(params.space_size, mask)


@dataclass(frozen=True)
class PoleBoundCheck:
    count: int
    k: int
    affinely_independent: bool
    bound: int | None
    within: bool | None


def pole_bound_check(points_a, params: FieldParams) -> PoleBoundCheck:
    """|⋂ (S_t + a_i)| against 2 q^(d-k) for affinely independent k-tuples.

    Reported, not asserted; the bound genuinely fails when the residual pole
    line lies inside a sphere (k = d with an isotropic pole direction).
    For dependent tuples the bound does not apply and bound/within are None.
    """
    pts = list(points_a)
    k = len(pts)
    full = PointSet.full(params)
    count = poles(pts, full, params).size
    indep = is_affinely_independent(pts, params.q)
    if not indep or k > params.d:
        return PoleBoundCheck(count, k, indep, None, None)
    bound = 2 * params.q ** (params.d - k)
    return PoleBoundCheck(count, k, indep, bound, count <= bound)


def pole_bound_sample(params: FieldParams, seed: int, samples: int = 50) -> dict:
    """Seeded sample of affinely independent tuples (sizes 1..d-1, cycled)
    with their pole counts against 2 q^(d-k). Deterministic in the seed."""
    rng = random.Random(seed)
    checked = 0
    violations = 0
    worst = 0.0
    n = params.space_size
    for trial in range(samples):
        k = 1 + trial % (params.d - 1) if params.d > 2 else 1
        idx = rng.sample(range(n), k)
        pts = [index_point(i, params) for i in idx]
        c = pole_bound_check(pts, params)
        if not c.affinely_independent:
            continue
        checked += 1
        if not c.within:
            violations += 1
        ratio = c.count / c.bound
        if ratio > worst:
            worst = ratio
    return {"checked": checked, "violations": violations, "max_ratio": worst}


def translate_pointset(ps: PointSet, v: Point, params: FieldParams) -> PointSet:
    """{x + v : x in ps}."""
    q = params.q
    coords, _, strides = _tables(q, params.d)
    idx = np.fromiter(ps.indices(), dtype=np.int64)
    if len(idx) == 0:
        return PointSet.empty(params)
    shifted = ((coords[idx] + np.asarray(reduce_point(v, params))) % q) @ strides
    return PointSet.from_indices(shifted.tolist(), params)
