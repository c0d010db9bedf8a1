"""VC dimension of sphere-intersection classifiers.

Hypotheses are parameterized by a point family E but classify the whole
grid. The pair class is {h_{u,v} : u != v in E} with h_{u,v}(x) = 1 iff x is
at distance class t from both u and v; the single class is {h_y : y in E}.

The exact search rests on two facts. A set shattered by the pair class must
realize the all-ones pattern, so it lies inside the common t-neighborhood of
some pair; candidates therefore come only from pair supports. Shattered sets
are downward closed, so a size ladder that stops at the first empty level is
exact. When E is the whole space the class is translation invariant and
supports through the pairs (0, w) suffice.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels, parallel, seeds
from .field import FieldParams, Point, PointSet, distance, index_point
from .geometry import sphere_points
from .prism import Prism

_CHECK_BLOCK = 512


@dataclass(frozen=True)
class Hypothesis:
    """Indicator of the intersection of the t-spheres around its points."""

    params: FieldParams
    points: tuple[Point, ...]

    def __post_init__(self):
        if len(self.points) not in (1, 2):
            raise ValueError("hypothesis takes one or two points")
        if len(self.points) == 2 and self.points[0] == self.points[1]:
            raise ValueError("pair hypothesis needs two distinct points")

    @property
    def kind(self) -> str:
        return "pair" if len(self.points) == 2 else "single"

    def evaluate(self, x: Point) -> int:
        t = self.params.t
        for p in self.points:
            if distance(x, p, self.params) != t:
                return 0
        return 1


def pair_hypothesis(u: Point, v: Point, params: FieldParams) -> Hypothesis:
    return Hypothesis(params, (u, v))


def single_hypothesis(y: Point, params: FieldParams) -> Hypothesis:
    return Hypothesis(params, (y,))


def class_size(e_set: PointSet, kind: str) -> int:
    n = e_set.size
    if kind == "pair":
        return n * (n - 1)
    if kind == "single":
        return n
    raise ValueError(f"unknown hypothesis kind {kind!r}")


def hypotheses(e_set: PointSet, params: FieldParams, kind: str = "pair"):
    """The class in canonical scan order: ordered point pairs by index for
    the pair kind, single points by index otherwise."""
    pts = list(e_set.points(params))
    if kind == "single":
        for y in pts:
            yield single_hypothesis(y, params)
        return
    if kind != "pair":
        raise ValueError(f"unknown hypothesis kind {kind!r}")
    for u in pts:
        for v in pts:
            if u != v:
                yield pair_hypothesis(u, v, params)


def _e_indices(e_set: PointSet) -> np.ndarray:
    return np.fromiter(e_set.indices(), dtype=np.int64, count=e_set.size)


def membership_rows(e_set: PointSet, params: FieldParams,
                    workers: int | None = None) -> np.ndarray:
    """Packed rows over the whole grid: bit j of row i set iff grid point j
    is at distance class t from the i-th point of E."""
    coords = kernels.coords_table(params.q, params.d)
    e_coords = coords[_e_indices(e_set)]

    def chunk(a: int, b: int) -> np.ndarray:
        return kernels.pair_rows(e_coords[a:b], coords, params.q, params.t)

    parts = parallel.run_chunks(chunk, len(e_coords), workers)
    return np.vstack(parts)


def _shattered_from_tally(tally: np.ndarray, m: int, kind: str) -> bool:
    target = 1 << m
    vals = np.flatnonzero(tally)
    if kind == "single":
        return len(vals) == target
    pats = set(int(v) for v in vals if tally[v] >= 2)
    nv = len(vals)
    for i in range(nv):
        a = int(vals[i])
        for j in range(i + 1, nv):
            pats.add(a & int(vals[j]))
        if len(pats) == target:
            return True
    return len(pats) == target


def dichotomy_patterns(e_set: PointSet, c_points: tuple[Point, ...],
                       params: FieldParams, kind: str = "pair") -> set[int]:
    """All labelings of C realized by the class; bit j of a pattern labels
    c_points[j]. C is any tuple of distinct grid points, at most 16."""
    m = len(c_points)
    if m > 16:
        raise ValueError("pattern computation limited to 16 points")
    if len(set(c_points)) != m:
        raise ValueError("pattern points must be distinct")
    q, t = params.q, params.t
    coords = kernels.coords_table(q, params.d)
    e_coords = coords[_e_indices(e_set)]
    c = np.array(c_points, dtype=np.int64)
    diff = (e_coords[:, None, :] - c[None, :, :]) % q
    nrm = np.einsum("ijk,ijk->ij", diff, diff) % q
    bits = (nrm == t).astype(np.int64)
    masks = bits @ (1 << np.arange(m, dtype=np.int64))
    if kind == "single":
        return set(int(v) for v in np.unique(masks))
    if kind != "pair":
        raise ValueError(f"unknown hypothesis kind {kind!r}")
    tally = np.bincount(masks, minlength=1 << m)
    pats = set(int(v) for v in np.flatnonzero(tally) if tally[v] >= 2)
    vals = np.flatnonzero(tally)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            pats.add(int(vals[i]) & int(vals[j]))
    return pats


def is_shattered(e_set: PointSet, c_points: tuple[Point, ...],
                 params: FieldParams, kind: str = "pair") -> bool:
    return len(dichotomy_patterns(e_set, c_points, params, kind)) == 1 << len(c_points)


@dataclass(frozen=True)
class VcResult:
    value: int
    exact: bool
    shattered_set: tuple[Point, ...] | None
    degenerate: bool
    checks: int
    notes: str


def _support_masks(rows_int: list[int], full_domain: bool, kind: str) -> list[int]:
    n = len(rows_int)
    out: list[int] = []
    seen: set[int] = set()
    if kind == "single":
        source = rows_int[:1] if full_domain else rows_int
        for r in source:
            if r and r not in seen:
                seen.add(r)
                out.append(r)
        return out
    if full_domain:
        pairs = ((0, j) for j in range(1, n))
    else:
        pairs = ((i, j) for i in range(n) for j in range(i + 1, n))
    for i, j in pairs:
        s = rows_int[i] & rows_int[j]
        if s and s not in seen:
            seen.add(s)
            out.append(s)
    return out


def _mask_positions(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def vc_dimension(e_set: PointSet, params: FieldParams, kind: str = "pair",
                 workers: int | None = None,
                 max_checks: int | None = None) -> VcResult:
    """Exact VC dimension by candidate-restricted ladder search.

    Size s candidates are the s-subsets of pair supports (sphere supports for
    the single kind), deduplicated, in support-scan then lexicographic order.
    A level with no shattered candidate ends the search; max_checks caps the
    number of shatter checks, and hitting it makes the result a certified
    lower bound (exact=False).
    """
    if kind not in ("pair", "single"):
        raise ValueError(f"unknown hypothesis kind {kind!r}")
    need = 2 if kind == "pair" else 1
    if e_set.size < need:
        return VcResult(0, True, None, True, 0, "empty hypothesis class")
    if e_set.size > 4096:
        raise ValueError("family too large for exact search")
    rows = membership_rows(e_set, params, workers)
    rows_int = [int.from_bytes(rows[i].tobytes(), "little")
                for i in range(rows.shape[0])]
    supports = _support_masks(rows_int, e_set.is_full, kind)
    if not supports:
        return VcResult(0, True, None, False, 0, "all supports empty")
    value = 0
    witness: tuple[int, ...] | None = None
    checks = 0
    size = 1
    while size <= 16:
        found: tuple[int, ...] | None = None
        seen: set[tuple[int, ...]] = set()
        block: list[tuple[int, ...]] = []

        def flush(block: list[tuple[int, ...]]) -> tuple[int, ...] | None:
            def one(cand: tuple[int, ...]) -> bool:
                tally = kernels.mask_tally(rows, list(cand))
                return _shattered_from_tally(tally, len(cand), kind)

            results = parallel.run_items(one, block, workers)
            for cand, ok in zip(block, results):
                if ok:
                    return cand
            return None

        budget_hit = False
        for s_mask in supports:
            pos = _mask_positions(s_mask)
            if len(pos) < size:
                continue
            for comb in itertools.combinations(pos, size):
                if comb in seen:
                    continue
                seen.add(comb)
                block.append(comb)
                if len(block) >= _CHECK_BLOCK:
                    checks += len(block)
                    found = flush(block)
                    block = []
                    if found is not None:
                        break
                    if max_checks is not None and checks >= max_checks:
                        budget_hit = True
                        break
            if found is not None or budget_hit:
                break
        if found is None and not budget_hit and block:
            checks += len(block)
            found = flush(block)
        if budget_hit:
            pts = tuple(index_point(i, params) for i in witness) if witness else None
            return VcResult(value, False, pts, False, checks,
                            f"check budget exhausted at set size {size}")
        if found is None:
            break
        value = size
        witness = found
        size += 1
    pts = tuple(index_point(i, params) for i in witness) if witness else None
    note = "" if size <= 16 else "search capped at size 16"
    return VcResult(value, size <= 16, pts, False, checks, note)


class WitnessError(ValueError):
    """Witness construction failed; subset is the first label set with no
    usable hypothesis."""

    def __init__(self, subset: tuple[Point, ...], reason: str):
        super().__init__(f"no hypothesis for subset {subset}: {reason}")
        self.subset = subset
        self.reason = reason


@dataclass(frozen=True)
class ShatterWitness:
    """Explicit shattering of a prism center: one hypothesis per subset.

    assignment[mask] realizes the labeling where center point j gets label
    bit j of mask, for every mask in [0, 2^n).
    """

    set_points: tuple[Point, ...]
    kind: str
    assignment: tuple[Hypothesis, ...]

    def hypothesis_for(self, mask: int) -> Hypothesis:
        return self.assignment[mask]


def _sphere_masks_in(points: tuple[Point, ...], e_mask: int,
                     params: FieldParams) -> list[int]:
    return [sphere_points(p, params).mask & e_mask for p in points]


def shatter_witness(prism: Prism, e_set: PointSet, params: FieldParams,
                    kind: str = "pair") -> ShatterWitness:
    """Hypothesis assignment shattering the prism center, parameters drawn
    from E.

    Proper nonempty subsets A use the first point of E that is a common
    t-neighbor of A but of no other center point, paired with the second
    tail for the pair kind. The full set uses the tail pair (the second tail
    alone for the single kind). The empty set scans E in canonical order for
    the first hypothesis whose support misses the center entirely. Raises
    WitnessError naming the first subset with no usable hypothesis.
    """
    if kind not in ("pair", "single"):
        raise ValueError(f"unknown hypothesis kind {kind!r}")
    center = prism.center
    n = len(center)
    if n > 16:
        raise ValueError("witness construction limited to 16 center points")
    if len(set(center)) != n:
        raise WitnessError(center, "center points not distinct")
    y_tail, z_tail = prism.tails
    if kind == "pair":
        for tail in prism.tails:
            if not e_set.contains_point(tail, params):
                raise WitnessError(center, f"tail {tail} outside the family")
    elif not e_set.contains_point(z_tail, params):
        raise WitnessError(center, f"tail {z_tail} outside the family")
    e_mask = e_set.mask
    sph = _sphere_masks_in(center, e_mask, params)
    assignment: list[Hypothesis | None] = [None] * (1 << n)
    # empty set: first hypothesis in scan order missing the whole center
    empty = _all_zero_hypothesis(e_set, center, params, kind)
    if empty is None:
        raise WitnessError((), "no hypothesis misses the whole center")
    assignment[0] = empty
    # full set: the tails
    if kind == "pair":
        assignment[(1 << n) - 1] = pair_hypothesis(y_tail, z_tail, params)
    else:
        assignment[(1 << n) - 1] = single_hypothesis(z_tail, params)
    for mask in range(1, (1 << n) - 1):
        pole = e_mask
        cover = 0
        for j in range(n):
            if mask >> j & 1:
                pole &= sph[j]
            else:
                cover |= sph[j]
        avail = pole & ~cover
        if avail == 0:
            subset = tuple(center[j] for j in range(n) if mask >> j & 1)
            raise WitnessError(subset, "every common t-neighbor in E is "
                                       "covered by the complementary spheres")
        idx = (avail & -avail).bit_length() - 1
        pick = index_point(idx, params)
        if kind == "pair":
            # an uncovered pick is never a tail: tails neighbor all of the
            # center, so they are covered whenever the complement is nonempty
            assignment[mask] = pair_hypothesis(z_tail, pick, params)
        else:
            assignment[mask] = single_hypothesis(pick, params)
    return ShatterWitness(center, kind, tuple(assignment))  # type: ignore[arg-type]


def _all_zero_hypothesis(e_set: PointSet, center: tuple[Point, ...],
                         params: FieldParams, kind: str) -> Hypothesis | None:
    t = params.t
    pts = list(e_set.points(params))
    cmasks = []
    for u in pts:
        m = 0
        for j, c in enumerate(center):
            if distance(u, c, params) == t:
                m |= 1 << j
        cmasks.append(m)
    if kind == "single":
        for u, m in zip(pts, cmasks):
            if m == 0:
                return single_hypothesis(u, params)
        return None
    for i, u in enumerate(pts):
        for j, v in enumerate(pts):
            if i != j and cmasks[i] & cmasks[j] == 0:
                return pair_hypothesis(u, v, params)
    return None


def validate_witness(witness: ShatterWitness, params: FieldParams) -> bool:
    """Re-evaluate every hypothesis on every center point; True iff all
    2^n labelings come out exactly right."""
    center = witness.set_points
    for mask, h in enumerate(witness.assignment):
        for j, c in enumerate(center):
            if h.evaluate(c) != (mask >> j & 1):
                return False
    return True


@dataclass(frozen=True)
class AuditReport:
    mode: str
    set_size: int
    checked: int
    shattered: tuple[tuple[Point, ...], ...]
    truncated: bool


def upper_bound_audit(e_set: PointSet, params: FieldParams, set_size: int,
                      kind: str = "pair", mode: str = "exhaustive",
                      samples: int = 10_000, seed: int = 0,
                      workers: int | None = None,
                      max_checks: int | None = None) -> AuditReport:
    """Search for shattered sets of a given size over the whole grid without
    the candidate restriction: exhaustive over all subsets, or seeded random
    subsets. Complements the ladder as an independent check."""
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown audit mode {mode!r}")
    if set_size > 12:
        raise ValueError("audit limited to set size 12")
    rows = membership_rows(e_set, params, workers)
    domain = params.space_size
    hits: list[tuple[Point, ...]] = []
    checked = 0
    truncated = False
    batched = set_size <= 5
    block_cap = 4096 if batched else _CHECK_BLOCK

    def flush(block: list[tuple[int, ...]]) -> list[bool]:
        if batched:
            arr = np.asarray(block, dtype=np.int64)
            parts = parallel.run_chunks(
                lambda a, b: kernels.shatter_flags(rows, arr[a:b],
                                                   kind == "pair"),
                len(block), workers)
            return [bool(f) for f in np.concatenate(parts)]

        def check(cand: tuple[int, ...]) -> bool:
            tally = kernels.mask_tally(rows, list(cand))
            return _shattered_from_tally(tally, len(cand), kind)

        return parallel.run_items(check, block, workers)

    if mode == "exhaustive":
        source = itertools.combinations(range(domain), set_size)
    else:
        def sampled():
            for trial in range(samples):
                idx = seeds.sample_indices(domain, set_size,
                                           seeds.derive_seed(seed, trial))
                yield tuple(sorted(idx))

        source = sampled()
    block: list[tuple[int, ...]] = []
    for cand in source:
        block.append(cand)
        if len(block) >= block_cap:
            results = flush(block)
            checked += len(block)
            hits.extend(tuple(index_point(i, params) for i in c)
                        for c, ok in zip(block, results) if ok)
            block = []
            if max_checks is not None and checked >= max_checks:
                truncated = True
                break
    if block and not truncated:
        results = flush(block)
        checked += len(block)
        hits.extend(tuple(index_point(i, params) for i in c)
                    for c, ok in zip(block, results) if ok)
    return AuditReport(mode, set_size, checked, tuple(hits), truncated)
