"""Ambient space F_q^d with the sum-of-squares quadratic form.

Points are plain coordinate tuples with entries reduced mod q. Every point
also has a canonical integer index, the row-major radix-q encoding with the
first coordinate most significant; that index order is the deterministic
scan order used everywhere else in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

Point = tuple[int, ...]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldParams:
    """Instance parameters: odd prime modulus q, dimension d, radius class t.

    t indexes a sphere through the quadratic form, not a metric radius; there
    is no square root anywhere. t = 0 is rejected because the zero sphere is
    the isotropic cone and none of the counting machinery applies to it.
    """

    q: int
    d: int
    t: int

    def __post_init__(self):
        if not _is_prime(self.q) or self.q < 3:
            raise ValueError(f"q must be an odd prime >= 3, got {self.q}")
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")
        if not 1 <= self.t < self.q:
            raise ValueError(f"t must be a nonzero residue in [1, q), got {self.t}")

    @property
    def space_size(self) -> int:
        return self.q ** self.d


def reduce_point(p: Iterable[int], params: FieldParams) -> Point:
    return tuple(c % params.q for c in p)


def point_index(p: Point, params: FieldParams) -> int:
    """Row-major radix-q index in [0, q^d); first coordinate most significant."""
    if len(p) != params.d:
        raise ValueError(f"expected {params.d} coordinates, got {len(p)}")
    i = 0
    for c in p:
        if not 0 <= c < params.q:
            raise ValueError(f"coordinate {c} out of range [0, {params.q})")
        i = i * params.q + c
    return i


def index_point(i: int, params: FieldParams) -> Point:
    if not 0 <= i < params.space_size:
        raise ValueError(f"index {i} out of range [0, {params.space_size})")
    coords = []
    for _ in range(params.d):
        i, c = divmod(i, params.q)
        coords.append(c)
    return tuple(reversed(coords))


def norm(p: Point, params: FieldParams) -> int:
    """||p|| = sum of squared coordinates mod q."""
    return sum(c * c for c in p) % params.q


def dot(a: Point, b: Point, params: FieldParams) -> int:
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    return sum(x * y for x, y in zip(a, b)) % params.q


def point_sub(a: Point, b: Point, params: FieldParams) -> Point:
    return tuple((x - y) % params.q for x, y in zip(a, b))


def point_add(a: Point, b: Point, params: FieldParams) -> Point:
    return tuple((x + y) % params.q for x, y in zip(a, b))


def distance(a: Point, b: Point, params: FieldParams) -> int:
    """||a - b||; symmetric because squaring kills the sign."""
    return sum((x - y) ** 2 for x, y in zip(a, b)) % params.q


class PointSet:
    """Dense subset of F_q^d: an arbitrary-precision int used as a bitset.

    Bit i corresponds to the point with canonical index i. The AND/popcount
    pair on these masks is the workhorse of sphere intersections and pole
    computations.
    """

    __slots__ = ("universe", "mask", "_size")

    def __init__(self, universe: int, mask: int = 0):
        if mask < 0 or mask >> universe:
            raise ValueError("mask has bits outside the universe")
        self.universe = universe
        self.mask = mask
        self._size: int | None = None

    @classmethod
    def empty(cls, params: FieldParams) -> "PointSet":
        return cls(params.space_size)

    @classmethod
    def full(cls, params: FieldParams) -> "PointSet":
        n = params.space_size
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_indices(cls, indices: Iterable[int], params: FieldParams) -> "PointSet":
        n = params.space_size
        mask = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"index {i} out of range")
            mask |= 1 << i
        return cls(n, mask)

    @classmethod
    def from_points(cls, points: Iterable[Point], params: FieldParams) -> "PointSet":
        return cls.from_indices((point_index(p, params) for p in points), params)

    @property
    def size(self) -> int:
        if self._size is None:
            self._size = self.mask.bit_count()
        return self._size

    def __len__(self) -> int:
        return self.size

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.universe and (self.mask >> i) & 1 == 1

    def contains_point(self, p: Point, params: FieldParams) -> bool:
        return point_index(p, params) in self

    @property
    def is_full(self) -> bool:
        return self.size == self.universe

    def indices(self) -> Iterator[int]:
        """Ascending canonical indices of the members."""
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def points(self, params: FieldParams) -> Iterator[Point]:
        for i in self.indices():
            yield index_point(i, params)

    def intersection(self, other: "PointSet") -> "PointSet":
        self._check(other)
        return PointSet(self.universe, self.mask & other.mask)

    def union(self, other: "PointSet") -> "PointSet":
        self._check(other)
        return PointSet(self.universe, self.mask | other.mask)

    def difference(self, other: "PointSet") -> "PointSet":
        self._check(other)
        return PointSet(self.universe, self.mask & ~other.mask)

    def complement(self) -> "PointSet":
        return PointSet(self.universe, ~self.mask & ((1 << self.universe) - 1))

    def issubset(self, other: "PointSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def _check(self, other: "PointSet"):
        if self.universe != other.universe:
            raise ValueError("point sets live in different spaces")

    def __eq__(self, other) -> bool:
        return (isinstance(other, PointSet)
                and self.universe == other.universe
                and self.mask == other.mask)

    def __hash__(self):
        return hash((self.universe, self.mask))

    def __repr__(self):
        return f"PointSet(universe={self.universe}, size={self.size})"


def all_points(params: FieldParams) -> Iterator[Point]:
    for i in range(params.space_size):
        yield index_point(i, params)
