"""Distance graphs and chain counting.

G_t(E) has vertex set E and an edge where the difference of the endpoints
has norm t. Adjacency lives in packed bitset rows over vertex positions;
row AND plus popcount is the inner loop of everything downstream (pair
supports, prism counts, shatter checks).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels, parallel
from .field import FieldParams, Point, PointSet, index_point, point_index

# rational sandwich for ln 2; HI is used wherever an inequality must be
# certified, which only ever tightens the certified direction
_LOG2_LO = Fraction(6931471805599453, 10 ** 16)
_LOG2_HI = Fraction(6931471805599454, 10 ** 16)


class DistanceGraph:
    """Bitset adjacency over the vertex list (ascending canonical index)."""

    def __init__(self, params: FieldParams, vertex_indices: np.ndarray,
                 packed_rows: np.ndarray, is_full: bool):
        self.params = params
        self.vertex_indices = vertex_indices
        self.packed = packed_rows
        self.is_full = is_full
        self.pos = {int(v): i for i, v in enumerate(vertex_indices)}
        self._row_ints: list[int] | None = None

    @property
    def n(self) -> int:
        return len(self.vertex_indices)

    def vertex_point(self, pos: int) -> Point:
        return index_point(int(self.vertex_indices[pos]), self.params)

    def position_of(self, p: Point) -> int:
        i = point_index(p, self.params)
        if i not in self.pos:
            raise KeyError(f"{p} is not a vertex")
        return self.pos[i]

    def row_ints(self) -> list[int]:
        """Adjacency rows as Python ints (bit j = vertex position j)."""
        if self._row_ints is None:
            self._row_ints = [int.from_bytes(r.tobytes(), "little")
                              for r in self.packed]
        return self._row_ints

    def degree(self, pos: int) -> int:
        return self.row_ints()[pos].bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.row_ints()]

    def common_neighbors_mask(self, i: int, j: int) -> int:
        rows = self.row_ints()
        return rows[i] & rows[j]


def build_graph(e_set: PointSet, params: FieldParams,
                workers: int | None = None) -> DistanceGraph:
    if e_set.universe != params.space_size:
        raise ValueError("point set does not match the parameters")
    verts = np.fromiter(e_set.indices(), dtype=np.int64, count=e_set.size)
    coords = kernels.coords_table(params.q, params.d)[verts]
    n = len(verts)
    if n == 0:
        return DistanceGraph(params, verts, np.zeros((0, 0), dtype=np.uint64),
                             e_set.is_full)
    blocks = parallel.run_chunks(
        lambda a, b: kernels.distance_rows(coords, params.q, params.t, a, b),
        n, workers)
    return DistanceGraph(params, verts, np.vstack(blocks), e_set.is_full)


class PairPathCounts:
    """k(x, y) = number of common neighbors, for ordered vertex pairs.

    The diagonal entry k(x, x) equals deg(x); with that convention the total
    over all ordered pairs, diagonal included, is exactly the 2-chain count.
    The pair map the API exposes is the off-diagonal part.
    """

    def __init__(self, graph: DistanceGraph, matrix: np.ndarray):
        self.graph = graph
        self.matrix = matrix

    def k(self, x: Point, y: Point) -> int:
        i = self.graph.position_of(x)
        j = self.graph.position_of(y)
        if i == j:
            raise ValueError("pair counts are defined for distinct points")
        return int(self.matrix[i, j])

    def total_ordered_with_diagonal(self) -> int:
        return int(self.matrix.sum())

    def max_offdiagonal(self) -> int:
        if self.graph.n < 2:
            return 0
        m = self.matrix.copy()
        np.fill_diagonal(m, -1)
        return int(m.max())

    def support_bound_check(self) -> tuple[int, int, bool] | None:
        """max k(x,y) against 2 q^(d-2); meaningful for the full space only."""
        if not self.graph.is_full:
            return None
        p = self.graph.params
        bound = 2 * p.q ** (p.d - 2)
        mx = self.max_offdiagonal()
        return mx, bound, mx <= bound


def two_path_counts(graph: DistanceGraph,
                    workers: int | None = None) -> PairPathCounts:
    n = graph.n
    if n == 0:
        return PairPathCounts(graph, np.zeros((0, 0), dtype=np.int64))
    blocks = parallel.run_chunks(
        lambda a, b: kernels.common_neighbor_counts(graph.packed, a, b),
        n, workers)
    return PairPathCounts(graph, np.vstack(blocks))


def gamma_k(graph: DistanceGraph, k: int, workers: int | None = None) -> int:
    """Number of (k+1)-tuples with consecutive entries adjacent. Exact.

    Dynamic programming over vertex counts in plain Python ints, so there is
    no overflow ceiling; chunks of the update are independent reads of the
    previous vector.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    rows = graph.row_ints()
    n = graph.n
    counts = [1] * n
    for _ in range(k):
        prev = counts

        def step(a: int, b: int) -> list[int]:
            out = []
            for i in range(a, b):
                m = rows[i]
                s = 0
                while m:
                    low = m & -m
                    s += prev[low.bit_length() - 1]
                    m ^= low
                out.append(s)
            return out

        parts = parallel.run_chunks(step, n, workers)
        counts = [c for part in parts for c in part]
    return sum(counts)


@dataclass(frozen=True)
class GammaCheck:
    k: int
    gamma: int
    main_term: Fraction
    discrepancy: Fraction
    bound: float
    hypothesis_met: bool
    bound_holds: bool
    gamma2_lower_holds: bool | None


def gamma_bound_check(graph: DistanceGraph, k: int,
                      workers: int | None = None) -> GammaCheck:
    """Chain count against the main term |E|^(k+1)/q^k with discrepancy window.

    The window is (2k/log 2) q^((d+1)/2) |E|^k / q^k, certified with exact
    rational arithmetic (squaring removes the square root for even d+1).
    When the size hypothesis |E| > (2k/log 2) q^((d+1)/2) fails the check
    still reports whether the window happens to hold, flagged as unmet.
    """
    p = graph.params
    e = graph.n
    g = gamma_k(graph, k, workers)
    qk = p.q ** k
    main = Fraction(e ** (k + 1), qk)
    disc = g - main
    # |disc| * q^k is an integer; certify (|disc| q^k log2)^2 <= 4 k^2 q^(d+1) e^(2k)
    dint = abs(g * qk - e ** (k + 1))
    rhs = 4 * k * k * p.q ** (p.d + 1) * e ** (2 * k)
    bound_holds = (dint * _LOG2_HI) ** 2 <= rhs
    hyp = (e * _LOG2_LO) ** 2 > 4 * k * k * p.q ** (p.d + 1) if k else False
    bound_float = float(2 * k * p.q ** ((p.d + 1) / 2) * e ** k / qk / 0.6931471805599453)
    g2_lower = None
    if k == 2:
        g2_lower = Fraction(g) >= Fraction(e ** 3, 2 * p.q ** 2)
    return GammaCheck(k, g, main, disc, bound_float, hyp, bound_holds, g2_lower)
