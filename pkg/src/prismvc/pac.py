"""Realizable PAC learning simulator for the sphere-intersection classes.

Examples are drawn from a distribution over the family E and labeled by a
target hypothesis from the class; the learner is empirical risk minimization
over the canonical hypothesis scan, returning the first minimizer. All
randomness flows through explicit seeds, so runs are reproducible and
independent of worker count.
"""
from __future__ import annotations

import bisect
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import parallel, seeds
from .field import FieldParams, Point, PointSet
from .graph import build_graph, two_path_counts
from .vc import Hypothesis, pair_hypothesis, single_hypothesis


class LearningTask:
    """A target concept plus a sampling distribution over the family E."""

    def __init__(self, params: FieldParams, e_set: PointSet,
                 target: Hypothesis, weights=None, seed: int = 0,
                 workers: int | None = None):
        if target.params != params:
            raise ValueError("target parameters do not match the task")
        for p in target.points:
            if not e_set.contains_point(p, params):
                raise ValueError(f"target point {p} outside the family")
        self.params = params
        self.e_set = e_set
        self.target = target
        self.kind = target.kind
        self.seed = seed
        self.points: list[Point] = list(e_set.points(params))
        self.n = len(self.points)
        self._pos = {p: i for i, p in enumerate(self.points)}
        graph = build_graph(e_set, params, workers)
        self._rows = graph.packed
        self._rows_int = graph.row_ints()
        self.target_support = self._support_int(target)
        if weights is None:
            self.weights = None
            self._cum = None
        else:
            w = self._normalize_weights(weights)
            self.weights = w
            self._cum = list(itertools.accumulate(w))

    def _normalize_weights(self, weights) -> list[float]:
        if isinstance(weights, dict):
            if set(weights) != set(self.points):
                raise ValueError("distribution keys must be exactly the family")
            w = [float(weights[p]) for p in self.points]
        else:
            w = [float(x) for x in weights]
            if len(w) != self.n:
                raise ValueError(f"distribution needs {self.n} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("distribution weights must be nonnegative")
        total = sum(w)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution weights sum to {total}, expected 1")
        return w

    def _support_int(self, h: Hypothesis) -> int:
        pos = [self._pos[p] for p in h.points]
        out = self._rows_int[pos[0]]
        for p in pos[1:]:
            out &= self._rows_int[p]
        return out

    def label(self, position: int) -> int:
        return self.target_support >> position & 1

    def draw_positions(self, m: int, seed: int) -> list[int]:
        rng = random.Random(seed)
        if self._cum is None:
            return [rng.randrange(self.n) for _ in range(m)]
        return [bisect.bisect_right(self._cum, rng.random() * self._cum[-1])
                for _ in range(m)]


def make_task(params: FieldParams, e_set: PointSet, target: Hypothesis,
              distribution=None, seed: int = 0,
              workers: int | None = None) -> LearningTask:
    return LearningTask(params, e_set, target, distribution, seed, workers)


def draw_sample(task: LearningTask, m: int, seed: int) -> list[tuple[Point, int]]:
    """m labeled examples (x, target(x)), x drawn iid from the task
    distribution; deterministic in the seed."""
    pos = task.draw_positions(m, seed)
    return [(task.points[p], task.label(p)) for p in pos]


def _bits_at(rows: np.ndarray, positions: list[int]) -> np.ndarray:
    if not positions:
        return np.zeros((rows.shape[0], 0), dtype=np.int64)
    pos = np.asarray(positions, dtype=np.int64)
    cols = (pos >> 6).astype(np.intp)
    shifts = (pos & 63).astype(np.uint64)
    return ((rows[:, cols] >> shifts) & np.uint64(1)).astype(np.int64)


def erm_positions(task: LearningTask, sample_positions: list[int]) -> tuple[int, ...]:
    """Positions in E of the first empirical risk minimizer under the
    canonical hypothesis scan (ordered pairs by position, or single points)."""
    labels = np.array([task.label(p) for p in sample_positions], dtype=np.int64)
    bits = _bits_at(task._rows, sample_positions)
    ones = bits[:, labels == 1]
    zeros = bits[:, labels == 0]
    n_ones = ones.shape[1]
    if task.kind == "single":
        errors = n_ones - ones.sum(axis=1) + zeros.sum(axis=1)
        return (int(np.argmin(errors)),)
    err = n_ones - ones @ ones.T + zeros @ zeros.T
    np.fill_diagonal(err, np.iinfo(np.int64).max)
    flat = int(np.argmin(err))
    return (flat // task.n, flat % task.n)


def erm_learn(sample: list[tuple[Point, int]], task: LearningTask) -> Hypothesis:
    """First hypothesis in canonical scan order minimizing sample error.

    The sample must be consistent with the task labeling (realizable runs);
    labels are re-derived from positions, so only the points matter.
    """
    spos = [task._pos[x] for x, _ in sample]
    pos = erm_positions(task, spos)
    if task.kind == "single":
        return single_hypothesis(task.points[pos[0]], task.params)
    return pair_hypothesis(task.points[pos[0]], task.points[pos[1]], task.params)


def disagreement_count(h: Hypothesis, task: LearningTask) -> int:
    """Number of family points where h and the target label differently."""
    return (task._support_int(h) ^ task.target_support).bit_count()


def true_loss(h: Hypothesis, task: LearningTask) -> Fraction | float:
    """Exact distribution mass of the disagreement region: a Fraction under
    the uniform distribution, a float sum of weights otherwise."""
    diff = task._support_int(h) ^ task.target_support
    if task.weights is None:
        return Fraction(diff.bit_count(), task.n)
    total = 0.0
    while diff:
        low = diff & -diff
        total += task.weights[low.bit_length() - 1]
        diff ^= low
    return total


def mc_loss_estimate(h: Hypothesis, task: LearningTask, n_draws: int,
                     seed: int) -> float:
    """Monte Carlo frequency of disagreement with the target."""
    pos = task.draw_positions(n_draws, seed)
    sup = task._support_int(h)
    bad = sum(1 for p in pos if (sup >> p & 1) != task.label(p))
    return bad / n_draws


def loss_ceiling(task: LearningTask) -> Fraction:
    """Uniform-distribution cap on any pairwise loss in the class: twice the
    largest hypothesis support over |E|. Learned and target hypotheses can
    only disagree inside the union of their supports."""
    if task.weights is not None:
        raise ValueError("loss ceiling is defined for the uniform distribution")
    if task.kind == "single":
        biggest = max(r.bit_count() for r in task._rows_int)
    else:
        graph = build_graph(task.e_set, task.params)
        counts = two_path_counts(graph)
        biggest = counts.max_offdiagonal()
    return Fraction(2 * biggest, task.n)


@dataclass(frozen=True)
class SweepPoint:
    m: int
    trials: int
    successes: int
    max_loss: Fraction | float

    @property
    def success_rate(self) -> Fraction:
        return Fraction(self.successes, self.trials)


@dataclass(frozen=True)
class SweepResult:
    epsilon: float
    delta: float
    points: tuple[SweepPoint, ...]
    m_hat: int | None
    exceeded_grid: bool
    max_loss: Fraction | float

    @property
    def grid(self) -> tuple[int, ...]:
        return tuple(p.m for p in self.points)


def sample_complexity_sweep(task: LearningTask, epsilon: float, delta: float,
                            m_grid: list[int], trials: int,
                            workers: int | None = None) -> SweepResult:
    """Empirical sample complexity: for each m, the frequency over seeded
    trials that ERM's true loss is at most epsilon. m_hat is the smallest
    grid m whose frequency reaches 1 - delta; if none does, the result says
    so instead of failing. Trial seeds derive from (task seed, m, trial), so
    the outcome does not depend on worker count."""
    if not m_grid:
        raise ValueError("empty sample size grid")
    if sorted(m_grid) != list(m_grid):
        raise ValueError("sample size grid must be ascending")
    pts = []
    overall_max: Fraction | float = Fraction(0)
    for m in m_grid:
        def run(a: int, b: int) -> tuple[int, Fraction | float]:
            succ = 0
            worst: Fraction | float = Fraction(0)
            for trial in range(a, b):
                spos = task.draw_positions(
                    m, seeds.derive_seed(task.seed, m, trial))
                pos = erm_positions(task, spos)
                if task.kind == "single":
                    h = single_hypothesis(task.points[pos[0]], task.params)
                else:
                    h = pair_hypothesis(task.points[pos[0]],
                                        task.points[pos[1]], task.params)
                loss = true_loss(h, task)
                if loss <= epsilon:
                    succ += 1
                if loss > worst:
                    worst = loss
            return succ, worst

        parts = parallel.run_chunks(run, trials, workers)
        successes = sum(p[0] for p in parts)
        worst = max(p[1] for p in parts)
        pts.append(SweepPoint(m, trials, successes, worst))
        if worst > overall_max:
            overall_max = worst
    m_hat = None
    threshold = 1 - Fraction(delta)
    for p in pts:
        if Fraction(p.successes, p.trials) >= threshold:
            m_hat = p.m
            break
    return SweepResult(epsilon, delta, tuple(pts), m_hat,
                       m_hat is None, overall_max)
