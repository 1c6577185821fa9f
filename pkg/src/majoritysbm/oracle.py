"""Exhaustive ground truth at tiny scale.

For at most 7 vertices every labelled graph can be enumerated, which
yields the exact one-day transition law of the plus-count chain, the
exact probability that day 1 flips nobody, and (via a linear solve) the
exact absorption probability of the full-resample variant.

The enumeration is factored through integer tallies: graphs are grouped
by (next plus count, #present same-class pairs, #present cross pairs).
Tallies do not depend on p and q, so they are cached and reused across
parameter grids, and the probability evaluation is a single fixed-order
tensor contraction -- making the mirror symmetry between a split and its
opposite-count split hold bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_VERTICES = 7

_CHUNK = 1 << 16


@lru_cache(maxsize=64)
def _day_tallies(total: int, j: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Integer graph tallies for a day starting from j plus vertices.

    Returns (count_tally, no_flip_tally, n_same, n_cross) where
    count_tally[next, a, b] is the number of labelled graphs with ``a``
    same-class and ``b`` cross pairs present whose update yields ``next``
    plus vertices, and no_flip_tally[a, b] counts the graphs whose update
    flips nobody.
    """
    if not 1 <= total <= MAX_VERTICES:
        raise ValueError(f"enumeration supports 1..{MAX_VERTICES} vertices")
    if not 0 <= j <= total:
        raise ValueError("invalid plus count")
    pairs = [(i, k) for i in range(total) for k in range(i + 1, total)]
    n_edges = len(pairs)
    old = np.where(np.arange(total) < j, 1, -1).astype(np.int64)
    same = np.array([old[i] == old[k] for i, k in pairs], dtype=bool)
    n_same = int(same.sum())
    n_cross = n_edges - n_same
    # class index of each pair among its own kind, for the (a, b) tally
    same_ids = np.flatnonzero(same)
    cross_ids = np.flatnonzero(~same)
    # incidence with plus/minus partner, for neighbour counts
    m_plus = np.zeros((n_edges, total), np.int64)
    m_minus = np.zeros((n_edges, total), np.int64)
    for e, (i, k) in enumerate(pairs):
        (m_plus if old[k] == 1 else m_minus)[e, i] = 1
        (m_plus if old[i] == 1 else m_minus)[e, k] = 1

    shape = (total + 1, n_same + 1, n_cross + 1)
    count_tally = np.zeros(shape, np.int64)
    no_flip = np.zeros(shape[1:], np.int64)
    n_graphs = 1 << n_edges
    shifts = np.arange(n_edges, dtype=np.uint32)
    for start in range(0, n_graphs, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, n_graphs), dtype=np.uint32)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        a = bits[:, same_ids].sum(axis=1)
        b = bits[:, cross_ids].sum(axis=1)
        plus_nb = bits @ m_plus
        minus_nb = bits @ m_minus
        new = np.where(
            plus_nb > minus_nb, 1, np.where(minus_nb > plus_nb, -1, old[None, :])
        )
        next_plus = (new == 1).sum(axis=1)
        flat = (next_plus * shape[1] + a) * shape[2] + b
        count_tally += np.bincount(
            flat, minlength=count_tally.size
        ).reshape(shape)
        still = (new == old[None, :]).all(axis=1)
        flat_nf = a[still] * shape[2] + b[still]
        no_flip += np.bincount(flat_nf, minlength=no_flip.size).reshape(shape[1:])
    return count_tally, no_flip, n_same, n_cross


def _class_weights(n_same: int, n_cross: int, p: float, q: float) -> np.ndarray:
    """Probability of a fixed graph with a same-class and b cross pairs."""
    a = np.arange(n_same + 1)
    b = np.arange(n_cross + 1)
    wp = p**a * (1.0 - p) ** (n_same - a)
    wq = q**b * (1.0 - q) ** (n_cross - b)
    return np.outer(wp, wq)


def enumerate_day_kernel_row(
    j: int, total: int, p: float, q: float
) -> np.ndarray:
    """Exact distribution of the next plus count after one day from j of total.

    Weights every labelled graph on the split (j, total - j) by its
    sampling probability and applies the simultaneous majority update.
    Within a class vertices are exchangeable, so the count is a
    sufficient statistic of the state.
    """
    tally, _, n_same, n_cross = _day_tallies(total, j)
    w = _class_weights(n_same, n_cross, p, q)
    # summed per entry in fixed order, so mirrored splits match bitwise
    return np.array([(tally[nxt] * w).sum() for nxt in range(total + 1)])


def no_flip_probability(j: int, total: int, p: float, q: float) -> float:
    """Exact probability that one day from j of total flips no vertex."""
    _, nf, n_same, n_cross = _day_tallies(total, j)
    return float((nf * _class_weights(n_same, n_cross, p, q)).sum())


@dataclass(frozen=True)
class TransitionKernel:
    """One-day transition law of the plus-count chain on {0, ..., N}."""

    matrix: np.ndarray  # (N+1, N+1), row j -> distribution of next count
    no_flip: np.ndarray  # (N+1,), P[day flips nobody | count j]

    @property
    def states(self) -> int:
        return self.matrix.shape[0]


def build_kernel(total: int, p: float, q: float) -> TransitionKernel:
    if not 1 <= total <= MAX_VERTICES:
        raise ValueError(f"kernel supports 1..{MAX_VERTICES} vertices")
    rows = [enumerate_day_kernel_row(j, total, p, q) for j in range(total + 1)]
    nf = [no_flip_probability(j, total, p, q) for j in range(total + 1)]
    return TransitionKernel(np.vstack(rows), np.array(nf))


@dataclass(frozen=True)
class AbsorptionResult:
    prob_plus_wins: float
    absorbing_reachable: bool
    expected_days: float


def exact_absorption(n: int, delta: int, p: float, q: float) -> AbsorptionResult:
    """Probability the full-resample count chain hits all-plus before all-minus.

    Builds the exact kernel and solves h = K h with h fixed to 1 at N and
    0 at 0, evaluated at the start count n + delta.  When some state
    reachable from the start cannot reach an absorbing state, absorption
    is not almost sure; the probability is then reported as NaN with
    ``absorbing_reachable`` False.
    """
    if n < 0 or delta < 0:
        raise ValueError("need n >= 0 and delta >= 0")
    total = 2 * n + delta
    if not 1 <= total <= MAX_VERTICES:
        raise ValueError(f"need 1 <= 2n + delta <= {MAX_VERTICES}")
    start = n + delta
    if start == total:
        return AbsorptionResult(1.0, True, 0.0)
    if start == 0:
        return AbsorptionResult(0.0, True, 0.0)
    kernel = build_kernel(total, p, q).matrix
    support = kernel > 0.0

    def closure(seed: set[int], edges) -> set[int]:
        seen = set(seed)
        frontier = list(seed)
        while frontier:
            v = frontier.pop()
            for w in edges(v):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen

    reachable = closure({start}, lambda v: np.flatnonzero(support[v]).tolist())
    can_absorb = closure(
        {0, total}, lambda v: np.flatnonzero(support[:, v]).tolist()
    )
    transient = sorted(v for v in reachable if v not in (0, total))
    if any(v not in can_absorb for v in transient):
        return AbsorptionResult(math.nan, False, math.nan)
    idx = {v: i for i, v in enumerate(transient)}
    q_mat = np.array([[kernel[v, w] for w in transient] for v in transient])
    b = np.array([kernel[v, total] for v in transient])
    a_mat = np.eye(len(transient)) - q_mat
    try:
        h = np.linalg.solve(a_mat, b)
        days = np.linalg.solve(a_mat, np.ones(len(transient)))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError(
            "absorption system singular despite reachability"
        ) from exc
    return AbsorptionResult(float(h[idx[start]]), True, float(days[idx[start]]))


def exact_halt_day1(n: int, delta: int, p: float, q: float) -> float:
    """Exact probability that the first update flips no vertex.

    Day 1 sees a fresh two-block graph in both variants, so this value
    is variant-independent.  Requires a non-unanimous start (n >= 1).
    """
    if n < 1:
        raise ValueError("need n >= 1 (non-unanimous start)")
    total = 2 * n + delta
    if total > MAX_VERTICES:
        raise ValueError(f"need 2n + delta <= {MAX_VERTICES}")
    return no_flip_probability(n + delta, total, p, q)


@dataclass(frozen=True)
class MCAgreement:
    z_score: float
    passed: bool


def mc_agreement(
    empirical_freq: float, replicates: int, exact: float, z_max: float = 4.0
) -> MCAgreement:
    """Normal-approximation z score of an empirical frequency vs truth."""
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    se = math.sqrt(exact * (1.0 - exact) / replicates)
    if se == 0.0:
        z = 0.0 if empirical_freq == exact else math.inf
    else:
        z = (empirical_freq - exact) / se
    return MCAgreement(z, abs(z) <= z_max)
