"""Synchronous majority updates and the day loop for both model variants.

Day indexing: day 0 is the initial configuration; the update computed
from graph G(t-1) and opinions W(t-1) produces W(t), the state "at day
t".  An opinion wins at day t if W(t) is unanimous and no earlier W was.
In the non-Markovian variant a day whose update flips nobody freezes the
process forever (nothing is resampled), which is reported as Halt at
that day; the Markovian variant resamples the whole graph each day, so a
flip-free day carries no such consequence.

Three interchangeable executors produce the same process law:

* a reference loop over :class:`~majoritysbm.graph.GraphState` objects,
  used by tests and available via ``reference=True``;
* a Markovian fast path that tracks only the opinion counts (within each
  class vertices are exchangeable, so a fresh block graph per day is
  sampled directly in block layout: +/+ pairs, -/- pairs, cross pairs);
* a non-Markovian engine that keeps the adjacency matrix and neighbour
  counts incrementally.  It consumes stream draws in exactly the order
  of the public resampling operations, so given the same stream it
  reproduces the reference loop bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .graph import (
    BlockParams,
    GraphState,
    OpinionVector,
    _pair_bernoulli,
    _triu_pairs,
    resample_full,
    resample_touched,
    sample_sbm,
    touched_pairs,
)
from .rng import RngStream, needs_refinement, prob_digits


class ModelVariant(Enum):
    MARKOVIAN = "markovian"
    NON_MARKOVIAN = "non-markovian"


class OutcomeKind(Enum):
    PLUS_WINS = "plus_wins"
    MINUS_WINS = "minus_wins"
    HALT = "halt"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Outcome:
    """Terminal classification of a run.

    ``day`` is the day index of the deciding state; for TIMEOUT it holds
    the max_rounds budget that was exhausted.
    """

    kind: OutcomeKind
    day: int

    @property
    def is_consensus(self) -> bool:
        return self.kind in (OutcomeKind.PLUS_WINS, OutcomeKind.MINUS_WINS)


@dataclass
class Trajectory:
    """Per-day records; index t holds the state at day t (day 0 = initial)."""

    plus_counts: np.ndarray
    flips_minus_to_plus: np.ndarray
    flips_plus_to_minus: np.ndarray

    @property
    def last_day(self) -> int:
        return len(self.plus_counts) - 1

    def validate(self) -> None:
        d = np.diff(self.plus_counts)
        expect = self.flips_minus_to_plus[1:] - self.flips_plus_to_minus[1:]
        if not np.array_equal(d, expect):
            raise AssertionError("count increments inconsistent with flips")


def majority_step(graph: GraphState, opinions: OpinionVector) -> OpinionVector:
    """Simultaneous majority update; ties (including isolated vertices) keep."""
    w = opinions.values
    if w.size != graph.vertex_count:
        raise ValueError("opinion vector length must match the graph")
    plus_mask = w == 1
    plus_nb = graph.adj[:, plus_mask].sum(axis=1, dtype=np.int64)
    minus_nb = graph.adj[:, ~plus_mask].sum(axis=1, dtype=np.int64)
    new = np.where(plus_nb > minus_nb, 1, np.where(minus_nb > plus_nb, -1, w))
    return OpinionVector(new.astype(np.int8))


def classify_state(
    opinions: OpinionVector,
    flips_this_day: int | None,
    variant: ModelVariant,
    day: int,
) -> Outcome | None:
    """Terminal outcome for the state at ``day``, or None if the run goes on.

    ``flips_this_day`` is the number of opinions changed by the update
    that produced this state (None at day 0, where no update happened).
    """
    plus = opinions.plus_count
    n = len(opinions)
    if plus == n:
        return Outcome(OutcomeKind.PLUS_WINS, day)
    if plus == 0:
        return Outcome(OutcomeKind.MINUS_WINS, day)
    if flips_this_day == 0 and variant is ModelVariant.NON_MARKOVIAN:
        return Outcome(OutcomeKind.HALT, day)
    return None


@dataclass
class RunSummary:
    """Aggregate view of one run, enough for experiment reports."""

    outcome: Outcome
    last_day: int
    had_plus_to_minus_flip: bool


def run_dynamics(
    variant: ModelVariant,
    m: int,
    n: int,
    params: BlockParams,
    max_rounds: int,
    stream: RngStream,
    reference: bool = False,
) -> tuple[Outcome, Trajectory]:
    """Run one replicate from m '+' and n '-' vertices; see module docstring."""
    outcome, traj, _ = _run(variant, m, n, params, max_rounds, stream,
                            collect=True, reference=reference)
    return outcome, traj


def run_summary(
    variant: ModelVariant,
    m: int,
    n: int,
    params: BlockParams,
    max_rounds: int,
    stream: RngStream,
) -> RunSummary:
    """Like :func:`run_dynamics` but without storing the trajectory."""
    outcome, _, had_pm = _run(variant, m, n, params, max_rounds, stream,
                              collect=False, reference=False)
    return RunSummary(outcome, outcome.day, had_pm)


def _run(variant, m, n, params, max_rounds, stream, collect, reference):
    if m < 0 or n < 0 or m + n < 1:
        raise ValueError("need m >= 0, n >= 0, m + n >= 1")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")

    total = m + n
    plus = m
    records = [(plus, 0, 0)] if collect else None
    had_pm = False

    if plus in (0, total):
        kind = OutcomeKind.PLUS_WINS if plus == total else OutcomeKind.MINUS_WINS
        return Outcome(kind, 0), _traj(records), had_pm

    if reference:
        stepper = _make_reference(variant, m, n, params, stream)
    elif variant is ModelVariant.MARKOVIAN:
        stepper = _MarkovianCounts(m, n, params, stream)
    else:
        stepper = _NonMarkovianEngine(m, n, params, stream)

    outcome = None
    for day in range(1, max_rounds + 1):
        f_mp, f_pm = stepper.step()
        plus += f_mp - f_pm
        had_pm = had_pm or f_pm > 0
        if collect:
            records.append((plus, f_mp, f_pm))
        if plus == total:
            outcome = Outcome(OutcomeKind.PLUS_WINS, day)
        elif plus == 0:
            outcome = Outcome(OutcomeKind.MINUS_WINS, day)
        elif f_mp == f_pm == 0 and variant is ModelVariant.NON_MARKOVIAN:
            outcome = Outcome(OutcomeKind.HALT, day)
        if outcome is not None:
            break
        stepper.commit()
    if outcome is None:
        outcome = Outcome(OutcomeKind.TIMEOUT, max_rounds)
    return outcome, _traj(records), had_pm


def _traj(records):
    if records is None:
        return None
    arr = np.asarray(records, dtype=np.int64)
    return Trajectory(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy())


class _ReferenceBase:
    """Object-level loop over GraphState/OpinionVector, for validation."""

    def __init__(self, m, n, params, stream):
        self.params = params
        self.stream = stream
        self.graph, self.opinions = sample_sbm(m, n, params, stream)
        self.pending = None

    def step(self):
        new = majority_step(self.graph, self.opinions)
        f_mp = int(np.count_nonzero((self.opinions.values == -1) & (new.values == 1)))
        f_pm = int(np.count_nonzero((self.opinions.values == 1) & (new.values == -1)))
        self.pending = new
        return f_mp, f_pm


class _MarkovianReference(_ReferenceBase):
    def commit(self):
        self.opinions = self.pending
        self.graph = resample_full(self.opinions, self.params, self.stream)


class _NonMarkovianReference(_ReferenceBase):
    def commit(self):
        self.graph = resample_touched(
            self.graph, self.opinions, self.pending, self.params, self.stream
        )
        self.opinions = self.pending


def _make_reference(variant, m, n, params, stream):
    cls = (
        _MarkovianReference
        if variant is ModelVariant.MARKOVIAN
        else _NonMarkovianReference
    )
    return cls(m, n, params, stream)


@lru_cache(maxsize=128)
def _triu_mask(n: int) -> np.ndarray:
    return np.triu(np.ones((n, n), np.bool_), 1)


@lru_cache(maxsize=256)
def _square_threshold(n: int, d0: int) -> np.ndarray:
    """First-digit thresholds for an n x n block; zero at/below the diagonal."""
    return np.where(_triu_mask(n), np.uint8(min(d0, 255)), np.uint8(0))


class _MarkovianCounts:
    """Markovian day sampler over opinion counts only.

    Each day draws a fresh block graph for the current counts (m, k).
    Draw layout: one byte per cell of the m*m block, then the k*k block,
    then the m*k cross block, row-major; only cells above an intra
    block's diagonal decide edges, the rest are padding.  Refinement
    rounds (for non-dyadic probabilities) run over unresolved positions
    in ascending layout order.  Vertices inside a class are
    exchangeable, so the flip counts are all the day loop needs.
    """

    _SMALL = 20

    def __init__(self, m, n, params, stream):
        self.m, self.k = m, n
        self.params = params
        self.stream = stream
        self._f = (0, 0)

    def step(self):
        m, k = self.m, self.k
        small = m + k <= self._SMALL
        f = _day_flips(self.stream, m, k, self.params, small)
        self._f = f
        return f

    def commit(self):
        f_mp, f_pm = self._f
        self.m += f_mp - f_pm
        self.k -= f_mp - f_pm


def _day_flips(stream, m, k, params, small):
    dig_p = prob_digits(params.p)
    dig_q = prob_digits(params.q)
    if small:
        return _day_flips_scalar(stream, m, k, dig_p, dig_q)
    am, ak = m * m, k * k
    total = am + ak + m * k
    buf = stream.bytes(total)
    out = np.empty(total, np.bool_)
    ep = out[:am].reshape(m, m)
    ek = out[am : am + ak].reshape(k, k)
    ec = out[am + ak :].reshape(m, k)
    ep[:] = buf[:am].reshape(m, m) < _square_threshold(m, dig_p[0])
    ek[:] = buf[am : am + ak].reshape(k, k) < _square_threshold(k, dig_p[0])
    ec[:] = buf[am + ak :].reshape(m, k) < np.uint8(min(dig_q[0], 255))
    if dig_p[0] >= 256:
        ep |= _triu_mask(m)
        ek |= _triu_mask(k)
    if dig_q[0] >= 256:
        ec[:] = True
    refine_p = needs_refinement(dig_p)
    refine_q = needs_refinement(dig_q)
    if refine_p or refine_q:
        pend_pos, pend_cls = [], []
        if refine_p:
            bp = (buf[:am].reshape(m, m) == dig_p[0]) & _triu_mask(m)
            bk = (buf[am : am + ak].reshape(k, k) == dig_p[0]) & _triu_mask(k)
            pos = np.flatnonzero(bp.reshape(-1))
            pend_pos.append(pos)
            pend_cls.append(np.ones(pos.size, np.uint8))
            pos = np.flatnonzero(bk.reshape(-1)) + am
            pend_pos.append(pos)
            pend_cls.append(np.ones(pos.size, np.uint8))
        if refine_q:
            pos = np.flatnonzero(buf[am + ak :] == dig_q[0]) + am + ak
            pend_pos.append(pos)
            pend_cls.append(np.zeros(pos.size, np.uint8))
        pos = np.concatenate(pend_pos)
        cls = np.concatenate(pend_cls)
        digit_table = np.array([dig_q[1:], dig_p[1:]], dtype=np.uint8)
        level = 1
        while pos.size and level < 8:
            ref = stream.bytes(pos.size)
            d = digit_table[cls, level - 1]
            out[pos[ref < d]] = True
            keep = ref == d
            pos, cls = pos[keep], cls[keep]
            level += 1
    deg_p = np.count_nonzero(ep, axis=0) + np.count_nonzero(ep, axis=1)
    deg_m = np.count_nonzero(ek, axis=0) + np.count_nonzero(ek, axis=1)
    s = np.count_nonzero(ec, axis=1)
    t = np.count_nonzero(ec, axis=0)
    f_pm = int(np.count_nonzero(s > deg_p))
    f_mp = int(np.count_nonzero(t > deg_m))
    return f_mp, f_pm


def _day_flips_scalar(stream, m, k, dig_p, dig_q):
    """Python-integer replica of _day_flips for tiny vertex counts.

    Consumes the stream identically: same layout, same refinement
    discipline, so the two paths are interchangeable at any size.
    """
    am, ak = m * m, k * k
    total = am + ak + m * k
    buf = stream.bytes(total).tobytes()
    deg_p = [0] * m
    deg_m = [0] * k
    cr_p = [0] * m
    cr_m = [0] * k
    pending = []  # (position, class) in ascending position order

    def decide(pos, digits, cls):
        b = buf[pos]
        d0 = digits[0]
        if b < d0:
            return 1
        if b == d0 and needs_refinement(digits):
            pending.append((pos, cls))
            return 0
        return -1

    hits = {}
    for i in range(m):
        base = i * m
        for j in range(i + 1, m):
            r = decide(base + j, dig_p, 1)
            if r == 1:
                deg_p[i] += 1
                deg_p[j] += 1
            elif r == 0:
                hits[base + j] = ("pp", i, j)
    for i in range(k):
        base = am + i * k
        for j in range(i + 1, k):
            r = decide(base + j, dig_p, 1)
            if r == 1:
                deg_m[i] += 1
                deg_m[j] += 1
            elif r == 0:
                hits[base + j] = ("mm", i, j)
    for i in range(m):
        base = am + ak + i * k
        for j in range(k):
            r = decide(base + j, dig_q, 0)
            if r == 1:
                cr_p[i] += 1
                cr_m[j] += 1
            elif r == 0:
                hits[base + j] = ("pm", i, j)
    digit_rows = (dig_q, dig_p)
    level = 1
    while pending and level < 8:
        ref = stream.bytes(len(pending)).tobytes()
        nxt = []
        for t_idx, (pos, cls) in enumerate(pending):
            d = digit_rows[cls][level]
            b = ref[t_idx]
            if b < d:
                kind, i, j = hits[pos]
                if kind == "pp":
                    deg_p[i] += 1
                    deg_p[j] += 1
                elif kind == "mm":
                    deg_m[i] += 1
                    deg_m[j] += 1
                else:
                    cr_p[i] += 1
                    cr_m[j] += 1
            elif b == d:
                nxt.append((pos, cls))
        pending = nxt
        level += 1
    f_pm = sum(1 for i in range(m) if cr_p[i] > deg_p[i])
    f_mp = sum(1 for j in range(k) if cr_m[j] > deg_m[j])
    return f_mp, f_pm


class _NonMarkovianEngine:
    """Incremental adjacency + neighbour counts for the touched-pair rule.

    Draw consumption matches sample_sbm followed by resample_touched per
    day, so the engine and the reference loop coincide exactly on a
    shared stream.
    """

    def __init__(self, m, n, params, stream):
        self.params = params
        self.stream = stream
        total = m + n
        self.n_vertices = total
        self.w = OpinionVector.from_counts(m, n).values.copy()
        r, c = _triu_pairs(total)
        same = self.w[r] == self.w[c]
        bits = _pair_bernoulli(stream, same, params).view(np.uint8)
        adj = np.zeros((total, total), np.uint8)
        start = 0
        for i in range(total - 1):
            row_len = total - 1 - i
            adj[i, i + 1 :] = bits[start : start + row_len]
            start += row_len
        adj |= adj.T.copy()
        self.adj = adj
        self.nb_plus = adj[:, :m].sum(axis=1, dtype=np.int64)
        self.nb_minus = adj[:, m:].sum(axis=1, dtype=np.int64)
        self._new_w = None

    def step(self):
        w = self.w
        new = np.where(
            self.nb_plus > self.nb_minus,
            np.int8(1),
            np.where(self.nb_minus > self.nb_plus, np.int8(-1), w),
        ).astype(np.int8)
        self._new_w = new
        f_mp = int(np.count_nonzero((w == -1) & (new == 1)))
        f_pm = int(np.count_nonzero((w == 1) & (new == -1)))
        return f_mp, f_pm

    def commit(self):
        new = self._new_w
        flipped = np.flatnonzero(new != self.w)
        if flipped.size == 0:
            self.w = new
            return
        adj = self.adj
        # counts re-labelled for the flipped vertices (old edges)
        to_plus = flipped[self.w[flipped] == -1]
        to_minus = flipped[self.w[flipped] == 1]
        shift = adj[to_plus].sum(axis=0, dtype=np.int64) - adj[to_minus].sum(
            axis=0, dtype=np.int64
        )
        self.nb_plus += shift
        self.nb_minus -= shift
        # resample every pair with a flipped endpoint, under new opinions
        i_arr, j_arr = touched_pairs(self.n_vertices, flipped)
        same = new[i_arr] == new[j_arr]
        bits = _pair_bernoulli(self.stream, same, self.params).view(np.uint8)
        old = adj[i_arr, j_arr]
        delta = bits.astype(np.int64) - old.astype(np.int64)
        nz = np.flatnonzero(delta)
        if nz.size:
            i_nz, j_nz, d_nz = i_arr[nz], j_arr[nz], delta[nz]
            j_plus = new[j_nz] == 1
            i_plus = new[i_nz] == 1
            nb = self.n_vertices
            self.nb_plus += np.bincount(
                i_nz[j_plus], weights=d_nz[j_plus], minlength=nb
            ).astype(np.int64)
            self.nb_minus += np.bincount(
                i_nz[~j_plus], weights=d_nz[~j_plus], minlength=nb
            ).astype(np.int64)
            self.nb_plus += np.bincount(
                j_nz[i_plus], weights=d_nz[i_plus], minlength=nb
            ).astype(np.int64)
            self.nb_minus += np.bincount(
                j_nz[~i_plus], weights=d_nz[~i_plus], minlength=nb
            ).astype(np.int64)
        adj[i_arr, j_arr] = bits
        adj[j_arr, i_arr] = bits
        self.w = new

    def check_counts(self):
        """Recompute neighbour counts from scratch (test hook)."""
        plus_mask = self.w == 1
        nb_plus = self.adj[:, plus_mask].sum(axis=1, dtype=np.int64)
        nb_minus = self.adj[:, ~plus_mask].sum(axis=1, dtype=np.int64)
        return np.array_equal(nb_plus, self.nb_plus) and np.array_equal(
            nb_minus, self.nb_minus
        )
