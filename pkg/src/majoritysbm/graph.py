"""Two-community random graphs and their evolution rules.

Vertices are indexed 0..N-1.  A graph is stored as a dense symmetric
0/1 matrix (no self loops), which keeps edge queries O(1) and lets the
resampling rules run as vectorised byte comparisons.  All resampling
consumes stream bytes in row-major order over pairs ``i < j``; see
:mod:`majoritysbm.rng` for the byte-to-Bernoulli rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import RngStream, needs_refinement, prob_digits


@dataclass(frozen=True)
class BlockParams:
    """Connection probabilities: ``p`` within an opinion class, ``q`` across."""

    p: float
    q: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError(f"BlockParams out of range: p={self.p}, q={self.q}")
        if self.q >= self.p:
            warnings.warn(
                f"q={self.q} >= p={self.p}: outside the assortative regime the "
                "threshold formulas describe; the simulator runs regardless",
                UserWarning,
                stacklevel=2,
            )


class OpinionVector:
    """Per-vertex opinions in {+1, -1}."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.int8)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("opinions must be a nonempty 1-d sequence")
        if not np.isin(arr, (-1, 1)).all():
            raise ValueError("opinions must be +1 or -1")
        self.values = arr

    @classmethod
    def from_counts(cls, plus: int, minus: int) -> "OpinionVector":
        """First ``plus`` vertices hold +1, the remaining ``minus`` hold -1."""
        if plus < 0 or minus < 0 or plus + minus == 0:
            raise ValueError("need plus >= 0, minus >= 0, plus + minus >= 1")
        return cls(np.concatenate([np.ones(plus, np.int8), -np.ones(minus, np.int8)]))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, OpinionVector) and np.array_equal(
            self.values, other.values
        )

    @property
    def plus_count(self) -> int:
        return int(np.count_nonzero(self.values == 1))

    @property
    def minus_count(self) -> int:
        return self.values.size - self.plus_count

    def negated(self) -> "OpinionVector":
        return OpinionVector(-self.values)

    def __repr__(self) -> str:
        return f"OpinionVector(plus={self.plus_count}, minus={self.minus_count})"


class GraphState:
    """Undirected simple graph as a dense symmetric adjacency matrix."""

    __slots__ = ("adj",)

    def __init__(self, adj: np.ndarray):
        adj = np.asarray(adj, dtype=np.uint8)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] == 0:
            raise ValueError("adjacency must be a nonempty square matrix")
        self.adj = adj

    @classmethod
    def empty(cls, n: int) -> "GraphState":
        return cls(np.zeros((n, n), np.uint8))

    @property
    def vertex_count(self) -> int:
        return self.adj.shape[0]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j])

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def degree(self, v: int) -> int:
        return int(self.adj[v].sum())

    def copy(self) -> "GraphState":
        return GraphState(self.adj.copy())

    def validate(self) -> None:
        """Assert the structural invariants (symmetry, no self loops)."""
        if not np.array_equal(self.adj, self.adj.T):
            raise AssertionError("adjacency not symmetric")
        if self.adj.diagonal().any():
            raise AssertionError("self loop present")


@lru_cache(maxsize=8)
def _triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    r, c = np.triu_indices(n, 1)
    return r.astype(np.int32), c.astype(np.int32)


def _pair_bernoulli(
    stream: RngStream, same_class: np.ndarray, params: BlockParams
) -> np.ndarray:
    """One Bernoulli per pair: p where ``same_class``, q elsewhere.

    Consumes one byte per pair in position order, then refinement rounds
    over still-unresolved positions (ascending), as documented in
    :mod:`majoritysbm.rng`.
    """
    dig_p = prob_digits(params.p)
    dig_q = prob_digits(params.q)
    refine_p = needs_refinement(dig_p)
    refine_q = needs_refinement(dig_q)
    buf = stream.bytes(same_class.size)
    thr0 = np.where(same_class, np.uint8(min(dig_p[0], 255)), np.uint8(min(dig_q[0], 255)))
    out = buf < thr0
    if dig_p[0] >= 256:  # p == 1: every same-class pair is an edge
        out |= same_class
    if dig_q[0] >= 256:
        out |= ~same_class
    if not (refine_p or refine_q):
        return out
    border = buf == thr0
    if not refine_p:
        border &= ~same_class
    if not refine_q:
        border &= same_class
    pos = np.flatnonzero(border)
    level = 1
    # refinement digits (levels 1..7) always fit a byte
    digit_table = np.array([dig_q[1:], dig_p[1:]], dtype=np.uint8)
    cls = same_class.view(np.uint8)
    while pos.size and level < 8:
        ref = stream.bytes(pos.size)
        d = digit_table[cls[pos], level - 1]
        out[pos[ref < d]] = True
        pos = pos[ref == d]
        level += 1
    return out


def _build_graph(n: int, bits: np.ndarray) -> GraphState:
    adj = np.zeros((n, n), np.uint8)
    r, c = _triu_pairs(n)
    adj[r, c] = bits
    adj[c, r] = bits
    return GraphState(adj)


def sample_sbm(
    m: int, n: int, params: BlockParams, stream: RngStream
) -> tuple[GraphState, OpinionVector]:
    """Draw a two-block graph: ``m`` vertices with opinion +1 then ``n`` with -1.

    Same-opinion pairs are edges with probability p, cross pairs with
    probability q, all independent.
    """
    if m < 0 or n < 0 or m + n == 0:
        raise ValueError("need m >= 0, n >= 0 and at least one vertex")
    opinions = OpinionVector.from_counts(m, n)
    graph = resample_full(opinions, params, stream)
    return graph, opinions


def resample_full(
    opinions: OpinionVector, params: BlockParams, stream: RngStream
) -> GraphState:
    """Fresh graph over the current labelling; the old edge set is ignored."""
    w = opinions.values
    n = w.size
    r, c = _triu_pairs(n)
    same = w[r] == w[c]
    bits = _pair_bernoulli(stream, same, params)
    return _build_graph(n, bits)


def resample_touched(
    graph: GraphState,
    old_opinions: OpinionVector,
    new_opinions: OpinionVector,
    params: BlockParams,
    stream: RngStream,
) -> GraphState:
    """Resample only pairs with a flipped endpoint; keep all other edges.

    A pair is redrawn (p if the new opinions agree, q otherwise) exactly
    when at least one endpoint changed opinion; every other pair keeps
    its edge bit from ``graph`` unchanged.
    """
    n = graph.vertex_count
    old = old_opinions.values
    new = new_opinions.values
    if old.size != n or new.size != n:
        raise ValueError("opinion vectors must match the graph's vertex count")
    flipped = np.flatnonzero(old != new)
    result = graph.copy()
    if flipped.size == 0:
        return result
    i_arr, j_arr = touched_pairs(n, flipped)
    same = new[i_arr] == new[j_arr]
    bits = _pair_bernoulli(stream, same, params)
    result.adj[i_arr, j_arr] = bits
    result.adj[j_arr, i_arr] = bits
    return result


def touched_pairs(n: int, flipped: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All pairs (i < j) with an endpoint in ``flipped``, row-major order."""
    f = np.asarray(flipped, dtype=np.int64)
    others = np.arange(n, dtype=np.int64)
    lo = np.minimum(f[:, None], others[None, :])
    hi = np.maximum(f[:, None], others[None, :])
    codes = (lo * n + hi)[lo != hi]
    codes = np.unique(codes)
    return codes // n, codes % n


def neighbor_tally(
    graph: GraphState, opinions: OpinionVector, v: int
) -> tuple[int, int]:
    """(#neighbours of v holding +1, #holding -1); v itself never counted."""
    n = graph.vertex_count
    if opinions.values.size != n:
        raise ValueError("opinion vector length must match the graph")
    if not 0 <= v < n:
        raise ValueError(f"vertex index out of range: {v}")
    row = graph.adj[v]
    plus = int(row[opinions.values == 1].sum())
    return plus, int(row.sum()) - plus
