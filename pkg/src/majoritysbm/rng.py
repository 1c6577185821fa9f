"""Counter-based random streams and exact Bernoulli sampling.

Every stochastic operation in this package draws from a Philox4x64-10
stream (``numpy.random.Philox``).  The stream layout is fixed so that a
run is reproducible bit-exactly from its seed and so that replicate
streams are independent by construction:

* A 64-bit ``master_seed`` is expanded to a 128-bit Philox key with two
  rounds of splitmix64 (see :func:`master_key`).
* Replicate ``r`` of an experiment reads from the same key but starts at
  256-bit counter ``r << 128``, i.e. each replicate owns a disjoint block
  of 2**128 Philox counters.  Counter space is never shared, so results
  do not depend on how replicates are scheduled across workers.

Pair resampling consumes one byte per pair (little-endian bytes of the
raw 64-bit Philox words, whole words at a time).  A byte ``b`` decides a
Bernoulli(p) event by comparison with the base-256 digits of ``p``:
``b < d0`` is a success, ``b > d0`` a failure, and ``b == d0`` recurses
on the next digit with a fresh byte.  Refinement bytes are drawn after
the main block, in ascending pair position, one round per digit level.
The recursion truncates after 8 digits (failure), so edge probabilities
are realised as ``floor(p * 2**64) / 2**64`` -- exact to 2**-64, far
below the resolution of the floating-point parameters themselves.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 step: hash a 64-bit integer to a 64-bit integer."""
    x = (x + _SPLITMIX_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def master_key(master_seed: int) -> int:
    """Expand a 64-bit master seed into the 128-bit Philox key."""
    k0 = splitmix64(master_seed & MASK64)
    k1 = splitmix64((master_seed & MASK64) ^ _SPLITMIX_GAMMA)
    return k0 | (k1 << 64)


class RngStream:
    """A byte-oriented view of one Philox stream.

    ``bytes(n)`` returns the next ``n`` bytes of the stream.  Bytes are
    the little-endian lanes of consecutive raw 64-bit outputs; a request
    always consumes whole words, discarding the tail of the final word.
    """

    __slots__ = ("bitgen",)

    def __init__(self, bitgen: np.random.Philox):
        self.bitgen = bitgen

    @classmethod
    def from_key(cls, key: int, counter: int = 0) -> "RngStream":
        return cls(np.random.Philox(counter=counter, key=key))

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        return cls.from_key(master_key(seed))

    @classmethod
    def replicate(cls, master_seed: int, index: int) -> "RngStream":
        """Stream for replicate ``index`` of an experiment."""
        if index < 0:
            raise ValueError("replicate index must be nonnegative")
        return cls.from_key(master_key(master_seed), counter=index << 128)

    def bytes(self, n: int) -> np.ndarray:
        """Next ``n`` stream bytes as a uint8 array."""
        if n <= 0:
            return np.empty(0, dtype=np.uint8)
        words = self.bitgen.random_raw((n + 7) // 8)
        return words.view(np.uint8)[:n]

    def floats(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms on [0, 1), 53-bit, one word each."""
        words = self.bitgen.random_raw(n)
        return (words >> np.uint64(11)) * (2.0 ** -53)

    def generator(self) -> np.random.Generator:
        """numpy Generator over the same underlying stream (advances it)."""
        return np.random.Generator(self.bitgen)


@lru_cache(maxsize=256)
def prob_digits(p: float) -> tuple[int, ...]:
    """Base-256 digits of ``p`` used by the byte-comparison sampler.

    Returns 8 digits; digit 0 may be 256 when ``p == 1`` so that every
    byte compares below it.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p!r}")
    if p >= 1.0:
        return (256,) + (0,) * 7
    scaled = int(p * (1 << 64))  # exact: power-of-two scaling
    return tuple((scaled >> (56 - 8 * i)) & 0xFF for i in range(8))


def needs_refinement(digits: tuple[int, ...]) -> bool:
    """Whether a tie on the first digit can still become a success.

    False for probabilities that are exact multiples of 1/256 (all later
    digits zero): ``byte < digits[0]`` then decides outright, and no
    refinement bytes are ever drawn for that segment.
    """
    return any(d != 0 for d in digits[1:])


def bernoulli_mixed(
    stream: RngStream,
    seg_sizes: Sequence[int],
    seg_probs: Sequence[float],
    _scalar: bool = False,
) -> np.ndarray:
    """Sample a block of independent Bernoulli values with per-segment p.

    The block is the concatenation of segments ``seg_sizes[i]`` long with
    success probability ``seg_probs[i]``.  Draw order: one byte per
    position (whole block first), then refinement rounds over unresolved
    positions in ascending order.  The scalar path reproduces the exact
    same stream consumption with Python integers; it is faster for tiny
    blocks.
    """
    total = int(sum(seg_sizes))
    digit_rows = [prob_digits(float(p)) for p in seg_probs]
    if _scalar or total <= 192:
        return _bernoulli_scalar(stream, seg_sizes, digit_rows, total)
    return _bernoulli_vector(stream, seg_sizes, digit_rows, total)


def _bernoulli_vector(stream, seg_sizes, digit_rows, total):
    buf = stream.bytes(total)
    out = np.empty(total, dtype=np.bool_)
    pending_pos: list[np.ndarray] = []
    pending_seg: list[np.ndarray] = []
    start = 0
    for seg, (size, digits) in enumerate(zip(seg_sizes, digit_rows)):
        sl = slice(start, start + size)
        d0 = digits[0]
        seg_bytes = buf[sl]
        if d0 >= 256:
            out[sl] = True
        elif not needs_refinement(digits):
            out[sl] = seg_bytes < d0
        else:
            out[sl] = seg_bytes < d0
            border = np.flatnonzero(seg_bytes == d0)
            if border.size:
                pending_pos.append(border + start)
                pending_seg.append(np.full(border.size, seg, dtype=np.int32))
        start += size
    if not pending_pos:
        return out
    # segments are consecutive slices, so the concatenation is sorted
    pos = np.concatenate(pending_pos)
    seg_of = np.concatenate(pending_seg)
    digit_table = np.array([row for row in digit_rows], dtype=np.int32)
    for level in range(1, 8):
        if pos.size == 0:
            break
        ref = stream.bytes(pos.size).astype(np.int32)
        d = digit_table[seg_of, level]
        out[pos[ref < d]] = True
        out[pos[ref > d]] = False
        keep = ref == d
        pos, seg_of = pos[keep], seg_of[keep]
    out[pos] = False  # truncation after the last digit
    return out


def _bernoulli_scalar(stream, seg_sizes, digit_rows, total):
    buf = stream.bytes(total).tobytes()
    out = np.empty(total, dtype=np.bool_)
    pending: list[tuple[int, int]] = []  # (position, segment)
    start = 0
    for seg, (size, digits) in enumerate(zip(seg_sizes, digit_rows)):
        d0 = digits[0]
        refinable = needs_refinement(digits)
        for i in range(start, start + size):
            b = buf[i]
            if b < d0:
                out[i] = True
            elif b > d0 or not refinable:
                out[i] = False
            else:
                out[i] = False
                pending.append((i, seg))
        start += size
    level = 1
    while pending and level < 8:
        ref = stream.bytes(len(pending)).tobytes()
        nxt: list[tuple[int, int]] = []
        for j, (i, seg) in enumerate(pending):
            d = digit_rows[seg][level]
            b = ref[j]
            if b < d:
                out[i] = True
            elif b == d:
                nxt.append((i, seg))
        pending = nxt
        level += 1
    return out
