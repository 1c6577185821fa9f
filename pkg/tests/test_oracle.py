import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from majoritysbm import oracle as O
from majoritysbm.oracle import _day_tallies


def frac_kernel_row(total: int, j: int, p: Fraction, q: Fraction) -> list[Fraction]:
    tally, _, ns, nc = _day_tallies(total, j)
    row = []
    for nxt in range(total + 1):
        acc = Fraction(0)
        for a in range(ns + 1):
            for b in range(nc + 1):
                t = int(tally[nxt, a, b])
                if t:
                    acc += t * p**a * (1 - p) ** (ns - a) * q**b * (1 - q) ** (nc - b)
        row.append(acc)
    return row


def frac_absorption(n: int, delta: int, p: Fraction, q: Fraction) -> Fraction:
    """Rational-arithmetic absorption probability by Gaussian elimination."""
    total = 2 * n + delta
    rows = [frac_kernel_row(total, j, p, q) for j in range(total + 1)]
    transient = list(range(1, total))
    size = len(transient)
    aug = [
        [
            (Fraction(1) if i == k else Fraction(0)) - rows[transient[i]][transient[k]]
            for k in range(size)
        ]
        + [rows[transient[i]][total]]
        for i in range(size)
    ]
    for col in range(size):
        piv = next(r for r in range(col, size) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    h = {transient[i]: aug[i][size] for i in range(size)}
    return h[n + delta]


class TestKernelRows:
    def test_two_vertex_row_is_stationary(self):
        row = O.enumerate_day_kernel_row(1, 2, 0.7, 0.4)
        assert row[1] == pytest.approx(1.0, abs=1e-12)
        assert row[0] == row[2] == 0.0

    def test_three_vertex_hand_enumeration(self):
        row = O.enumerate_day_kernel_row(2, 3, 0.5, 0.5)
        assert row[3] == pytest.approx(0.375, abs=1e-15)
        assert row[2] == pytest.approx(0.5, abs=1e-15)
        assert row[1] == pytest.approx(0.125, abs=1e-15)
        assert row[0] == 0.0

    def test_unanimity_rows_are_point_masses(self):
        for total in (1, 4, 6):
            row = O.enumerate_day_kernel_row(total, total, 0.3, 0.8)
            assert row[total] == pytest.approx(1.0, abs=1e-12)
            assert np.all(row[:total] == 0.0)
            row = O.enumerate_day_kernel_row(0, total, 0.3, 0.8)
            assert row[0] == pytest.approx(1.0, abs=1e-12)

    def test_guard_rejects_large_graphs(self):
        with pytest.raises(ValueError):
            O.enumerate_day_kernel_row(3, 8, 0.5, 0.5)
        with pytest.raises(ValueError):
            O.build_kernel(8, 0.5, 0.5)

    @settings(max_examples=25, deadline=None)
    @given(
        total=st.integers(2, 6),
        p=st.floats(0.05, 0.95),
        q=st.floats(0.05, 0.95),
    )
    def test_rows_sum_to_one_and_mirror(self, total, p, q):
        kernel = O.build_kernel(total, p, q)
        sums = kernel.matrix.sum(axis=1)
        assert np.all(np.abs(sums - 1.0) < 1e-12)
        for j in range(total + 1):
            assert np.array_equal(kernel.matrix[j], kernel.matrix[total - j][::-1])
        assert np.all(kernel.matrix >= 0.0)

    def test_rows_match_rational_evaluation(self):
        p, q = Fraction(3, 10), Fraction(4, 5)
        for j in range(6):
            row = O.enumerate_day_kernel_row(j, 5, float(p), float(q))
            exact = frac_kernel_row(5, j, p, q)
            for got, want in zip(row, exact):
                assert got == pytest.approx(float(want), abs=1e-14)


class TestAbsorption:
    def test_exact_four_fifths(self):
        r = O.exact_absorption(1, 1, 0.5, 0.5)
        assert r.absorbing_reachable
        assert abs(r.prob_plus_wins - 0.8) < 1e-12

    def test_rational_cross_check(self):
        half = Fraction(1, 2)
        assert frac_absorption(1, 1, half, half) == Fraction(4, 5)
        for n, delta, p, q in [
            (1, 2, Fraction(3, 10), Fraction(1, 2)),
            (2, 1, Fraction(4, 5), Fraction(3, 10)),
            (1, 3, Fraction(1, 2), Fraction(3, 10)),
        ]:
            got = O.exact_absorption(n, delta, float(p), float(q))
            want = float(frac_absorption(n, delta, p, q))
            assert got.prob_plus_wins == pytest.approx(want, abs=1e-12)

    def test_unanimous_start(self):
        assert O.exact_absorption(0, 5, 0.3, 0.3).prob_plus_wins == 1.0
        assert O.exact_absorption(0, 5, 0.3, 0.3).expected_days == 0.0

    def test_two_vertex_chain_never_absorbs(self):
        r = O.exact_absorption(1, 0, 0.5, 0.5)
        assert not r.absorbing_reachable
        assert math.isnan(r.prob_plus_wins)

    def test_guard(self):
        with pytest.raises(ValueError):
            O.exact_absorption(3, 2, 0.5, 0.5)

    def test_mirror_start_symmetry(self):
        # when absorption is almost sure, starting from j and from N-j
        # give complementary win probabilities (global opinion negation)
        total = 5
        K = O.build_kernel(total, 0.6, 0.25).matrix
        transient = [1, 2, 3, 4]
        q = K[np.ix_(transient, transient)]
        h = np.linalg.solve(np.eye(len(transient)) - q, K[transient, total])
        by_state = dict(zip(transient, h))
        for j in transient:
            assert by_state[j] == pytest.approx(1 - by_state[total - j], abs=1e-12)
        got = O.exact_absorption(2, 1, 0.6, 0.25)
        assert got.prob_plus_wins == pytest.approx(by_state[3], abs=1e-12)


class TestHaltDayOne:
    def test_no_cross_edges_never_flip(self):
        assert O.exact_halt_day1(1, 1, 0.9, 0.0) == 1.0

    def test_three_vertex_closed_form(self):
        # no flip iff both cross pairs absent, independent of p
        for p in (0.1, 0.5, 1.0):
            assert O.exact_halt_day1(1, 1, p, 0.5) == pytest.approx(0.25, abs=1e-14)
            assert O.exact_halt_day1(1, 1, p, 0.3) == pytest.approx(0.49, abs=1e-14)

    def test_forced_flip(self):
        assert O.exact_halt_day1(1, 1, 0.0, 1.0) == 0.0

    def test_needs_nonunanimous_start(self):
        with pytest.raises(ValueError):
            O.exact_halt_day1(0, 3, 0.5, 0.5)

    def test_kernel_no_flip_consistency(self):
        # the kernel's no-flip mass at the start state equals the halt
        # probability (zero flips is stronger than zero count change)
        for n, delta, p, q in [(1, 1, 0.5, 0.5), (2, 1, 0.6, 0.3), (3, 0, 0.4, 0.2)]:
            total = 2 * n + delta
            kernel = O.build_kernel(total, p, q)
            assert O.exact_halt_day1(n, delta, p, q) == pytest.approx(
                kernel.no_flip[n + delta], abs=1e-14
            )
            # and it never exceeds the stay-put mass of the count chain
            assert (
                kernel.no_flip[n + delta]
                <= kernel.matrix[n + delta, n + delta] + 1e-14
            )

    def test_no_flip_strictly_below_stay_mass_when_swaps_possible(self):
        # p = q = 0.5, split (2,1): swapping pairs keep the count at 2
        # while flipping two vertices
        kernel = O.build_kernel(3, 0.5, 0.5)
        assert kernel.no_flip[2] < kernel.matrix[2, 2] - 0.2


class TestMCAgreement:
    def test_examples(self):
        assert O.mc_agreement(0.8, 10**5, 0.8).z_score == 0.0
        assert O.mc_agreement(0.8, 10**5, 0.8).passed
        assert not O.mc_agreement(0.0, 10**5, 0.8).passed
        r = O.mc_agreement(0.81, 10**4, 0.8)
        assert r.z_score == pytest.approx(2.5, abs=1e-9)
        assert r.passed
        assert O.mc_agreement(1.0, 1000, 1.0).passed
        assert not O.mc_agreement(0.999, 1000, 1.0).passed

    def test_replicate_floor(self):
        with pytest.raises(ValueError):
            O.mc_agreement(0.5, 99, 0.5)
