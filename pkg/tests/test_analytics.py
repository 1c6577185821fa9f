import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from majoritysbm import analytics as A
from majoritysbm.analytics import ThresholdRegime

from conftest import frac_binom_cdf, frac_binom_pmf, frac_prob_exceeds


class TestBinomials:
    def test_log_pmf_examples(self):
        assert A.binom_log_pmf(1, 0.3, 1) == pytest.approx(math.log(0.3), abs=1e-14)
        assert A.binom_log_pmf(2, 0.5, 1) == pytest.approx(math.log(0.5), abs=1e-14)
        direct = math.log(math.comb(10, 3) * 0.3**3 * 0.7**7)
        assert A.binom_log_pmf(10, 0.3, 3) == pytest.approx(direct, abs=1e-12)
        with pytest.raises(ValueError):
            A.binom_log_pmf(5, 0.3, 6)

    def test_log_pmf_vs_fractions_small(self):
        for n in (1, 7, 19):
            for p in (Fraction(3, 10), Fraction(1, 2), Fraction(4, 5)):
                for k in range(n + 1):
                    exact = float(frac_binom_pmf(n, p, k))
                    got = math.exp(A.binom_log_pmf(n, float(p), k))
                    assert got == pytest.approx(exact, rel=1e-12)

    def test_log_pmf_large_n_accuracy(self):
        # against the exact rational value at n = 10^6
        n, k = 10**6, 300_000
        exact = frac_binom_pmf(n, Fraction(3, 10), k)
        # compare in log space (the value itself is ~1e-3)
        assert A.binom_log_pmf(n, 0.3, k) == pytest.approx(
            float(math.log(exact.numerator) - math.log(exact.denominator)),
            rel=1e-10,
        )

    def test_cdf_examples_and_oracle(self):
        assert A.binom_cdf(7, 0.42, 7) == 1.0
        assert A.binom_cdf(2, 0.5, 0) == pytest.approx(0.25, abs=1e-15)
        exact = float(frac_binom_cdf(20, Fraction(3, 10), 6))
        assert A.binom_cdf(20, 0.3, 6) == pytest.approx(exact, rel=1e-12)

    def test_cdf_extreme_tail_in_log_space(self):
        # far tail handled without catastrophic cancellation
        v = A.binom_cdf(1000, 0.5, 100)
        exact = float(frac_binom_cdf(1000, Fraction(1, 2), 100))
        assert v == pytest.approx(exact, rel=1e-9)


class TestFlipProbabilities:
    def test_examples(self):
        assert A.flip_prob_minus_to_plus(5, 2, 0.5, 0.0) == 0.0
        assert A.flip_prob_minus_to_plus(1, 0, 0.9, 0.3) == pytest.approx(0.3, abs=1e-14)
        assert A.flip_prob_minus_to_plus(2, 1, 0.5, 0.5) == pytest.approx(
            0.6875, abs=1e-13
        )
        assert A.flip_prob_plus_to_minus(5, 2, 0.5, 0.0) == 0.0
        assert A.flip_prob_plus_to_minus(1, 0, 0.5, 0.5) == pytest.approx(0.5, abs=1e-14)
        assert A.flip_prob_plus_to_minus(2, 1, 0.5, 0.5) == pytest.approx(
            5 / 16, abs=1e-13
        )

    def test_against_rational_double_sum_grid(self):
        for n in (1, 2, 5, 11, 30):
            for delta in (0, 1, 3):
                for p, q in [(Fraction(1, 2), Fraction(3, 10)),
                             (Fraction(4, 5), Fraction(1, 2))]:
                    exact_mp = frac_prob_exceeds(n + delta, q, n - 1, p)
                    got = A.flip_prob_minus_to_plus(n, delta, float(p), float(q))
                    assert got == pytest.approx(float(exact_mp), abs=1e-12)
                    exact_pm = frac_prob_exceeds(n, q, n + delta - 1, p)
                    got = A.flip_prob_plus_to_minus(n, delta, float(p), float(q))
                    assert got == pytest.approx(float(exact_pm), abs=1e-12)

    def test_iid_symmetry_identity(self):
        # P[Y > X] for iid X, Y equals (1 - P[tie]) / 2
        n, q = 40, 0.3
        tie = sum(math.exp(2 * A.binom_log_pmf(n, q, k)) for k in range(n + 1))
        lhs = A.flip_prob_plus_to_minus(n, 1, q, q)  # Bin(n,q) vs Bin(n,q)
        assert lhs == pytest.approx((1 - tie) / 2, abs=1e-12)

    def test_log_variant_reaches_deep_tails(self):
        lg = A.log_flip_prob_plus_to_minus(2000, 0, 0.5, 0.3)
        assert -200 < lg < -50
        assert A.flip_prob_plus_to_minus(2000, 0, 0.5, 0.3) == pytest.approx(
            math.exp(lg)
        )
        # far below double underflow the log value is still finite
        deep = A.log_flip_prob_plus_to_minus(40_000, 0, 0.5, 0.3)
        assert -4000 < deep < -745
        assert A.flip_prob_plus_to_minus(40_000, 0, 0.5, 0.3) == 0.0


class TestIntervalProb:
    def test_against_double_sum(self):
        n, delta, p, q, a = 12, 3, 0.55, 0.25, 2
        exact = 0.0
        for j in range(n):
            pj = math.comb(n - 1, j) * p**j * (1 - p) ** (n - 1 - j)
            py = sum(
                math.comb(n + delta, y) * q**y * (1 - q) ** (n + delta - y)
                for y in range(max(0, j - a), j + 1)
            )
            exact += pj * py
        assert A.interval_prob(n, delta, p, q, a) == pytest.approx(exact, rel=1e-12)

    def test_zero_slack_is_tie_probability(self):
        n, delta, p, q = 9, 0, 0.5, 0.5
        exact = sum(
            math.comb(n - 1, j) * 0.5 ** (n - 1)
            * math.comb(n, j) * 0.5**n
            for j in range(n)
        )
        assert A.interval_prob(n, delta, p, q, 0) == pytest.approx(exact, rel=1e-12)


class TestKL:
    def test_examples(self):
        assert A.kl_divergence(0.3, 0.3) == 0.0
        assert A.kl_divergence(0.5, 0.25) == pytest.approx(0.1438410362258904, abs=1e-12)
        assert A.kl_divergence(1.0, 0.5) == pytest.approx(math.log(2), abs=1e-15)
        assert A.kl_divergence(0.0, 0.5) == pytest.approx(math.log(2), abs=1e-15)
        assert A.kl_divergence(0.5, 0.0) == math.inf
        assert A.kl_divergence(0.5, 1.0) == math.inf

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.001, 0.999), p=st.floats(0.001, 0.999))
    def test_nonnegative(self, a, p):
        assert A.kl_divergence(a, p) >= 0.0


class TestConstants:
    def test_critical_values(self):
        assert 2.787 < A.constants(1.0, 0.3).h < 2.790
        assert 2.581 < A.constants(0.5, 0.3).h < 2.583
        assert A.constants(1.0, 1.0).h == 0.0

    def test_formulas(self):
        c = A.constants(0.5, 0.3)
        assert c.c == pytest.approx(0.3**3 / (2 * 0.7 * 0.25), abs=1e-15)
        assert c.c_prime == pytest.approx(0.09 / (2 * 0.5 * 1.2), abs=1e-15)
        with pytest.raises(ValueError):
            A.constants(0.5, 0.0)

    def test_identity_h_squared_c_prime(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            q = rng.uniform(0.01, 0.98)
            p = rng.uniform(q + 1e-3, 1.0)
            c = A.constants(p, q)
            assert abs(c.h**2 * c.c_prime - 0.5) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(q=st.floats(0.01, 0.97), gap=st.floats(0.001, 0.9))
    def test_identity_property(self, q, gap):
        p = min(1.0, q + gap)
        c = A.constants(p, q)
        assert abs(c.h**2 * c.c_prime - 0.5) < 1e-12


class TestDeltaPrime:
    def test_examples(self):
        assert A.delta_prime(500, 1167, 1.0, 0.3) == pytest.approx(-1 / 3, abs=1e-9)
        assert A.delta_prime(500, 334, 0.5, 0.3) == pytest.approx(-2 / 3, abs=1e-9)
        n = 60
        at_zero = round((0.5 - 0.3) / 0.3 * n)
        assert A.delta_prime(n, at_zero, 0.5, 0.3) == pytest.approx(0.0, abs=1e-9)
        with pytest.raises(ValueError):
            A.delta_prime(10, 1, 0.5, 0.0)


class TestThresholds:
    def test_sweep_rule_reproduces_published_grid(self):
        grid = ThresholdRegime.EXPERIMENT_GRID
        assert A.threshold_delta(500, 1.0, 0.3, grid, L=2.788) == 1012
        assert A.threshold_delta(500, 1.0, 0.3, grid, L=4.0) == 944
        assert A.threshold_delta(500, 0.5, 0.3, grid, L=2.582) == 190
        assert A.threshold_delta(500, 1.0, 0.3, grid, L=0.0) == 1167

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            A.threshold_delta(500, 0.5, 0.3, ThresholdRegime.FIRST_DAY_WIN, L=0.0)
        with pytest.raises(ValueError):
            A.threshold_delta(500, 0.5, 0.3, ThresholdRegime.SECOND_DAY_WIN)
        with pytest.raises(ValueError):
            A.threshold_delta(
                500, 0.5, 0.3, ThresholdRegime.HALT_GUARANTEE_FULL_INTRA, L=1.0
            )
        with pytest.raises(ValueError):
            A.threshold_delta(500, 0.5, 0.3, ThresholdRegime.EXPERIMENT_GRID, L=-0.5)

    def test_regime_placement_around_dominance_point(self):
        # win rules sit above the dominance lead only for the first-day
        # rule; halt-side rules always sit below it
        n, p, q = 2000, 0.5, 0.3
        lead = (p - q) / q * n
        first = A.threshold_delta(n, p, q, ThresholdRegime.FIRST_DAY_WIN, L=3.0)
        second = A.threshold_delta(n, p, q, ThresholdRegime.SECOND_DAY_WIN, delta_param=0.5)
        halt = A.threshold_delta(n, p, q, ThresholdRegime.HALT_GUARANTEE)
        conj = A.threshold_delta(n, p, q, ThresholdRegime.CONJECTURED_HALT_BOUNDARY, L=3.0)
        assert first > lead > second
        assert halt < lead and conj < lead
        # the sweep rule decreases in L and hits the lead at L=0
        sweep = [
            A.threshold_delta(n, p, q, ThresholdRegime.EXPERIMENT_GRID, L=x)
            for x in (0.0, 0.5, 1.0, 2.0, 3.0)
        ]
        assert sweep[0] == math.ceil(lead)
        assert all(a > b for a, b in zip(sweep, sweep[1:]))

    def test_full_intra_variants_match_h_at_p_one(self):
        n, q = 800, 0.3
        a = A.threshold_delta(
            n, 1.0, q, ThresholdRegime.SECOND_DAY_WIN_FULL_INTRA, delta_param=0.25
        )
        b = A.threshold_delta(n, 1.0, q, ThresholdRegime.SECOND_DAY_WIN, delta_param=0.25)
        assert a == b  # H(1, q) = sqrt(1-q)/q makes the forms coincide


class TestHoeffding:
    def test_examples(self):
        assert A.hoeffding_upper(100, 0.5, 50) == 1.0
        assert A.hoeffding_upper(100, 0.5, 40) == pytest.approx(math.exp(-2), abs=1e-15)
        with pytest.raises(ValueError):
            A.hoeffding_upper(100, 0.5, 51)

    def test_dominates_exact_cdf(self):
        for n in (10, 60, 300):
            for p in (0.3, 0.5, 0.8):
                for k in range(0, int(n * p) + 1, max(1, n // 7)):
                    assert A.binom_cdf(n, p, k) <= A.hoeffding_upper(n, p, k) + 1e-15


class TestGamblersRuin:
    def test_examples(self):
        assert A.gamblers_ruin(0.3, 0.3, 5, 0, 10) == 0.5
        assert A.gamblers_ruin(0.4, 0.2, 1, 0, 2) == pytest.approx(2 / 3, abs=1e-15)
        assert A.gamblers_ruin(0.2, 0.4, 7, 0, 7) == 1.0
        assert A.gamblers_ruin(0.2, 0.4, 0, 0, 7) == 0.0

    def test_against_linear_solve(self):
        # brute force: solve the harmonic system for a lazy walk
        pr, pl, a, b = 0.25, 0.15, 0, 9
        size = b - a + 1
        mat = np.zeros((size, size))
        rhs = np.zeros(size)
        mat[0, 0] = mat[-1, -1] = 1.0
        rhs[-1] = 1.0
        for s in range(1, size - 1):
            mat[s, s] = pr + pl
            mat[s, s + 1] = -pr
            mat[s, s - 1] = -pl
        h = np.linalg.solve(mat, rhs)
        for s in range(a, b + 1):
            assert A.gamblers_ruin(pr, pl, s, a, b) == pytest.approx(
                h[s - a], abs=1e-12
            )

    @settings(max_examples=60, deadline=None)
    @given(
        lam=st.floats(0.01, 1.0),
        pr=st.floats(0.05, 0.6),
        pl=st.floats(0.05, 0.39),
        s=st.integers(1, 8),
    )
    def test_laziness_invariance(self, lam, pr, pl, s):
        base = A.gamblers_ruin(pr, pl, s, 0, 9)
        lazy = A.gamblers_ruin(pr * lam, pl * lam, s, 0, 9)
        assert lazy == pytest.approx(base, abs=1e-11)

    def test_degenerate_errors(self):
        with pytest.raises(ValueError):
            A.gamblers_ruin(0.0, 0.0, 3, 0, 9)
        with pytest.raises(ValueError):
            A.gamblers_ruin(0.7, 0.7, 3, 0, 9)
        with pytest.raises(ValueError):
            A.gamblers_ruin(0.5, 0.2, 10, 0, 9)


class TestRateWindows:
    def setup_method(self):
        self.n, self.p, self.q = 5000, 0.5, 0.3
        lead = (self.p - self.q) / self.q * self.n
        self.delta = math.ceil(lead - math.sqrt(self.n * math.log(self.n)))

    def test_exponent_core_ratios_near_one(self):
        r_tail = A.tail_exponent_core_ratio(self.n, self.p, self.q, self.delta)
        r_flip = A.flip_exponent_core_ratio(self.n, self.p, self.q, self.delta)
        assert 0.85 <= r_tail <= 1.15
        assert 0.8 <= r_flip <= 1.25

    def test_probability_ratios_carry_log_prefactor(self):
        # the raw -log P ratios exceed 1 by the poly-log prefactor at this
        # scale; they must stay above 1 and shrink toward the core ratio
        # as the rate grows
        r1 = A.tail_exponent_ratio(self.n, self.p, self.q, self.delta)
        assert r1 > 1.0
        wider = math.ceil(
            (self.p - self.q) / self.q * self.n
            - 3.0 * math.sqrt(self.n * math.log(self.n))
        )
        r2 = A.tail_exponent_ratio(self.n, self.p, self.q, wider)
        assert 1.0 < r2 < r1
        assert A.flip_exponent_ratio(self.n, self.p, self.q, self.delta) > 1.0
