"""Shared exact oracles used across the test suite."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest


def frac_binom_pmf(n: int, p: Fraction, k: int) -> Fraction:
    return math.comb(n, k) * p**k * (1 - p) ** (n - k)


def frac_binom_cdf(n: int, p: Fraction, k: int) -> Fraction:
    return sum(frac_binom_pmf(n, p, j) for j in range(0, min(k, n) + 1))


def frac_prob_exceeds(ny: int, py: Fraction, nx: int, px: Fraction) -> Fraction:
    """P[Y > X] by full double summation over both supports."""
    total = Fraction(0)
    for j in range(nx + 1):
        pj = frac_binom_pmf(nx, px, j)
        if pj == 0:
            continue
        tail = sum(frac_binom_pmf(ny, py, y) for y in range(j + 1, ny + 1))
        total += pj * tail
    return total


@pytest.fixture(scope="session")
def frac_oracles():
    return {
        "pmf": frac_binom_pmf,
        "cdf": frac_binom_cdf,
        "exceeds": frac_prob_exceeds,
    }
