"""Exact binomial numerics, closed-form constants, and threshold rules.

All logarithms are natural.  Tail quantities are computed in log space
(log-gamma based log-pmf, suffix log-sum-exp survival arrays), so
results far below double underflow are available as log-probabilities;
the plain-probability wrappers underflow to 0 below about exp(-745).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp


def binom_log_pmf(n: int, p: float, k: int) -> float:
    """log P[Bin(n, p) = k]."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    return float(_log_pmf_all(n, p)[k])


def _log_pmf_all(n: int, p: float) -> np.ndarray:
    """log pmf of Bin(n, p) on 0..n as an array."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    k = np.arange(n + 1)
    if p == 0.0:
        out = np.full(n + 1, -np.inf)
        out[0] = 0.0
        return out
    if p == 1.0:
        out = np.full(n + 1, -np.inf)
        out[n] = 0.0
        return out
    return (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def _log_sf_all(log_pmf: np.ndarray) -> np.ndarray:
    """log P[X > k] for k = 0..n, from the log pmf (suffix log-sum-exp)."""
    n = log_pmf.size - 1
    b = np.logaddexp.accumulate(log_pmf[::-1])[::-1]  # b[i] = logsumexp(pmf[i:])
    out = np.full(n + 1, -np.inf)
    out[: n] = b[1:]
    return out


def binom_cdf(n: int, p: float, k: int) -> float:
    """P[Bin(n, p) <= k] by stable log-space summation of the smaller tail."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    if k == n:
        return 1.0
    logs = _log_pmf_all(n, p)
    if k + 1 <= n * p:
        return float(np.exp(logsumexp(logs[: k + 1])))
    return float(1.0 - np.exp(logsumexp(logs[k + 1 :])))


def log_flip_prob_minus_to_plus(n: int, delta: int, p: float, q: float) -> float:
    """log P[Bin(n + delta, q) > Bin(n - 1, p)].

    This is the chance that a vertex of the smaller class sees strictly
    more cross-class than own-class neighbours in a fresh two-block
    graph with classes of sizes n + delta and n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return _log_prob_exceeds(n + delta, q, n - 1, p)


def log_flip_prob_plus_to_minus(n: int, delta: int, p: float, q: float) -> float:
    """log P[Bin(n, q) > Bin(n + delta - 1, p)] (mirror of the other flip)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return _log_prob_exceeds(n, q, n + delta - 1, p)


def _log_prob_exceeds(ny: int, py: float, nx: int, px: float) -> float:
    """log P[Y > X] for independent Y ~ Bin(ny, py), X ~ Bin(nx, px)."""
    if nx < 0:
        # X is identically 0 with no trials; Y > 0
        nx = 0
    logs_x = _log_pmf_all(nx, px)
    log_sf_y = _log_sf_all(_log_pmf_all(ny, py))
    j_max = min(nx, ny)  # for j >= ny, P[Y > j] = 0
    terms = logs_x[: j_max + 1] + log_sf_y[: j_max + 1]
    if terms.size == 0 or np.all(np.isneginf(terms)):
        return -math.inf
    return float(logsumexp(terms))


def flip_prob_minus_to_plus(n: int, delta: int, p: float, q: float) -> float:
    """P[Bin(n + delta, q) > Bin(n - 1, p)], exact double summation."""
    return math.exp(log_flip_prob_minus_to_plus(n, delta, p, q))


def flip_prob_plus_to_minus(n: int, delta: int, p: float, q: float) -> float:
    """P[Bin(n, q) > Bin(n + delta - 1, p)], exact double summation."""
    return math.exp(log_flip_prob_plus_to_minus(n, delta, p, q))


def interval_prob(n: int, delta: int, p: float, q: float, a: int) -> float:
    """P[Y <= X <= Y + a] for X ~ Bin(n - 1, p), Y ~ Bin(n + delta, q).

    Generic exact evaluator for sandwich events of the smaller class's
    neighbour counts; ``a`` is the slack above Y.
    """
    if a < 0:
        raise ValueError("a must be >= 0")
    pmf_x = np.exp(_log_pmf_all(n - 1, p))
    cdf_y = np.cumsum(np.exp(_log_pmf_all(n + delta, q)))
    j = np.arange(n)
    hi = cdf_y[np.minimum(j, n + delta)]
    lo_idx = j - a - 1
    lo = np.where(lo_idx >= 0, cdf_y[np.clip(lo_idx, 0, n + delta)], 0.0)
    return float(np.sum(pmf_x * (hi - lo)))


def kl_divergence(a: float, p: float) -> float:
    """Bernoulli Kullback-Leibler divergence D(a || p), natural log."""
    if not (0.0 <= a <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("arguments must lie in [0, 1]")
    out = 0.0
    if a > 0.0:
        out += math.inf if p == 0.0 else a * math.log(a / p)
    if a < 1.0:
        out += math.inf if p == 1.0 else (1 - a) * math.log((1 - a) / (1 - p))
    return out


@dataclass(frozen=True)
class ModelConstants:
    """Closed-form constants of the two-block majority dynamics.

    h       -- sqrt(p(2 - p - q)) / q, the critical coefficient of
               sqrt(n log n) at the halt/consensus transition;
    c       -- q^3 / (2 (1-q) p^2), the one-binomial tail rate;
    c_prime -- q^2 / (2 p (2-p-q)), the flip-probability rate.
    h**2 * c_prime == 1/2 identically.
    """

    h: float
    c: float
    c_prime: float


def constants(p: float, q: float) -> ModelConstants:
    if q == 0.0:
        raise ValueError("q must be positive")
    if not (0.0 <= p <= 1.0 and 0.0 < q <= 1.0):
        raise ValueError("parameters out of range")
    h = math.sqrt(p * (2.0 - p - q)) / q
    c = math.inf if p == 0.0 or q == 1.0 else q**3 / (2.0 * (1.0 - q) * p**2)
    core = 2.0 * p * (2.0 - p - q)
    c_prime = math.inf if core == 0.0 else q**2 / core
    return ModelConstants(h=h, c=c, c_prime=c_prime)


def delta_prime(n: int, delta: int, p: float, q: float) -> float:
    """Distance ((p-q)/q) n - delta from the heuristic dominance point."""
    if q <= 0.0:
        raise ValueError("q must be positive")
    return (p - q) / q * n - delta


def hoeffding_upper(n: int, p: float, k: int) -> float:
    """exp(-2 n (p - k/n)^2), the lower-tail bound for Bin(n, p) at k <= np."""
    if k > n * p:
        raise ValueError("bound requires k <= n*p")
    return math.exp(-2.0 * n * (p - k / n) ** 2)


class ThresholdRegime(Enum):
    """Initial-bias rules Delta(n) for the touched-pair model's phases.

    The five *_WIN rules give biases above which the leading opinion
    wins within the stated number of days; the HALT rules give biases
    below which the dynamics freezes.  EXPERIMENT_GRID is the sweep rule
    ceil(((p-q)/q) n - L sqrt(n ln n)) used by the phase-scan tables.
    """

    HALT_GUARANTEE = "halt-guarantee"
    FIRST_DAY_WIN = "first-day-win"
    SECOND_DAY_WIN = "second-day-win"
    THIRD_DAY_WIN = "third-day-win"
    HALT_GUARANTEE_FULL_INTRA = "halt-guarantee-full-intra"
    SECOND_DAY_WIN_FULL_INTRA = "second-day-win-full-intra"
    THIRD_DAY_WIN_FULL_INTRA = "third-day-win-full-intra"
    CONJECTURED_HALT_BOUNDARY = "conjectured-halt-boundary"
    EXPERIMENT_GRID = "experiment-grid"


def threshold_delta(
    n: int,
    p: float,
    q: float,
    regime: ThresholdRegime,
    L: float | None = None,
    delta_param: float | None = None,
    d_n: float | None = None,
) -> int:
    """Evaluate the regime's Delta(n) formula, ceiling-rounded.

    ``L`` parametrises the rules carrying a free large constant,
    ``delta_param`` the fixed-margin rules, and ``d_n`` the divergent
    sequence of the halt guarantee (default: ln ln n).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if q <= 0.0:
        raise ValueError("q must be positive")
    lead = (p - q) / q * n
    ln_n = math.log(n)
    base = math.sqrt(n * ln_n)
    lnln = math.log(ln_n) if ln_n > 0 else 0.0
    h = constants(p, q).h

    def need_L(minimum=0.0, strict=True):
        if L is None or L < minimum or (strict and L <= 0.0):
            raise ValueError(f"regime {regime.value} needs L > 0")
        return L

    def need_full_intra():
        if p != 1.0:
            raise ValueError(f"regime {regime.value} is defined for p = 1")

    if regime is ThresholdRegime.EXPERIMENT_GRID:
        if L is None or L < 0.0:
            raise ValueError("experiment-grid needs L >= 0")
        value = lead - L * base
    elif regime is ThresholdRegime.FIRST_DAY_WIN:
        value = lead + need_L() * base
    elif regime is ThresholdRegime.SECOND_DAY_WIN:
        if delta_param is None or delta_param <= 0.0:
            raise ValueError("second-day-win needs delta_param > 0")
        value = lead - (h - delta_param) * base
    elif regime is ThresholdRegime.THIRD_DAY_WIN:
        ell = need_L()
        value = lead - h * (
            base
            - 1.5 * math.sqrt(n * lnln**2 / ln_n)
            - math.sqrt(ell * n / ln_n)
        )
    elif regime is ThresholdRegime.HALT_GUARANTEE:
        dn = d_n if d_n is not None else lnln
        if dn <= 0.0:
            raise ValueError("halt-guarantee needs d_n > 0")
        value = lead - h * (
            math.sqrt(1.5 * n * ln_n)
            + math.sqrt(25.0 * n * lnln**2 / (24.0 * ln_n))
            + math.sqrt(n * dn / ln_n)
        )
    elif regime is ThresholdRegime.CONJECTURED_HALT_BOUNDARY:
        value = lead - h * base - need_L() * math.sqrt(n * lnln**2 / ln_n)
    elif regime is ThresholdRegime.HALT_GUARANTEE_FULL_INTRA:
        need_full_intra()
        value = lead - h * base - need_L() * math.sqrt(n * lnln**2 / ln_n)
    elif regime is ThresholdRegime.SECOND_DAY_WIN_FULL_INTRA:
        need_full_intra()
        if delta_param is None or delta_param <= 0.0:
            raise ValueError("second-day-win-full-intra needs delta_param > 0")
        value = lead - (h - delta_param) * base
    elif regime is ThresholdRegime.THIRD_DAY_WIN_FULL_INTRA:
        need_full_intra()
        ell = need_L()
        value = lead - h * (
            base - math.sqrt(n * lnln**2 / ln_n) - math.sqrt(ell * n / ln_n)
        )
    else:  # pragma: no cover
        raise ValueError(f"unknown regime {regime!r}")
    return math.ceil(value)


def gamblers_ruin(
    p_right: float, p_left: float, s: int, a: int, b: int
) -> float:
    """P[lazy +-1 walk from s hits b before a]; laziness cancels.

    With r = p_left / p_right the probability is (1 - r^(s-a)) /
    (1 - r^(b-a)) (or (s-a)/(b-a) when r = 1); the stay-put mass
    1 - p_right - p_left does not enter.
    """
    if not a <= s <= b or a == b:
        raise ValueError("need a <= s <= b with a < b")
    if p_right < 0 or p_left < 0 or p_right + p_left > 1.0 + 1e-12:
        raise ValueError("step probabilities invalid")
    if s == a:
        return 0.0
    if s == b:
        return 1.0
    if p_right == 0.0 and p_left == 0.0:
        raise ValueError("walk cannot move yet starts strictly inside (a, b)")
    if p_right == 0.0:
        return 0.0
    if p_left == 0.0:
        return 1.0
    r = p_left / p_right
    if r == 1.0:
        return (s - a) / (b - a)
    log_r = math.log(r)
    num = -math.expm1((s - a) * log_r)
    den = -math.expm1((b - a) * log_r)
    if math.isinf(den):
        # r^(b-a) overflowed: fall back to the dominant-term limit
        return math.exp((s - b) * log_r) if math.isinf(num) else 0.0
    return num / den


def tail_exponent_ratio(n: int, p: float, q: float, delta: int) -> float:
    """Exact tail exponent over its closed-form rate, one binomial.

    Ratio of -log P[Bin(n + delta, q) >= n p] to
    c * delta'^2 * (n + delta) / n^2; approaches 1 as the rate grows.
    """
    dp = delta_prime(n, delta, p, q)
    rate = constants(p, q).c * dp * dp * (n + delta) / (n * n)
    k = math.ceil(n * p)
    log_tail = _log_sf_all(_log_pmf_all(n + delta, q))[k - 1]
    return float(-log_tail / rate)


def flip_exponent_ratio(n: int, p: float, q: float, delta: int) -> float:
    """Exact flip-probability exponent over its closed-form rate.

    Ratio of -log P[Bin(n + delta, q) > Bin(n - 1, p)] to
    c' * delta'^2 / n; approaches 1 as the rate grows.
    """
    dp = delta_prime(n, delta, p, q)
    rate = constants(p, q).c_prime * dp * dp / n
    return float(-log_flip_prob_minus_to_plus(n, delta, p, q) / rate)


def tail_exponent_core_ratio(n: int, p: float, q: float, delta: int) -> float:
    """Leading tail exponent over its quadratic rate, one binomial.

    The exact large-deviation exponent of P[Bin(n + delta, q) >= n p] is
    (n + delta) D(np/(n + delta) || q); the constant c is its quadratic
    expansion in delta'.  Their ratio isolates how well the closed-form
    rate tracks the exact exponent, free of the poly-log prefactor that
    dominates -log P itself until the rate is large.
    """
    dp = delta_prime(n, delta, p, q)
    rate = constants(p, q).c * dp * dp * (n + delta) / (n * n)
    exponent = (n + delta) * kl_divergence(n * p / (n + delta), q)
    return exponent / rate


def flip_exponent_core_ratio(n: int, p: float, q: float, delta: int) -> float:
    """Leading flip exponent over its quadratic rate, two binomials.

    The exponent of P[Bin(n + delta, q) > Bin(n - 1, p)] is the best
    split point of the two tails,
    min_k [(n + delta) D(k/(n + delta) || q) + (n - 1) D(k/(n - 1) || p)],
    and c' is its quadratic expansion in delta'.
    """
    dp = delta_prime(n, delta, p, q)
    rate = constants(p, q).c_prime * dp * dp / n
    lo = math.floor((n + delta) * q)
    hi = math.ceil((n - 1) * p)
    best = min(
        (n + delta) * kl_divergence(k / (n + delta), q)
        + (n - 1) * kl_divergence(k / (n - 1), p)
        for k in range(lo, hi + 1)
    )
    return best / rate
