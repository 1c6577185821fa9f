"""Closed-form constants, flip probabilities, and threshold rules.

Everything here is exact numerics: log-space binomial tails, the
per-vertex flip probabilities of a fresh two-block day, the model
constants (H, c, c'), and the initial-bias threshold rules evaluated at
a concrete size.
"""

import math

from majoritysbm import (
    ThresholdRegime,
    constants,
    delta_prime,
    flip_prob_minus_to_plus,
    flip_prob_plus_to_minus,
    gamblers_ruin,
    threshold_delta,
)
from majoritysbm.analytics import (
    flip_exponent_core_ratio,
    tail_exponent_core_ratio,
)


def main():
    p, q, n = 0.5, 0.3, 500
    c = constants(p, q)
    print(f"constants at p={p}, q={q}:  H={c.h:.4f}  c={c.c:.5f}  c'={c.c_prime:.5f}")
    print(f"identity H^2 c' = {c.h**2 * c.c_prime:.15f} (exactly 1/2)\n")

    print("per-vertex flip probabilities on a fresh day, growing bias:")
    for delta in (0, 50, 150, 250, 334):
        mp = flip_prob_minus_to_plus(n, delta, p, q)
        pm = flip_prob_plus_to_minus(n, delta, p, q)
        print(
            f"  delta={delta:>4}  distance-to-dominance {delta_prime(n, delta, p, q):>7.1f}"
            f"   P[- joins +] = {mp:.3e}   P[+ joins -] = {pm:.3e}"
        )

    print("\ninitial-bias thresholds at n=500 (ceiling-rounded):")
    rules = [
        (ThresholdRegime.FIRST_DAY_WIN, dict(L=3.0)),
        (ThresholdRegime.SECOND_DAY_WIN, dict(delta_param=0.5)),
        (ThresholdRegime.THIRD_DAY_WIN, dict(L=3.0)),
        (ThresholdRegime.CONJECTURED_HALT_BOUNDARY, dict(L=3.0)),
        (ThresholdRegime.HALT_GUARANTEE, dict()),
        (ThresholdRegime.EXPERIMENT_GRID, dict(L=c.h)),
    ]
    for regime, kw in rules:
        d = threshold_delta(n, p, q, regime, **kw)
        args = ", ".join(f"{k}={v:.3g}" for k, v in kw.items()) or "defaults"
        print(f"  {regime.value:26s} ({args:16s}) -> delta = {d}")

    big_n = 5000
    delta = math.ceil((p - q) / q * big_n - math.sqrt(big_n * math.log(big_n)))
    print(
        f"\nrate calibration at n={big_n}: exact exponents over their "
        f"quadratic rates:\n  one-binomial tail {tail_exponent_core_ratio(big_n, p, q, delta):.3f},"
        f"  two-binomial flip {flip_exponent_core_ratio(big_n, p, q, delta):.3f}"
    )

    print(
        "\nbiased-walk hitting odds (laziness cancels): "
        f"{gamblers_ruin(0.4, 0.2, 5, 0, 10):.4f} == "
        f"{gamblers_ruin(0.04, 0.02, 5, 0, 10):.4f}"
    )


if __name__ == "__main__":
    main()
