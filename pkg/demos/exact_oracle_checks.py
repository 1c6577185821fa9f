"""Exhaustive ground truth at tiny scale, and the simulator against it.

With at most 7 vertices every labelled graph can be enumerated, giving
the exact one-day transition law of the plus-count chain, the exact
halting probability of the first day, and exact absorption odds via a
linear solve.  The same quantities are then estimated by Monte Carlo
with the production simulator and compared through a z-score.
"""

from majoritysbm import (
    BlockParams,
    ExperimentSpec,
    ModelVariant,
    build_kernel,
    exact_absorption,
    exact_halt_day1,
    mc_agreement,
    run_experiment,
)


def main():
    n, delta, p, q = 1, 1, 0.5, 0.5
    total = 2 * n + delta

    kernel = build_kernel(total, p, q)
    print(f"one-day transition law on {{0..{total}}} at p=q=0.5:")
    for j in range(total + 1):
        row = ", ".join(f"{x:.3f}" for x in kernel.matrix[j])
        print(f"  from {j}: [{row}]   P[no flip] = {kernel.no_flip[j]:.3f}")

    exact = exact_absorption(n, delta, p, q)
    print(f"\nexact P[plus absorbs] from split (2,1): {exact.prob_plus_wins:.12f}")
    print(f"expected days to absorption: {exact.expected_days:.3f}")
    print(f"exact P[day 1 flips nobody]: {exact_halt_day1(n, delta, p, q):.4f}")

    reps = 100_000
    spec = ExperimentSpec(
        ModelVariant.MARKOVIAN, n, delta, BlockParams(p, q),
        replicates=reps, max_rounds=100_000, master_seed=5,
    )
    rep = run_experiment(spec)
    freq = rep.plus_wins / reps
    check = mc_agreement(freq, reps, exact.prob_plus_wins)
    print(f"\nMonte Carlo over {reps} replicates: {freq:.5f}")
    print(f"z-score vs exact: {check.z_score:+.2f} (|z| <= 4: {check.passed})")

    stuck = exact_absorption(1, 0, p, q)
    print(
        "\nsplit (1,1) never reaches unanimity: absorbing_reachable ="
        f" {stuck.absorbing_reachable}"
    )


if __name__ == "__main__":
    main()
