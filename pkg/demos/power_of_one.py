"""A single extra vote is a real advantage under full daily resampling.

Runs the full-resample model with initial bias 1 for growing network
sizes.  The win frequency of the leading side stays well above 1/2 at
every size even though the relative bias 1/(2n+1) vanishes.  With 200
replicates per column this takes a couple of minutes; pass a replicate
count as argv[1] to change it (the benchmark tables use 1000).
"""

import sys

from majoritysbm import BlockParams, ExperimentSpec, ModelVariant, run_experiment


def main(replicates: int = 200):
    params = BlockParams(0.5, 0.3)
    print(f"bias 1, p=0.5, q=0.3, {replicates} replicates per column")
    print(f"{'n':>5} {'win freq':>9} {'avg last day':>13} {'95% CI':>18}")
    for idx, n in enumerate((25, 50, 100, 150)):
        spec = ExperimentSpec(
            ModelVariant.MARKOVIAN, n, 1, params,
            replicates=replicates, max_rounds=100_000, master_seed=100 + idx,
        )
        rep = run_experiment(spec)
        freq = rep.plus_wins / rep.replicates
        lo, hi = rep.wilson_ci
        print(
            f"{n:>5} {freq:>9.3f} {rep.avg_last_day:>13.2f} "
            f"[{lo:.3f}, {hi:.3f}]"
        )
    print("\nconsensus time grows steeply with n; the advantage does not fade")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)
