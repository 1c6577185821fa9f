"""The halt/consensus phase transition of the touched-pair model.

Under the sweep rule  delta(L) = ceil(((p-q)/q) n - L sqrt(n ln n))  the
initial bias shrinks as L grows.  Small L gives consensus within a few
days; large L freezes the dynamics; the crossover concentrates around
L* = H(p, q) = sqrt(p(2-p-q))/q.  This scan uses a reduced size and
replicate count so it finishes in about a minute; the benchmark tables
(T4/T6) are the full-size version.
"""

from majoritysbm import ModelVariant, constants, scan_phase


def main():
    n, p, q = 200, 1.0, 0.3
    critical = constants(p, q).h
    grid = [0.0, 1.0, 2.0, 2.4, 2.8, 3.2, 4.0]
    result = scan_phase(
        ModelVariant.NON_MARKOVIAN, n, p, q, grid,
        replicates=200, max_rounds=10_000, master_seed=11,
    )
    print(f"n={n}, p={p}, q={q}; predicted critical L* = H(p,q) = {critical:.3f}\n")
    print(f"{'L':>6} {'delta':>6} {'wins':>6} {'halts':>6} {'avg last day':>13}")
    for L, delta, rep in result.points:
        avg = f"{rep.avg_last_day:.2f}" if rep.avg_last_day is not None else "--"
        print(f"{L:>6.2f} {delta:>6} {rep.plus_wins:>6} {rep.halts:>6} {avg:>13}")
    if result.crossing:
        lo, hi = result.crossing
        print(f"\nwin frequency crosses 1/2 for L in [{lo:g}, {hi:g}]"
              f" (contains L*={critical:.3f}: {lo <= critical <= hi})")


if __name__ == "__main__":
    main()
