"""Regenerate the six benchmark tables (T1-T6) as CSV.

By default runs a reduced replicate count so every table finishes
quickly; pass ``--full`` for the reference 1000 replicates per column
(hours of CPU for the bias-one table at its largest sizes).  The same
output is available from the command line:

    majoritysbm table T4 --replicates 1000 --seed 42 --out t4.csv
"""

import argparse
import sys
import time

from majoritysbm import emit, reproduce_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("tables", nargs="*", default=["T6"], help="table ids, e.g. T1 T6")
    ap.add_argument("--full", action="store_true", help="1000 replicates per column")
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)
    replicates = 1000 if args.full else args.replicates
    for tid in args.tables:
        t0 = time.perf_counter()
        reports = reproduce_table(tid, replicates=replicates, master_seed=args.seed)
        emit(reports, "csv", f"{tid.lower()}.csv")
        print(
            f"{tid}: {len(reports)} columns x {replicates} replicates "
            f"-> {tid.lower()}.csv  ({time.perf_counter() - t0:.1f}s)",
            file=sys.stderr,
        )


if __name__ == "__main__":
    main()
