#!/usr/bin/env python3
"""Compare optimizers on the benchmark suite and print a compact table.

Smaller and faster than the full reproduction script; handy for iterating on
optimizer changes. Example:

    python scripts/benchmark_optimizers.py --runs 10 --optimizers ifox,fox,random
"""

import argparse
import sys

from alc.cec2019 import FUNCTION_IDS
from alc.experiments import run_optbench


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--functions", default=",".join(FUNCTION_IDS))
    parser.add_argument("--optimizers", default="ifox,fox")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--agents", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    function_ids = tuple(f.strip() for f in args.functions.split(",") if f.strip())
    optimizer_ids = tuple(o.strip() for o in args.optimizers.split(",") if o.strip())
    result = run_optbench(
        function_ids=function_ids,
        optimizer_ids=optimizer_ids,
        runs=args.runs,
        epochs=args.epochs,
        agents=args.agents,
        seed=args.seed,
        jobs=args.jobs,
    )

    width = max(len(o) for o in optimizer_ids)
    header = "func " + " ".join(f"{o:>{width + 11}s}" for o in optimizer_ids)
    print(header)
    by_cell = {(r["function"], r["optimizer"]): r for r in result.stats}
    for fid in function_ids:
        cells = []
        best = min(by_cell[(fid, o)]["mean"] for o in optimizer_ids)
        for opt in optimizer_ids:
            row = by_cell[(fid, opt)]
            marker = "*" if row["mean"] == best else " "
            cells.append(f"{row['mean']:>{width + 10}.4g}{marker}")
        print(f"{fid:4s} " + " ".join(cells))
    ranks = result.ranks
    print()
    for opt in ranks.optimizers:
        print(f"{opt}: total rank {ranks.totals[opt]:g}, average {ranks.averages[opt]:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
