"""
How the pipeline scales
=======================

Parse, transform and render a synthetic contract duplicated k times, then fit
a line to each stage. Pass a larger k on the command line for a longer run.
"""

import sys

from normforge.bench import CSV_HEADER, linear_r2, run_bench, synthetic_base

k_max = int(sys.argv[1]) if len(sys.argv) > 1 else 8
rows = run_bench(synthetic_base(0), k_max, runs=5)
print(CSV_HEADER)
for row in rows:
    print(row.csv())

ks = [r.k for r in rows]
for stage in ("parse", "transform", "render"):
    print(f"{stage:>9}: R^2 = {linear_r2(ks, [getattr(r, f'{stage}_ms') for r in rows]):.4f}")
