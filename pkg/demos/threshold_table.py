"""Membership thresholds for the derivative of exp((z+1)/(z-1)).

Runs the same table as `innerfn reproduce example7` at a smaller depth and
prints it.  Expect a few minutes on one core.
"""

import sys

from innerfn.cli import reproduce_example7

m = int(sys.argv[1]) if len(sys.argv) > 1 else 14
res = reproduce_example7(m=m, n_zeros=20000)
print(f"(1-|z_n|) n^2 for 10 <= |n| <= 200 lies in {res['moduli_law_window']}")
for row in res["table"]:
    flag = "" if row["verdict"] == row["expected"] else "   <-"
    print(f"{row['test']:<22} {row['parameter']:>6g}  expected {row['expected']:<11} "
          f"got {row['verdict']:<12}{flag}")
