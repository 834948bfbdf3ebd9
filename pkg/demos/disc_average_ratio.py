"""Bergman-type norm of S' against the disc-averaged zero counts.

Both truncated quantities grow with the depth m while their ratio settles,
which is what a two-sided estimate predicts.
"""

from innerfn import AtomicSingular
from innerfn.verify import verify_theorem1b
from innerfn.weights import power_weight

res = verify_theorem1b(AtomicSingular(), 1.0, 1.0, power_weight(0.0), delta=0.5, m_range=(6, 14))
print(" m      norm       disc sum    ratio")
for m, left, right, ratio in res.ratio.pairs:
    print(f"{m:2d}  {left:10.6f}  {right:10.6f}  {ratio:7.4f}")
print(f"drift {res.ratio.drift:.4f}; verdicts", {k: v.verdict for k, v in res.verdicts.items()})
