"""Zeros of the Frostman shifts of S(z) = exp((z+1)/(z-1)).

Computes the explicit zeros for a = 1/e, checks them against the
argument-principle finder and prints how many fall in each dyadic annulus.
"""

import math

import numpy as np

from innerfn import AtomicSingular
from innerfn.zeros import atomic_frostman_zeros, dyadic_counts, find_zeros_numeric

a = math.exp(-1)
S = AtomicSingular()

exact = atomic_frostman_zeros(a, 5000)
print(f"{len(exact)} explicit zeros, max |S(z) - a| = {np.abs(S.value(exact.zeros[:401]) - a).max():.2e}")

r = 1 - 2.0**-10
found = find_zeros_numeric(S, a, r)
inside = exact.zeros[np.abs(exact.zeros) <= r]
gap = np.abs(found.zeros[:, None] - inside[None, :]).min(axis=1).max()
print(f"contour finder: {len(found)} zeros below |z| = {r}, farthest from explicit list {gap:.1e}")

prof = dyadic_counts(exact, 16)
print(" n  count  count(n)/count(n-2)")
for n, c in prof.counts.items():
    prev = prof.counts.get(n - 2, 0)
    print(f"{n:2d}  {c:5d}  {c / prev if prev else float('nan'):8.3f}")
