"""Shared numerical plumbing: dyadic grids, deterministic reductions, worker pool."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

LN2 = float(np.log(2.0))

# Largest angular chunk evaluated at once; keeps peak memory around 100 MB.
CHUNK = 1 << 20


def dyadic_radius(n):
    """r_n = 1 - 2**-n (exact in binary floating point for n <= 52)."""
    return 1.0 - np.ldexp(1.0, -np.asarray(n))


@lru_cache(maxsize=None)
def _legendre(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


def shell_nodes(k: int, npts: int = 8):
    """Gauss-Legendre nodes for the shell r in [1 - 2**-k, 1 - 2**-(k+1)).

    The shell is parametrised by t in [k, k+1] with r = 1 - 2**-t, so that
    dr = ln2 * 2**-t dt.  Returns ``(h, w)`` where ``h = 1 - r`` at the nodes
    and ``w`` are the weights for integrating ``g(r) dr``.
    """
    x, wt = _legendre(npts)
    t = k + 0.5 * (x + 1.0)
    h = np.exp2(-t)
    return h, 0.5 * wt * LN2 * h


def tree_sum(values) -> float:
    """Fixed-tree pairwise sum; bit-reproducible for a given input order."""
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0])


def angular_count(h: float, minimum: int = 256, per_h: float = 64.0) -> int:
    """Angular node budget N(r) = max(256, ceil(64 / (1 - r)))."""
    return int(max(minimum, np.ceil(per_h / h)))


def thread_count() -> int:
    raw = os.environ.get("INNERFN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn, items):
    """Map ``fn`` over ``items`` with the INNERFN_THREADS pool, keeping input order."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
