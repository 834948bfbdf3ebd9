"""Integral means, truncated norms and the dyadic characterisation sums.

Every quantity over the disc is truncated at r = 1 - 2**-m and reported
shell by shell, shells being the half-open annuli [1 - 2**-k, 1 - 2**-(k+1)).
Deciding whether a truncated sequence converges is left to ``verify``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._numerics import CHUNK, LN2, angular_count, dyadic_radius, ordered_map, shell_nodes, tree_sum
from .inner import InnerFunction
from .weights import RadialWeight, tail_h
from .zeros import DyadicProfile, ZeroList, _as_zero_list, annulus_index, disc_averages

MAX_DEPTH = 20


class QuadratureError(RuntimeError):
    """A quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class MixedNormParams:
    p: float
    q: float
    omega: RadialWeight

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive")


@dataclass
class TruncatedValue:
    """A truncated sum: ``value`` is the (pairwise) sum of the non-negative ``blocks``."""

    depth: int
    value: float
    blocks: np.ndarray
    label: str = ""

    @classmethod
    def from_blocks(cls, blocks, depth: Optional[int] = None, label: str = "") -> "TruncatedValue":
        b = np.asarray(blocks, dtype=float)
        if np.any(b < 0):
            raise ValueError("blocks must be non-negative")
        return cls(len(b) if depth is None else depth, tree_sum(b), b, label)

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.blocks)

    def truncate(self, depth: int) -> "TruncatedValue":
        return TruncatedValue.from_blocks(self.blocks[:depth], depth, self.label)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "value": self.value,
                "blocks": [float(b) for b in self.blocks], "label": self.label}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["m", "value"])
        for m, v in enumerate(self.partial_sums(), start=1):
            wr.writerow([m, repr(float(v))])
        return buf.getvalue()


# -- evaluable functions -------------------------------------------------------

class DerivativeOf:
    """z -> Theta^(order)(z) as a vectorised callable with a stable cache key."""

    def __init__(self, theta: InnerFunction, order: int = 1):
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        self.theta = theta
        self.order = order
        self.cache_key = (json.dumps(theta.to_config(), sort_keys=True), "d", order)

    def __call__(self, z):
        if self.order == 0:
            return self.theta.value(z)
        if self.order == 1:
            return self.theta.derivative(z)
        return self.theta.second_derivative(z)


class BoundaryDefect:
    """z -> (1 - |Theta(z)|) / (1 - |z|), a boundary-defect stand-in for |Theta'|."""

    def __init__(self, theta: InnerFunction):
        self.theta = theta
        self.cache_key = (json.dumps(theta.to_config(), sort_keys=True), "defect")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (1.0 - np.abs(self.theta.value(z))) / (1.0 - np.abs(z))


# -- circle means ----------------------------------------------------------------

def _power_sum(f, r: float, p: float, n: int, offset: float) -> float:
    """sum_j |f(r e^{i 2 pi (j + offset)/n})|**p, chunked."""
    parts = []
    for start in range(0, n, CHUNK):
        j = np.arange(start, min(n, start + CHUNK), dtype=float)
        z = r * np.exp(2j * np.pi * (j + offset) / n)
        v = np.abs(f(z))
        parts.append(float(np.sum(v**p)))
    return tree_sum(parts)


def circle_power_mean(f: Callable, r: float, p: float, tol: float = 1e-8,
                      max_doublings: int = 6, n0: Optional[int] = None) -> float:
    """(1/2 pi) int |f(r e^{it})|**p dt, i.e. M_p(r, f)**p.

    Trapezoid rule with max(256, ceil(64/(1-r))) nodes, doubled (reusing the
    previous nodes) until successive values of M_p agree to ``tol``.
    """
    if not 0 <= r < 1:
        raise ValueError("radius must lie in [0, 1)")
    if r == 0:
        return float(np.abs(f(np.array([0j])))[0] ** p)
    n = n0 or angular_count(1.0 - r)
    total = _power_sum(f, r, p, n, 0.0)
    mean = total / n
    a = b = mean ** (1 / p)
    for _ in range(max_doublings):
        total += _power_sum(f, r, p, n, 0.5)
        n *= 2
        new = total / n
        a, b = mean ** (1 / p), new ** (1 / p)
        if abs(b - a) <= tol * max(abs(b), 1e-300):
            return new
        mean = new
    raise QuadratureError(f"circle mean at r={r:.17g}, p={p:g} not converged: "
                          f"last values {a:.17g}, {b:.17g}")


def circle_mean(f: Callable, r: float, p: float, tol: float = 1e-8) -> float:
    """M_p(r, f) = ((1/2 pi) int |f(r e^{it})|**p dt)**(1/p)."""
    return circle_power_mean(f, r, p, tol) ** (1.0 / p)


_MEMO: dict = {}


def _shell_power_means(f, p: float, k: int, npts: int, tol: float) -> np.ndarray:
    key = getattr(f, "cache_key", None)
    memo_key = None if key is None else (key, float(p), k, npts, tol)
    if memo_key is not None and memo_key in _MEMO:
        return _MEMO[memo_key]
    h, _ = shell_nodes(k, npts)
    out = np.array(ordered_map(lambda hh: circle_power_mean(f, 1.0 - hh, p, tol), h))
    if memo_key is not None:
        _MEMO[memo_key] = out
    return out


def clear_cache() -> None:
    _MEMO.clear()


def _check_depth(m: int) -> None:
    if not 1 <= m <= MAX_DEPTH:
        raise ValueError(f"truncation depth must lie in 1..{MAX_DEPTH}")


def radial_blocks(f: Callable, p: float, q: float, kernel: Callable, m: int,
                  npts: int = 8, tol: float = 1e-8) -> np.ndarray:
    """Per-shell integrals of M_p(r, f)**q * kernel(1 - r) dr for shells 0..m-1."""
    _check_depth(m)
    blocks = []
    for k in range(m):
        h, w = shell_nodes(k, npts)
        mp = _shell_power_means(f, p, k, npts, tol)
        blocks.append(tree_sum(w * mp ** (q / p) * kernel(h)))
    return np.array(blocks)


def _kernel(omega: RadialWeight, kind: str) -> Callable:
    if kind == "weight":
        return lambda h: omega.density(h)
    if kind == "tail":
        return lambda h: tail_h(omega, h) / h
    raise ValueError("kernel must be 'weight' or 'tail'")


def mixed_norm_truncated(f: Callable, params: MixedNormParams, m: int, kernel: str = "weight",
                         npts: int = 8, tol: float = 1e-8) -> TruncatedValue:
    """int_0^{1-2**-m} M_p(r, f)**q K(r) dr with K = omega or omega_hat(r)/(1-r)."""
    b = radial_blocks(f, params.p, params.q, _kernel(params.omega, kernel), m, npts, tol)
    return TruncatedValue.from_blocks(b, m, f"mixed[{kernel}]")


def hardy_means(f: Callable, p: float, m: int, tol: float = 1e-8) -> TruncatedValue:
    """Running maximum of M_p(r_k, f), k = 0..m, written as non-negative increments."""
    _check_depth(m)
    vals = ordered_map(lambda k: circle_mean(f, float(dyadic_radius(k)), p, tol), range(m + 1))
    run = np.maximum.accumulate(np.array(vals))
    blocks = np.concatenate([[run[0]], np.diff(run)])
    return TruncatedValue.from_blocks(blocks, m, "hardy")


def hardy_norm_truncated(f: Callable, p: float, m: int, tol: float = 1e-8) -> float:
    """max over k <= m of M_p(1 - 2**-k, f)."""
    return float(np.max(np.cumsum(hardy_means(f, p, m, tol).blocks)))


# -- level sets ------------------------------------------------------------------

def _sublevel_fraction(theta: InnerFunction, r: float, C: float, tol: float = 1e-6) -> float:
    """Proportion of the circle |z| = r on which |Theta| < C."""
    ind = lambda z: (np.abs(theta.value(z)) < C).astype(float)  # noqa: E731
    n = angular_count(1.0 - r)
    prev = _power_sum(ind, r, 1.0, n, 0.0) / n
    total = prev * n
    for _ in range(4):
        total += _power_sum(ind, r, 1.0, n, 0.5)
        n *= 2
        cur = total / n
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return cur


def level_set_integral(theta: InnerFunction, C: float, p: float, omega: Optional[RadialWeight],
                       m: int, npts: int = 8) -> TruncatedValue:
    """int over {|Theta| < C, |z| <= 1 - 2**-m} of omega_hat(z)/(1-|z|)**(p+1) dA.

    ``omega=None`` stands for omega_hat = 1, the unweighted kernel
    (1-|z|)**-(p+1).
    """
    if not 0 < C < 1:
        raise ValueError("C must lie in (0, 1)")
    _check_depth(m)
    blocks = []
    for k in range(m):
        h, w = shell_nodes(k, npts)
        frac = np.array([_sublevel_fraction(theta, 1.0 - hh, C) for hh in h])
        tail = np.ones_like(h) if omega is None else tail_h(omega, h)
        blocks.append(tree_sum(w * 2 * np.pi * (1.0 - h) * frac * tail / h ** (p + 1)))
    return TruncatedValue.from_blocks(blocks, m, "level_set")


# -- dyadic sums -------------------------------------------------------------------

def _dyadic_factor(params: MixedNormParams, n) -> np.ndarray:
    h = np.ldexp(1.0, -np.asarray(n))
    return tail_h(params.omega, h) / h ** (params.q - params.q / params.p)


def dyadic_sum_theorem1b(source, params: MixedNormParams, delta: float, max_n: int,
                         nodes: int = 64, averages=None) -> TruncatedValue:
    """sum_n omega_hat(r_n)/(1-r_n)**(q-q/p) * int_{|a|<=delta} υ_n(a)**(q/p) dA(a).

    ``source`` is an inner function or a callable a -> zeros; precomputed
    disc averages may be passed instead via ``averages``.
    """
    if averages is None:
        if source is None:
            raise ValueError("disc averages missing: give a zero source or averages")
        averages, _ = disc_averages(source, delta, params.q / params.p, max_n, nodes)
    averages = np.asarray(averages, dtype=float)
    if averages.size < max_n + 1:
        raise ValueError(f"disc averages missing for n > {averages.size - 1}")
    n = np.arange(max_n + 1)
    return TruncatedValue.from_blocks(_dyadic_factor(params, n) * averages[: max_n + 1],
                                      max_n + 1, "dyadic_sum")


def single_point_sum(profile: DyadicProfile, params: MixedNormParams,
                     max_n: Optional[int] = None) -> TruncatedValue:
    """sum_n omega_hat(r_n) υ_n(a)**(q/p) / (1-r_n)**(q-q/p) at a single a."""
    max_n = profile.max_n if max_n is None else max_n
    if max_n > profile.max_n:
        raise ValueError(f"profile certified only up to n = {profile.max_n}")
    n = np.arange(max_n + 1)
    counts = profile.array()[: max_n + 1]
    return TruncatedValue.from_blocks(_dyadic_factor(params, n) * counts ** (params.q / params.p),
                                      max_n + 1, "single_point")


def _complete_shells(zl: ZeroList, depth: Optional[int]) -> int:
    """Number of leading shells whose zeros are all listed (capped at ``depth``)."""
    if zl.complete_below >= 1.0:
        used = int(annulus_index(zl.gaps).max()) + 1 if len(zl) else 0
        return used if depth is None else depth
    n = max(int(np.floor(-np.log2(1.0 - zl.complete_below))), 0)
    return n if depth is None else min(n, depth)


def _shell_sums(zl: ZeroList, values: np.ndarray, depth: Optional[int]) -> np.ndarray:
    n = _complete_shells(zl, depth)
    out = np.zeros(n)
    if n == 0 or len(zl) == 0:
        return out
    idx = annulus_index(zl.gaps)
    keep = idx < n
    # per-shell pairwise sums for reproducibility
    order = np.argsort(idx[keep], kind="stable")
    ii, vv = idx[keep][order], values[keep][order]
    bounds = np.searchsorted(ii, np.arange(n + 1))
    for s in range(n):
        out[s] = tree_sum(vv[bounds[s]:bounds[s + 1]])
    return out


def zero_sum_theorem3(zeros, p: float, omega: RadialWeight, depth: Optional[int] = None) -> TruncatedValue:
    """sum_n omega_hat(z_n)/(1-|z_n|)**(p-1), grouped by dyadic shell.

    Only shells fully covered by the zero list are reported; a complete finite
    list is padded with empty shells up to ``depth``.
    """
    zl = _as_zero_list(zeros)
    vals = tail_h(omega, zl.gaps) * zl.gaps ** (1.0 - p) if len(zl) else np.zeros(0)
    return TruncatedValue.from_blocks(_shell_sums(zl, np.asarray(vals, dtype=float), depth),
                                      label="zero_sum")


def zero_power_sum(zeros, alpha: float, depth: Optional[int] = None) -> TruncatedValue:
    """sum_n (1-|z_n|)**alpha, grouped by dyadic shell."""
    zl = _as_zero_list(zeros)
    return TruncatedValue.from_blocks(_shell_sums(zl, zl.gaps ** alpha, depth), label="zero_power_sum")


# -- fractional derivatives and Besov norms ------------------------------------------

def fractional_derivative_circle(f: Callable, alpha: float, r: float, N: Optional[int] = None,
                                 tol: float = 1e-10, max_n: int = 1 << 20) -> np.ndarray:
    """D**alpha f sampled at r e^{2 pi i j/N}, where D**alpha multiplies the n-th
    Taylor coefficient by (n+1)**alpha.

    Coefficients come from an FFT on |z| = (1+r)/2.  Without ``N`` the sample
    count starts at 256 and doubles until two successive results agree to
    ``tol`` (relative, sup norm).
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if not 0 <= r < 1:
        raise ValueError("radius must lie in [0, 1)")
    rho = 0.5 * (1.0 + r)

    def at(n):
        th = 2 * np.pi * np.arange(n) / n
        c = np.fft.fft(f(rho * np.exp(1j * th))) / n
        k = np.arange(n)
        mult = (k + 1.0) ** alpha * np.exp(k * (np.log(r) - np.log(rho))) if r > 0 else \
            np.where(k == 0, 1.0, 0.0)
        return np.fft.ifft(c * mult) * n

    if N is not None:
        if N & (N - 1):
            raise ValueError("N must be a power of two")
        return at(N)
    n = 256
    prev = at(n)
    while n < max_n:
        n *= 2
        cur = at(n)
        err = np.max(np.abs(cur[::2] - prev))
        if err <= tol * max(np.max(np.abs(cur)), 1e-300):
            return cur
        prev = cur
    raise QuadratureError(f"fractional derivative aliasing not controlled at N = {max_n}")


def taylor_coefficients(f: Callable, rho: float, N: int) -> np.ndarray:
    """a_n for n < N from an FFT on |z| = rho."""
    th = 2 * np.pi * np.arange(N) / N
    c = np.fft.fft(f(rho * np.exp(1j * th))) / N
    return c * np.exp(-np.arange(N) * np.log(rho))


def besov_norm_truncated(f: Callable, p: float, q: float, alpha: float, m: int,
                         npts: int = 8, tol: float = 1e-8) -> TruncatedValue:
    """int_0^{1-2**-m} M_p(r, D**(1+alpha) f)**q (1-r)**(q-1) dr by shells.

    For p = 2 the means come from Parseval's identity on one set of Taylor
    coefficients; otherwise D**(1+alpha) f is sampled per radius.
    """
    _check_depth(m)
    kernel = lambda h: h ** (q - 1.0)  # noqa: E731
    if p == 2:
        rho = 1.0 - 2.0 ** -(m + 2)
        N = 1 << (m + 7)
        a = taylor_coefficients(f, rho, N)
        k = np.arange(N)
        c2 = (k + 1.0) ** (2 * (1 + alpha)) * np.abs(a) ** 2
        blocks = []
        for s in range(m):
            h, w = shell_nodes(s, npts)
            m2 = []
            for hh in h:
                top = min(N, int(40.0 / hh) + 1)  # r**(2n) < e**-80 beyond
                m2.append(tree_sum(c2[:top] * np.exp(2 * k[:top] * np.log1p(-hh))))
            m2 = np.array(m2)
            blocks.append(tree_sum(w * m2 ** (q / 2) * kernel(h)))
        return TruncatedValue.from_blocks(blocks, m, "besov")
    blocks = []
    for s in range(m):
        h, w = shell_nodes(s, npts)
        mp = []
        for hh in h:
            vals = fractional_derivative_circle(f, 1 + alpha, 1.0 - hh, tol=tol)
            mp.append(np.mean(np.abs(vals) ** p))
        blocks.append(tree_sum(w * np.array(mp) ** (q / p) * kernel(h)))
    return TruncatedValue.from_blocks(blocks, m, "besov")


# -- Stolz angles and the H^p identity for Blaschke products -------------------------

def _stolz_arcs(zl: ZeroList, eta: float):
    z, h = zl.zeros, zl.gaps
    full = np.zeros(len(z), dtype=bool)
    half = np.zeros(len(z))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = h * np.sqrt(eta * eta - 1.0) / (2.0 * np.sqrt(1.0 - h))
    origin = np.abs(z) == 0
    full |= origin & (eta >= 1)
    full |= (~origin) & (s >= 1)
    ok = (~origin) & (s < 1)
    half[ok] = 2.0 * np.arcsin(s[ok])
    return full, half


def stolz_sum(zeros, eta: float, p: float, N: Optional[int] = None) -> float:
    """int_0^{2 pi} (sum over z_n in the Stolz angle at e^{it} of 1/(1-|z_n|))**p dt.

    The default sweeps the exact arcs {t : |z_n - e^{it}| <= eta (1-|z_n|)};
    with ``N`` the integrand is sampled at N equally spaced angles instead.
    """
    if eta <= 1:
        raise ValueError("eta must exceed 1")
    zl = _as_zero_list(zeros)
    if len(zl) == 0:
        return 0.0
    full, half = _stolz_arcs(zl, eta)
    weight = 1.0 / zl.gaps
    base = tree_sum(weight[full])
    part = (~full) & (half > 0)
    phi = np.angle(zl.zeros[part]) % (2 * np.pi)
    hw, wt = half[part], weight[part]
    if N is not None:
        t = 2 * np.pi * np.arange(N) / N
        vals = np.full(N, base)
        for c, a, v in zip(phi, hw, wt):
            d = np.abs((t - c + np.pi) % (2 * np.pi) - np.pi)
            vals += np.where(d <= a, v, 0.0)
        return float(2 * np.pi * np.mean(vals**p))
    starts = (phi - hw) % (2 * np.pi)
    ends = (phi + hw) % (2 * np.pi)
    wraps = starts > ends
    base0 = base + float(np.sum(wt[wraps]))
    pos = np.concatenate([starts, ends])
    delta = np.concatenate([wt, -wt])
    order = np.argsort(pos, kind="stable")
    pos, delta = pos[order], delta[order]
    level = base0 + np.cumsum(delta)
    edges = np.concatenate([[0.0], pos, [2 * np.pi]])
    levels = np.concatenate([[base0], level])
    lengths = np.diff(edges)
    return tree_sum(lengths * np.maximum(levels, 0.0) ** p)


def hp_blaschke_identity_rhs(zeros, p: float, N: Optional[int] = None, tol: float = 1e-10) -> float:
    """(1/2 pi) int (sum_n (1-|z_n|**2)/|z_n - e^{it}|**2)**p dt, i.e. ||B'||_{H^p}**p."""
    zl = _as_zero_list(zeros)
    if len(zl) == 0:
        return 0.0
    z = zl.zeros
    gap2 = zl.gaps * (2.0 - zl.gaps)

    def integrand(n, offset):
        t = 2 * np.pi * (np.arange(n) + offset) / n
        e = np.exp(1j * t)
        s = np.sum(gap2[:, None] / np.abs(z[:, None] - e[None, :]) ** 2, axis=0)
        return float(np.sum(s**p))

    if N is not None:
        return integrand(N, 0.0) / N
    n = angular_count(float(np.min(zl.gaps)))
    total = integrand(n, 0.0)
    prev = total / n
    for _ in range(8):
        total += integrand(n, 0.5)
        n *= 2
        cur = total / n
        if abs(cur - prev) <= tol * cur:
            return cur
        prev = cur
    raise QuadratureError(f"H^p identity quadrature not converged: {prev!r}, {cur!r}")
