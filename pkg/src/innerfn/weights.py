"""Radial weights, their tails, and the doubling classes.

All weights are stored as functions of ``h = 1 - r`` so that the region near
the unit circle is resolved without cancellation.  ``tail_integral`` returns

    omega_hat(r) = int_r^1 omega(s) ds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np

from ._numerics import LN2, shell_nodes, tree_sum


class NonIntegrableWeightError(ValueError):
    """Raised when the tail quadrature of a weight does not converge."""


@dataclass(frozen=True)
class RadialWeight:
    """A radial weight omega on the disc.

    ``density`` and ``tail`` take ``h = 1 - r`` (array-like) and return
    omega and omega_hat respectively.  ``tail`` is optional; without it the
    tail is integrated numerically.  ``log_tail`` is only needed by families
    whose tail underflows (e.g. exp(-1/(1-r))).
    """

    density: Callable
    family: str = "custom"
    params: tuple = ()
    tail: Optional[Callable] = None
    log_tail: Optional[Callable] = None
    name: str = ""

    def __call__(self, r):
        return self.density(1.0 - np.asarray(r, dtype=float))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        args = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({args})"

    def to_config(self) -> dict:
        cfg = {"family": self.family}
        cfg.update(dict(self.params))
        if self.family == "custom":
            cfg["name"] = self.name
        return cfg

    def scaled(self, c: float) -> "RadialWeight":
        """The weight c * omega (c > 0)."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        tail = None if self.tail is None else (lambda h, t=self.tail: c * t(h))
        log_tail = None if self.log_tail is None else (lambda h, lt=self.log_tail: np.log(c) + lt(h))
        return RadialWeight(lambda h: c * self.density(h), "custom", (), tail, log_tail,
                            name=f"{c:g}*{self.label}")


@dataclass(frozen=True)
class ShiftedWeight(RadialWeight):
    """omega_x(r) = omega(r) (1 - r)**x."""

    base: Optional[RadialWeight] = None
    x: float = 0.0

    def to_config(self) -> dict:
        return {"family": "shifted", "base": self.base.to_config(), "x": self.x}


def power_weight(alpha: float) -> RadialWeight:
    """(1 - r)**alpha, alpha > -1."""
    if alpha <= -1:
        raise NonIntegrableWeightError(f"power weight with alpha={alpha} is not integrable")
    a1 = alpha + 1.0
    return RadialWeight(
        density=lambda h: np.power(h, alpha),
        family="power",
        params=(("alpha", float(alpha)),),
        tail=lambda h: np.power(h, a1) / a1,
        log_tail=lambda h: a1 * np.log(h) - np.log(a1),
    )


def power_log_weight(alpha: float, beta: float) -> RadialWeight:
    """(1 - r)**alpha * log(e / (1 - r))**beta."""
    if alpha <= -1:
        raise NonIntegrableWeightError(f"power_log weight with alpha={alpha} is not integrable")
    return RadialWeight(
        density=lambda h: np.power(h, alpha) * np.power(1.0 - np.log(h), beta),
        family="power_log",
        params=(("alpha", float(alpha)), ("beta", float(beta))),
    )


def _e2_log(x: float) -> float:
    return float(mpmath.log(mpmath.expint(2, x)))


def exponential_weight(c: float = 1.0) -> RadialWeight:
    """exp(-c / (1 - r)); its tail is E_2(c/h) * h."""
    log_e2 = np.vectorize(_e2_log, otypes=[float])

    def log_tail(h):
        h = np.asarray(h, dtype=float)
        return log_e2(c / h) + np.log(h)

    return RadialWeight(
        density=lambda h: np.exp(-c / np.asarray(h, dtype=float)),
        family="exponential",
        params=(("c", float(c)),),
        tail=lambda h: np.exp(log_tail(h)),
        log_tail=log_tail,
    )


_REGISTRY: dict[str, Callable[..., RadialWeight]] = {}


def register_weight(name: str, density: Callable, tail: Optional[Callable] = None) -> None:
    """Register a custom weight (density and optional tail as functions of 1 - r)."""
    _REGISTRY[name] = lambda: RadialWeight(density, "custom", (), tail, None, name=name)


def custom_weight(name: str) -> RadialWeight:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"no custom weight registered under {name!r}") from None


register_weight("unit", lambda h: np.ones_like(np.asarray(h, dtype=float)), lambda h: np.asarray(h, dtype=float))


def weight_from_config(cfg: dict) -> RadialWeight:
    """Build a weight from ``{"family": ..., <params>}``."""
    family = cfg.get("family")
    if family == "power":
        return power_weight(float(cfg.get("alpha", 0.0)))
    if family == "power_log":
        return power_log_weight(float(cfg.get("alpha", 0.0)), float(cfg.get("beta", 0.0)))
    if family == "exponential":
        return exponential_weight(float(cfg.get("c", 1.0)))
    if family == "custom":
        return custom_weight(cfg["name"])
    if family == "shifted":
        return shift_weight(weight_from_config(cfg["base"]), float(cfg["x"]))
    raise ValueError(f"unknown weight family {family!r}")


# -- tails -------------------------------------------------------------------

def _tail_quadrature(w: RadialWeight, h0: float, rtol: float = 1e-10,
                     npts: int = 20, t_max: float = 1000.0) -> float:
    # integrate omega over t in [t0, inf) with r = 1 - 2**-t, unit-length panels
    t0 = -np.log2(h0)
    x, wt = np.polynomial.legendre.leggauss(npts)
    parts = []
    prev = None
    j = 0
    while True:
        t = t0 + j + 0.5 * (x + 1.0)
        h = np.exp2(-t)
        with np.errstate(over="ignore", invalid="ignore"):
            c = float(np.sum(0.5 * wt * w.density(h) * h) * LN2)
        if not np.isfinite(c):
            raise NonIntegrableWeightError(f"weight {w.label} is not integrable near r = 1")
        parts.append(c)
        total = tree_sum(parts)
        if j >= 4 and prev is not None and prev > 0:
            q = c / prev
            if c == 0.0:
                return total
            if q < 1.0:
                remainder = c * q / (1.0 - q)
                if remainder <= rtol * total:
                    return total + remainder
        if t0 + j > t_max:
            raise NonIntegrableWeightError(
                f"tail quadrature for weight {w.label} did not converge (non-integrable near r = 1?)")
        prev = c
        j += 1


def tail_integral(w: RadialWeight, r) -> float | np.ndarray:
    """omega_hat(r) = int_r^1 omega(s) ds for r in [0, 1)."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("tail_integral requires 0 <= r < 1")
    return tail_h(w, 1.0 - r)


def tail_h(w: RadialWeight, h) -> float | np.ndarray:
    """omega_hat expressed through h = 1 - r."""
    h = np.asarray(h, dtype=float)
    if w.tail is not None:
        out = np.asarray(w.tail(h), dtype=float)
    else:
        out = np.vectorize(lambda hh: _tail_quadrature(w, float(hh)), otypes=[float])(h)
    return float(out) if out.ndim == 0 else out


def log_tail_h(w: RadialWeight, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if w.log_tail is not None:
        return np.asarray(w.log_tail(h), dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(tail_h(w, h))


def shift_weight(w: RadialWeight, x: float) -> ShiftedWeight:
    """omega_x(r) = omega(r)(1 - r)**x; raises if omega_x is not integrable."""
    x = float(x)
    if w.family == "power":
        alpha = dict(w.params)["alpha"] + x
        if alpha <= -1:
            raise NonIntegrableWeightError(f"shifted weight {w.label} * (1-r)^{x:g} is not integrable")
        pw = power_weight(alpha)
        tail, log_tail = pw.tail, pw.log_tail
    else:
        tail = log_tail = None
    out = ShiftedWeight(
        density=lambda h: w.density(h) * np.power(h, x),
        family="shifted",
        params=(("x", x),),
        tail=tail,
        log_tail=log_tail,
        name=f"{w.label}*(1-r)^{x:g}",
        base=w,
        x=x,
    )
    tail_h(out, 1.0)  # integrability check
    return out


# -- classification ----------------------------------------------------------

@dataclass
class WeightClassReport:
    in_Dhat: Optional[bool]
    C_hat: float
    in_Dcheck: Optional[bool]
    K: float
    C_check: float
    alpha_hat: float
    beta_hat: float
    exponent_ls: float
    in_Dhat_p: dict = field(default_factory=dict)
    in_Dcheck_p: dict = field(default_factory=dict)
    grid: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def v(x):
            return "inconclusive" if x is None else x

        return {
            "in_Dhat": v(self.in_Dhat), "C_hat": _jsonable(self.C_hat),
            "in_Dcheck": v(self.in_Dcheck), "K": self.K, "C_check": _jsonable(self.C_check),
            "alpha_hat": self.alpha_hat, "beta_hat": self.beta_hat,
            "exponent_ls": self.exponent_ls,
            "in_Dhat_p": {f"{p:g}": {"member": v(m), "sup": _jsonable(s)} for p, (m, s) in self.in_Dhat_p.items()},
            "in_Dcheck_p": {f"{p:g}": {"member": v(m), "sup": _jsonable(s)} for p, (m, s) in self.in_Dcheck_p.items()},
            "grid": list(self.grid),
        }


def _jsonable(x: float):
    return x if np.isfinite(x) else str(x)


STABLE_CHANGE = 0.05
GROWTH_STEP = 1.25


def decide_bounded(q, depth: int):
    """Membership from a defining ratio sampled at depths 0..depth.

    True when the running sup changes by < 5% between depth-2 and depth;
    False when the ratio grows by > 25% at every step from depth 8 on;
    None (inconclusive) otherwise.  Returns ``(verdict, sup)``.
    """
    q = np.asarray(q, dtype=float)
    lo = depth - 2
    if lo < 6:
        return None, float("nan")
    with np.errstate(invalid="ignore"):
        sup_hi = float(np.nanmax(q[: depth + 1]))
        sup_lo = float(np.nanmax(q[: lo + 1]))
    steps = []
    for m in range(8, depth):
        a, b = q[m], q[m + 1]
        if np.isnan(a) or np.isnan(b):
            steps.append(False)
        elif np.isinf(b):
            steps.append(True)
        else:
            steps.append(b > GROWTH_STEP * a)
    if steps and all(steps):
        return False, sup_hi
    if np.isfinite(sup_hi) and sup_lo > 0 and (sup_hi - sup_lo) / sup_lo < STABLE_CHANGE:
        return True, sup_hi
    return None, sup_hi


def classify_weight(w: RadialWeight, p_list=(), grid_depth: int = 16, K: float = 2.0) -> WeightClassReport:
    """Test omega against the upper/lower doubling classes on the dyadic grid.

    The grid is r_m = 1 - 2**-m, m = 0..grid_depth.  Exponents are the
    extreme pairwise log-log slopes of omega_hat over the five deepest
    grid points.
    """
    if grid_depth < 8:
        raise ValueError("grid_depth must be at least 8")
    if K <= 1:
        raise ValueError("K must exceed 1")
    depths = np.arange(grid_depth + 2)
    h = np.exp2(-depths.astype(float))
    lt = log_tail_h(w, h)

    # upper doubling: omega_hat(r) / omega_hat((1 + r)/2), evaluated at r_m
    log_dhat = lt[:-1] - lt[1:]
    q_hat = np.exp(np.minimum(log_dhat, 700.0))
    q_hat[log_dhat > 700.0] = np.inf
    in_dhat, c_hat = decide_bounded(q_hat, grid_depth)

    # lower doubling: omega_hat(r) >= C omega_hat(1 - (1-r)/K), C > 1
    lt_k = lt[:-1] - (lt[1:] if K == 2.0 else log_tail_h(w, h[:-1] / K))
    ratio_k = np.exp(np.minimum(lt_k, 700.0))
    with np.errstate(divide="ignore"):
        q_check = np.where(ratio_k > 1.0, 1.0 / (ratio_k - 1.0), np.inf)
    in_dcheck, sup_check = decide_bounded(q_check, grid_depth)
    c_check = 1.0 + 1.0 / sup_check if sup_check > 0 else float("inf")

    tail_idx = np.arange(grid_depth - 4, grid_depth + 1)
    lh = np.log(h[tail_idx])
    lv = lt[tail_idx]
    slopes = [(lv[i] - lv[j]) / (lh[i] - lh[j])
              for i in range(len(tail_idx)) for j in range(i + 1, len(tail_idx))]
    slopes = np.asarray(slopes)
    exponent_ls = float(np.polyfit(lh, lv, 1)[0]) if np.all(np.isfinite(lv)) else float("nan")

    report = WeightClassReport(
        in_Dhat=in_dhat, C_hat=c_hat, in_Dcheck=in_dcheck, K=float(K), C_check=c_check,
        alpha_hat=float(np.min(slopes)), beta_hat=float(np.max(slopes)), exponent_ls=exponent_ls,
        grid=[float(1.0 - x) for x in h[: grid_depth + 1]],
    )
    for p in p_list:
        report.in_Dhat_p[float(p)] = _dhat_p(w, float(p), grid_depth, lt)
        report.in_Dcheck_p[float(p)] = _dcheck_p(w, float(p), grid_depth, lt)
    return report


def _dhat_p(w, p, depth, lt):
    # (1-r)^p / omega_hat(r) * int_0^r omega(s) (1-s)^-p ds
    q = np.empty(depth + 1)
    q[0] = 0.0
    acc = []
    for m in range(1, depth + 1):
        hk, wk = shell_nodes(m - 1, 16)
        acc.append(float(np.sum(wk * w.density(hk) * np.power(hk, -p))))
        with np.errstate(over="ignore"):
            q[m] = np.exp(-m * LN2 * p - lt[m]) * tree_sum(acc)
    return decide_bounded(q, depth)


def _dcheck_p(w, p, depth, lt):
    # (1-r)^p / omega_hat(r) * int_r^1 omega(s) (1-s)^-p ds
    derived = RadialWeight(lambda h: w.density(h) * np.power(h, -p), name=f"{w.label}*(1-r)^-{p:g}")
    q = np.empty(depth + 1)
    for m in range(depth + 1):
        hm = float(np.exp2(-m))
        try:
            inner = _tail_quadrature(derived, hm)
        except NonIntegrableWeightError:
            q[:] = np.inf
            return False, float("inf")
        with np.errstate(over="ignore"):
            q[m] = np.exp(m * -LN2 * p - lt[m]) * inner
    return decide_bounded(q, depth)
