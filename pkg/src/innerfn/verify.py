"""Convergence verdicts, two-sided ratio reports and the equivalence suites.

Each suite computes the same membership question through independent
pipelines (norm quadrature, zero sums, level sets, disc averages) and
reports whether the conclusive verdicts coincide.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .inner import AtomicSingular, FiniteBlaschke, InnerFunction
from .norms import (
    DerivativeOf,
    MixedNormParams,
    TruncatedValue,
    besov_norm_truncated,
    dyadic_sum_theorem1b,
    hardy_means,
    level_set_integral,
    mixed_norm_truncated,
    single_point_sum,
    zero_power_sum,
    zero_sum_theorem3,
)
from .weights import RadialWeight, classify_weight, power_weight, shift_weight
from .zeros import disc_averages, dyadic_counts, frostman_zeros

CONVERGE_SLOPE = -0.2
DIVERGE_SLOPE = -0.05
RESIDUAL_MAX = 0.5
FIT_WINDOW = 6
ZERO_FLOOR = 1e-15

SCHEMA_VERSION = 1


@dataclass
class ConvergenceVerdict:
    verdict: str
    fitted_slope: float
    depths_used: tuple
    residual: float
    last_first: float = float("nan")

    @property
    def conclusive(self) -> bool:
        return self.verdict != "inconclusive"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "fitted_slope": _num(self.fitted_slope),
                "depths_used": list(self.depths_used), "residual": _num(self.residual),
                "last_first": _num(self.last_first)}


def _num(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def classify(blocks, window: int = FIT_WINDOW) -> ConvergenceVerdict:
    """Verdict from a least-squares fit of log2(block_k) against k over the last blocks.

    convergent: slope <= -0.2 and RMS residual <= 0.5; divergent: slope >= -0.05
    and last/first >= 1.  Blocks that drop to rounding level and stay there
    count as a finished sum (convergent); a zero followed by non-zero blocks
    is inconclusive.
    """
    b = np.asarray(blocks.blocks if isinstance(blocks, TruncatedValue) else blocks, dtype=float)
    n = len(b)
    if n < window:
        return ConvergenceVerdict("inconclusive", float("nan"), (0, n), float("nan"))
    k = np.arange(n - window, n)
    tail = b[-window:].copy()
    scale = float(np.sum(b))
    tail[tail <= ZERO_FLOOR * scale] = 0.0
    span = (int(k[0]), int(k[-1]))
    nz = np.nonzero(tail)[0]
    if len(nz) == 0 or (tail[-1] == 0 and np.all(tail[: nz[-1] + 1] > 0)):
        # the blocks fall to rounding level and stay there: a finished sum
        return ConvergenceVerdict("convergent", float("-inf"), span, 0.0, 0.0)
    if np.any(tail == 0):
        return ConvergenceVerdict("inconclusive", float("nan"), span, float("nan"))
    y = np.log2(tail)
    slope, icpt = np.polyfit(k, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * k + icpt)) ** 2)))
    ratio = float(tail[-1] / tail[0])
    if slope <= CONVERGE_SLOPE and resid <= RESIDUAL_MAX:
        v = "convergent"
    elif slope >= DIVERGE_SLOPE and ratio >= 1.0:
        v = "divergent"
    else:
        v = "inconclusive"
    return ConvergenceVerdict(v, float(slope), span, resid, ratio)


@dataclass
class RatioReport:
    pairs: list
    ratio_min: float
    ratio_max: float
    window: tuple
    window_ok: bool

    @property
    def drift(self) -> float:
        return self.ratio_max / self.ratio_min

    @classmethod
    def build(cls, depths, left, right, window=(1 / 50, 50)) -> "RatioReport":
        pairs = [(int(m), float(l), float(r), float(l / r)) for m, l, r in zip(depths, left, right)]
        ratios = [p[3] for p in pairs]
        lo, hi = min(ratios), max(ratios)
        ok = window[0] <= lo and hi <= window[1]
        return cls(pairs, lo, hi, tuple(window), bool(ok))

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "ratio_min": self.ratio_min,
                "ratio_max": self.ratio_max, "window": list(self.window),
                "window_ok": self.window_ok, "drift": self.drift}


# -- hypotheses -------------------------------------------------------------------

_MARGIN = 0.02


def _compare(value: float, bound: float, upper: bool) -> str:
    """'satisfied' if value < bound (upper) or > bound (lower), with a margin."""
    if not math.isfinite(value):
        return "unverified"
    d = (bound - value) if upper else (value - bound)
    if d > _MARGIN:
        return "satisfied"
    if d < -_MARGIN:
        return "violated"
    return "unverified"


def _combine(*states) -> str:
    if "violated" in states:
        return "violated"
    if all(s == "satisfied" for s in states):
        return "satisfied"
    return "unverified"


def weight_hypotheses(omega: RadialWeight, p: float, q: float) -> dict:
    """Doubling-exponent conditions on omega for the (p, q) mixed-norm characterisations.

    (a) 1/2 < p <= 1: beta < 2q - q/p.  (b) p > 1: beta < q and alpha > q - q/p.
    """
    rep = classify_weight(omega)
    in_r = rep.in_Dhat is True and rep.in_Dcheck is True
    out = {"alpha_hat": _num(rep.alpha_hat), "beta_hat": _num(rep.beta_hat),
           "in_R": None if rep.in_Dhat is None or rep.in_Dcheck is None else in_r}
    if p <= 0.5:
        out.update(condition="none", status="violated")
        return out
    r_state = "satisfied" if in_r else ("violated" if out["in_R"] is False else "unverified")
    if p <= 1:
        bound = 2 * q - q / p
        out.update(condition="(a)", beta_bound=bound,
                   status=_combine(r_state, _compare(rep.beta_hat, bound, True)))
    else:
        out.update(condition="(b)", beta_bound=q, alpha_bound=q - q / p,
                   status=_combine(r_state, _compare(rep.beta_hat, q, True),
                                   _compare(rep.alpha_hat, q - q / p, False)))
    return out


# -- suite results ------------------------------------------------------------------

@dataclass
class SuiteResult:
    suite: str
    instance: dict
    verdicts: dict
    hypotheses: dict = field(default_factory=dict)
    ratio: Optional[RatioReport] = None
    extra: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        got = {v.verdict for v in self.verdicts.values() if v.conclusive}
        return len(got) <= 1

    @property
    def status(self) -> str:
        if not self.agree:
            return "fail"
        if self.ratio is not None and not self.ratio.window_ok:
            return "fail"
        if any(not v.conclusive for v in self.verdicts.values()):
            return "inconclusive"
        return "pass"

    @property
    def key(self) -> str:
        canon = json.dumps({"suite": self.suite, "instance": self.instance}, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "key": self.key,
            "instance": self.instance,
            "hypotheses": self.hypotheses,
            "verdicts": {k: v.to_dict() for k, v in sorted(self.verdicts.items())},
            "agree": self.agree,
            "status": self.status,
            "ratio": None if self.ratio is None else self.ratio.to_dict(),
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _theta_cfg(theta: InnerFunction) -> dict:
    return theta.to_config()


def _omega_cfg(omega: Optional[RadialWeight]):
    return None if omega is None else omega.to_config()


def _sum_depth(theta: InnerFunction, requested: Optional[int]) -> int:
    if requested is not None:
        return requested
    # exact zeros are cheap deep into the disc; numeric ones stop at 2**-20
    return 26 if isinstance(theta, (AtomicSingular, FiniteBlaschke)) else 18


def _zeros_to_depth(theta: InnerFunction, a: complex, max_n: int):
    r_need = 1.0 - 2.0 ** -(max_n + 1)
    return frostman_zeros(theta, a, r_need)


def _profile(theta, a, max_n):
    return dyadic_counts(_zeros_to_depth(theta, a, max_n), max_n, a)


# -- suites -------------------------------------------------------------------------

def verify_theorem1b(theta: InnerFunction, p: float, q: float, omega: RadialWeight,
                     delta: float = 0.5, m_range=(8, 14), window=(1 / 50, 50),
                     nodes: int = 64) -> SuiteResult:
    """Norm versus disc-averaged dyadic sum, as a ratio report over m."""
    params = MixedNormParams(p, q, omega)
    lo, hi = m_range
    left = mixed_norm_truncated(DerivativeOf(theta), params, hi)
    right = dyadic_sum_theorem1b(theta, params, delta, hi, nodes)
    depths = list(range(lo, hi + 1))
    lps = left.partial_sums()
    rps = right.partial_sums()
    ratio = RatioReport.build(depths, [lps[m - 1] for m in depths], [rps[m] for m in depths], window)
    return SuiteResult(
        "theorem1b",
        {"theta": _theta_cfg(theta), "p": p, "q": q, "omega": _omega_cfg(omega),
         "delta": delta, "m_range": [lo, hi], "nodes": nodes},
        {"norm": classify(left), "disc_sum": classify(right)},
        weight_hypotheses(omega, p, q),
        ratio,
        {"norm_blocks": left.to_dict(), "sum_blocks": right.to_dict()},
    )


def verify_theorem1(theta: InnerFunction, p: float, q: float, omega: RadialWeight, a: complex,
                    m: int = 16, max_n: Optional[int] = None) -> SuiteResult:
    """Norm verdict versus the single-point dyadic sum at one Frostman parameter."""
    if q > p:
        raise ValueError("the single-point characterisation requires q <= p")
    params = MixedNormParams(p, q, omega)
    max_n = _sum_depth(theta, max_n)
    norm = mixed_norm_truncated(DerivativeOf(theta), params, m)
    s = single_point_sum(_profile(theta, a, max_n), params)
    return SuiteResult(
        "theorem1",
        {"theta": _theta_cfg(theta), "p": p, "q": q, "omega": _omega_cfg(omega),
         "a": [complex(a).real, complex(a).imag], "m": m, "max_n": max_n},
        {"norm": classify(norm), "sum": classify(s)},
        weight_hypotheses(omega, p, q),
        extra={"norm_blocks": norm.to_dict(), "sum_blocks": s.to_dict()},
    )


def verify_theorem3(theta: InnerFunction, p: float, omega: RadialWeight, a: complex,
                    C: float = 0.5, m: int = 16, max_n: Optional[int] = None) -> SuiteResult:
    """Bergman-norm, zero-sum and sublevel-set verdicts for the p = q case."""
    max_n = _sum_depth(theta, max_n)
    params = MixedNormParams(p, p, omega)
    norm = mixed_norm_truncated(DerivativeOf(theta), params, m)
    zsum = zero_sum_theorem3(_zeros_to_depth(theta, a, max_n), p, omega, depth=max_n + 1)
    level = level_set_integral(theta, C, p, omega, m)
    return SuiteResult(
        "theorem3",
        {"theta": _theta_cfg(theta), "p": p, "omega": _omega_cfg(omega),
         "a": [complex(a).real, complex(a).imag], "C": C, "m": m, "max_n": max_n},
        {"norm": classify(norm), "zero_sum": classify(zsum), "level_set": classify(level)},
        weight_hypotheses(omega, p, p),
        extra={"norm_blocks": norm.to_dict(), "zero_sum_blocks": zsum.to_dict(),
               "level_set_blocks": level.to_dict()},
    )


def verify_corollary_hp(theta: InnerFunction, p: float, a: complex, alpha_list=(0.0, 1.0),
                        C: float = 0.5, m: int = 16, max_n: Optional[int] = None) -> SuiteResult:
    """H^p membership of Theta' against Bergman norms, zero sums and sublevel sets."""
    if not 0.5 < p < 1:
        raise ValueError("the H^p chain needs 1/2 < p < 1")
    max_n = _sum_depth(theta, max_n)
    fp = DerivativeOf(theta)
    verdicts = {"hardy": classify(hardy_means(fp, p, m))}
    for al in alpha_list:
        P = p + al + 1
        tv = mixed_norm_truncated(fp, MixedNormParams(P, P, power_weight(al)), m)
        verdicts[f"bergman[alpha={al:g}]"] = classify(tv)
    zl = _zeros_to_depth(theta, a, max_n)
    verdicts["zero_sum"] = classify(zero_power_sum(zl, 1.0 - p, depth=max_n + 1))
    verdicts["level_set"] = classify(level_set_integral(theta, C, p, None, m))
    return SuiteResult(
        "corollary_hp",
        {"theta": _theta_cfg(theta), "p": p, "a": [complex(a).real, complex(a).imag],
         "alpha_list": list(alpha_list), "C": C, "m": m, "max_n": max_n},
        verdicts,
        {"status": "satisfied", "condition": "1/2 < p < 1"},
    )


def verify_besov(theta: InnerFunction, p: float, q: float, alpha: float, delta: float = 0.5,
                 m: int = 16, max_n: Optional[int] = None, nodes: int = 64) -> SuiteResult:
    """Besov norm of Theta against the disc-averaged dyadic sum."""
    lo, hi = max(0.0, 1.0 / p - 1.0), 1.0 / p
    if not lo < alpha < hi:
        raise ValueError(f"alpha must lie in ({lo:g}, {hi:g})")
    max_n = 24 if max_n is None else max_n
    norm = besov_norm_truncated(theta, p, q, alpha, m)
    avg, _ = disc_averages(theta, delta, q / p, max_n, nodes)
    n = np.arange(max_n + 1)
    s = TruncatedValue.from_blocks(np.ldexp(1.0, -n) ** (q / p - alpha * q) * avg, max_n + 1, "besov_sum")
    return SuiteResult(
        "besov",
        {"theta": _theta_cfg(theta), "p": p, "q": q, "alpha": alpha, "delta": delta,
         "m": m, "max_n": max_n, "nodes": nodes},
        {"norm": classify(norm), "sum": classify(s)},
        {"status": "satisfied", "condition": f"{lo:g} < alpha < {hi:g}"},
        extra={"norm_blocks": norm.to_dict(), "sum_blocks": s.to_dict()},
    )


def verify_remark1(theta: InnerFunction, p: float, m: int = 16) -> SuiteResult:
    """Theta'' in A^p_{p-1} against Theta' in H^p."""
    if p <= 0.5:
        raise ValueError("p must exceed 1/2")
    second = mixed_norm_truncated(DerivativeOf(theta, 2), MixedNormParams(p, p, power_weight(p - 1)), m)
    hardy = hardy_means(DerivativeOf(theta), p, m)
    return SuiteResult(
        "remark1",
        {"theta": _theta_cfg(theta), "p": p, "m": m},
        {"second_derivative": classify(second), "hardy": classify(hardy)},
        {"status": "satisfied", "condition": "p > 1/2"},
    )


def verify_shift(theta: InnerFunction, p: float, q: float, x: float, omega: RadialWeight,
                 m_range=(10, 16), max_drift: float = 1.25) -> SuiteResult:
    """||Theta'||^q in A^{p,q}_omega against ||Theta'||^{q+x} in A^{p+xp/q, q+x}_{omega_x}."""
    lo, hi = m_range
    fp = DerivativeOf(theta)
    left = mixed_norm_truncated(fp, MixedNormParams(p, q, omega), hi)
    right = mixed_norm_truncated(fp, MixedNormParams(p + x * p / q, q + x, shift_weight(omega, x)), hi)
    depths = list(range(lo, hi + 1))
    lps, rps = left.partial_sums(), right.partial_sums()
    ratio = RatioReport.build(depths, [lps[d - 1] for d in depths], [rps[d - 1] for d in depths])
    res = SuiteResult(
        "shift",
        {"theta": _theta_cfg(theta), "p": p, "q": q, "x": x, "omega": _omega_cfg(omega),
         "m_range": [lo, hi], "max_drift": max_drift},
        {"left": classify(left), "right": classify(right)},
        weight_hypotheses(omega, p, q),
        ratio,
    )
    res.extra["drift_ok"] = bool(ratio.drift <= max_drift)
    return res


SUITES = {
    "theorem1b": verify_theorem1b,
    "theorem1": verify_theorem1,
    "theorem3": verify_theorem3,
    "corollary-hp": verify_corollary_hp,
    "besov": verify_besov,
    "remark1": verify_remark1,
    "shift": verify_shift,
}
