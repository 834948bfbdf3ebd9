"""Inner functions: Blaschke products, the atomic singular function, Frostman shifts.

Every inner function is vectorised over ``z`` through ``value``,
``derivative`` and ``second_derivative``; the scalar ``eval`` /
``eval_derivative`` return an :class:`EvalResult` with a certified error
bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

EPS = np.finfo(float).eps
R_LIMIT = 1.0 - 2.0**-40
MAX_TERMS = 10_000_000


class CertificationError(RuntimeError):
    """The requested tolerance cannot be certified."""


@dataclass(frozen=True)
class EvalResult:
    value: complex
    error_bound: float
    terms_used: int = 0


# -- zero sequences ----------------------------------------------------------

@dataclass(frozen=True)
class ZeroSequence:
    """A zero sequence ordered by increasing modulus.

    Either ``zeros`` (explicit, finite) or ``generator`` (``N -> first N
    zeros``) is set.  ``tail`` bounds sum_{n>N} (1 - |z_n|) in closed form.
    """

    zeros: Optional[np.ndarray] = None
    generator: Optional[Callable[[int], np.ndarray]] = None
    tail: Optional[Callable[[int], float]] = None
    name: str = "explicit"
    params: tuple = ()

    def __post_init__(self):
        if self.zeros is not None:
            z = np.asarray(self.zeros, dtype=complex).ravel()
            if np.any(np.abs(z) >= 1):
                raise ValueError("zeros must lie in the open unit disc")
            object.__setattr__(self, "zeros", sort_zeros(z))

    @property
    def count(self) -> Optional[int]:
        return None if self.zeros is None else len(self.zeros)

    def take(self, n: int) -> np.ndarray:
        if self.zeros is not None:
            return self.zeros[:n]
        return np.asarray(self.generator(n), dtype=complex)

    def blaschke_sum(self, n: int) -> float:
        return float(np.sum(1.0 - np.abs(self.take(n))))

    def tail_bound(self, n: int) -> Optional[float]:
        if self.zeros is not None:
            return float(np.sum(1.0 - np.abs(self.zeros[n:])))
        return None if self.tail is None else float(self.tail(n))


def sort_zeros(z: np.ndarray) -> np.ndarray:
    """Increasing modulus, ties broken by argument."""
    z = np.asarray(z, dtype=complex)
    order = np.lexsort((np.angle(z), np.abs(z)))
    return z[order]


def exponential_zeros() -> ZeroSequence:
    """z_n = 1 - 2**-n, n >= 1."""
    return ZeroSequence(
        generator=lambda n: 1.0 - np.exp2(-np.arange(1, n + 1, dtype=float)) + 0j,
        tail=lambda n: 2.0**-n,
        name="exponential",
    )


def polynomial_decay_zeros(c: float = 1.0) -> ZeroSequence:
    """z_n = 1 - c / (n + 1)**2, n >= 1 (requires 0 < c < 4)."""
    if not 0 < c < 4:
        raise ValueError("polynomial_decay requires 0 < c < 4")
    return ZeroSequence(
        generator=lambda n: 1.0 - c / (np.arange(1, n + 1, dtype=float) + 1.0) ** 2 + 0j,
        tail=lambda n: c / (n + 1.0),
        name="polynomial_decay",
        params=(("c", float(c)),),
    )


# -- inner functions ---------------------------------------------------------

def _check_disc(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > R_LIMIT):
        raise ValueError("evaluation refused for |z| > 1 - 2**-40")
    return z


class InnerFunction:
    """Common interface; subclasses implement the vectorised evaluators."""

    def value(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def second_derivative(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.value(z)

    def _rounding_bound(self, z, v) -> float:
        return 16 * EPS * (1.0 + abs(v))

    def eval(self, z: complex, tol: float = 1e-12) -> EvalResult:
        z = complex(_check_disc(z))
        v = complex(self.value(z))
        err = self._rounding_bound(z, v)
        if err > tol:
            raise CertificationError(f"cannot certify tolerance {tol:g} at z={z} (bound {err:g})")
        return EvalResult(v, err, 0)

    def eval_derivative(self, z: complex, tol: float = 1e-12) -> EvalResult:
        z = complex(_check_disc(z))
        v = complex(self.derivative(z))
        err = self._rounding_bound(z, v) / (1.0 - abs(z))
        if err > tol:
            raise CertificationError(f"cannot certify tolerance {tol:g} at z={z} (bound {err:g})")
        return EvalResult(v, err, 0)

    def to_config(self) -> dict:
        raise NotImplementedError


def _factor_units(zeros: np.ndarray) -> np.ndarray:
    a = np.abs(zeros)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(a > 0, a / np.where(a > 0, zeros, 1.0), -1.0 + 0j)
    return u


def _blaschke_jets(zeros, z, order: int):
    """(B, B', B'') of the finite product by forward Leibniz accumulation."""
    z = np.asarray(z, dtype=complex)
    p0 = np.ones_like(z)
    p1 = np.zeros_like(z)
    p2 = np.zeros_like(z)
    units = _factor_units(zeros)
    for zk, uk in zip(zeros, units):
        czk = np.conj(zk)
        den = 1.0 - czk * z
        b0 = uk * (zk - z) / den
        if order == 0:
            p0 = p0 * b0
            continue
        b1 = uk * (abs(zk) ** 2 - 1.0) / den**2
        if order >= 2:
            b2 = 2.0 * czk * b1 / den
            p2 = p2 * b0 + 2.0 * p1 * b1 + p0 * b2
        p1 = p1 * b0 + p0 * b1
        p0 = p0 * b0
    return p0, p1, p2


@dataclass(frozen=True, eq=False)
class FiniteBlaschke(InnerFunction):
    """e^{i lam} prod (|z_n|/z_n)(z_n - z)/(1 - conj(z_n) z)."""

    zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    lam: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=complex).ravel()
        if np.any(np.abs(z) >= 1):
            raise ValueError("zeros must lie in the open unit disc")
        object.__setattr__(self, "zeros", sort_zeros(z))

    @property
    def rotation(self) -> complex:
        return np.exp(1j * self.lam)

    def value(self, z):
        return self.rotation * _blaschke_jets(self.zeros, z, 0)[0]

    def derivative(self, z):
        return self.rotation * _blaschke_jets(self.zeros, z, 1)[1]

    def second_derivative(self, z):
        return self.rotation * _blaschke_jets(self.zeros, z, 2)[2]

    def _rounding_bound(self, z, v):
        return 16 * EPS * (len(self.zeros) + 1)

    def to_config(self) -> dict:
        return {"kind": "blaschke", "zeros": [[float(w.real), float(w.imag)] for w in self.zeros],
                "lambda": self.lam}


@dataclass(frozen=True, eq=False)
class InfiniteBlaschke(InnerFunction):
    """Blaschke product over an infinite zero sequence, truncated with a certified tail.

    Omitting the factors beyond N changes the value by a relative amount of
    at most exp(2 T(N) / (1 - |z|)) - 1, T(N) = sum_{n>N} (1 - |z_n|).
    """

    sequence: ZeroSequence = None
    lam: float = 0.0
    tol: float = 1e-10
    max_terms: int = MAX_TERMS

    @property
    def rotation(self) -> complex:
        return np.exp(1j * self.lam)

    def _relative_tail(self, n: int, rho: float, scale: float = 2.0) -> float:
        t = self.sequence.tail_bound(n)
        if t is None:
            raise CertificationError(
                f"cannot certify tolerance: zero sequence {self.sequence.name!r} has no tail bound")
        return float(np.expm1(scale * t / (1.0 - rho)))

    def terms_for(self, rho: float, tol: float, scale: float = 2.0) -> int:
        """Smallest N (up to doubling/bisection) with certified tail <= tol at |z| = rho."""
        count = self.sequence.count
        if count is not None:
            return count
        n = 16
        while self._relative_tail(n, rho, scale) > tol:
            n *= 2
            if n > self.max_terms:
                raise CertificationError(
                    f"cannot certify tolerance {tol:g} at |z|={rho:.6g} within {self.max_terms} terms")
        lo, hi = n // 2, n
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._relative_tail(mid, rho, scale) > tol:
                lo = mid
            else:
                hi = mid
        return hi

    def _zeros_for(self, z, tol, scale=2.0):
        rho = float(np.max(np.abs(z))) if np.size(z) else 0.0
        return self.sequence.take(self.terms_for(rho, tol, scale))

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return self.rotation * _blaschke_jets(self._zeros_for(z, self.tol), z, 0)[0]

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.rotation * _blaschke_jets(self._zeros_for(z, self.tol, 4.0), z, 1)[1]

    def second_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.rotation * _blaschke_jets(self._zeros_for(z, self.tol, 8.0), z, 2)[2]

    def eval(self, z: complex, tol: float = 1e-10) -> EvalResult:
        z = complex(_check_disc(z))
        n = self.terms_for(abs(z), tol / 2)
        zs = self.sequence.take(n)
        v = complex(self.rotation * _blaschke_jets(zs, z, 0)[0])
        err = self._relative_tail(n, abs(z)) + 16 * EPS * (n + 1)
        if err > tol:
            raise CertificationError(f"cannot certify tolerance {tol:g} at z={z}")
        return EvalResult(v, err, n)

    def eval_derivative(self, z: complex, tol: float = 1e-10) -> EvalResult:
        # B = B_N R_N;  |R_N - 1| <= e1 and, by Cauchy on a disc of radius (1-|z|)/2,
        # |R_N'| <= 2 e2 / (1 - |z|) with e2 the relative tail at distance (1-|z|)/2.
        z = complex(_check_disc(z))
        rho = abs(z)
        d = 1.0 - rho

        def bound(n):
            e1 = self._relative_tail(n, rho)
            e2 = self._relative_tail(n, rho, scale=4.0)
            return e1 / (1.0 - rho * rho) + 2.0 * e2 / d

        count = self.sequence.count
        n = count if count is not None else 16
        while count is None and bound(n) > tol / 2:
            n *= 2
            if n > self.max_terms:
                raise CertificationError(f"cannot certify derivative tolerance {tol:g} at z={z}")
        zs = self.sequence.take(n)
        v = complex(self.rotation * _blaschke_jets(zs, z, 1)[1])
        err = (bound(n) if count is None else 0.0) + 16 * EPS * (n + 1) / d
        if err > tol:
            raise CertificationError(f"cannot certify derivative tolerance {tol:g} at z={z}")
        return EvalResult(v, err, n)

    def to_config(self) -> dict:
        cfg = {"kind": "blaschke", "generator": self.sequence.name, "lambda": self.lam}
        cfg.update(dict(self.sequence.params))
        return cfg


@dataclass(frozen=True, eq=False)
class AtomicSingular(InnerFunction):
    """exp(-m (1 + z) / (2 (1 - z))); mass m = 2 gives exp((z + 1)/(z - 1))."""

    mass: float = 2.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    def _exponent(self, z):
        return -0.5 * self.mass * (1.0 + z) / (1.0 - z)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(self._exponent(z))

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(self._exponent(z)) * (-self.mass) / (1.0 - z) ** 2

    def second_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        g1 = -self.mass / (1.0 - z) ** 2
        g2 = -2.0 * self.mass / (1.0 - z) ** 3
        return np.exp(self._exponent(z)) * (g1 * g1 + g2)

    def _rounding_bound(self, z, v):
        return 8 * EPS * (1.0 + abs(self._exponent(z))) * abs(v) + 8 * EPS * abs(v)

    def to_config(self) -> dict:
        return {"kind": "atomic", "mass": self.mass}


@dataclass(frozen=True, eq=False)
class Frostman(InnerFunction):
    """Theta_a = (Theta - a) / (1 - conj(a) Theta)."""

    base: InnerFunction = None
    a: complex = 0j

    def __post_init__(self):
        if abs(self.a) >= 1:
            raise ValueError("Frostman parameter must satisfy |a| < 1")
        object.__setattr__(self, "a", complex(self.a))

    def value(self, z):
        t = self.base.value(z)
        return (t - self.a) / (1.0 - np.conj(self.a) * t)

    def derivative(self, z):
        t = self.base.value(z)
        dt = self.base.derivative(z)
        return dt * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * t) ** 2

    def second_derivative(self, z):
        t = self.base.value(z)
        dt = self.base.derivative(z)
        d2t = self.base.second_derivative(z)
        ca = np.conj(self.a)
        den = 1.0 - ca * t
        k = 1.0 - abs(self.a) ** 2
        return k * (d2t / den**2 + 2.0 * ca * dt * dt / den**3)

    def log_derivative(self, z):
        """Theta_a' / Theta_a, used by the argument principle."""
        t = self.base.value(z)
        dt = self.base.derivative(z)
        return dt * (1.0 - abs(self.a) ** 2) / ((1.0 - np.conj(self.a) * t) * (t - self.a))

    def _mobius_error(self, t: complex, e: float) -> float:
        s = abs(self.a)
        den = max(1.0 - s * (abs(t) + e), 1e-300)
        return e * (1.0 - s * s) / den**2

    def eval(self, z: complex, tol: float = 1e-12) -> EvalResult:
        z = complex(_check_disc(z))
        s = abs(self.a)
        inner = self.base.eval(z, tol * (1.0 - s) ** 2 / 3.0)
        t = inner.value
        v = (t - self.a) / (1.0 - np.conj(self.a) * t)
        err = self._mobius_error(t, inner.error_bound) + 8 * EPS
        if err > tol:
            raise CertificationError(f"cannot certify tolerance {tol:g} at z={z}")
        return EvalResult(complex(v), err, inner.terms_used)

    def eval_derivative(self, z: complex, tol: float = 1e-12) -> EvalResult:
        z = complex(_check_disc(z))
        s = abs(self.a)
        sub_tol = tol * (1.0 - s) ** 4 / 8.0
        t = self.base.eval(z, sub_tol)
        dt = self.base.eval_derivative(z, sub_tol)
        ca = np.conj(self.a)
        den = 1.0 - ca * t.value
        v = dt.value * (1.0 - s * s) / den**2
        # perturbation of dt by e_d and of t by e_t
        dmin = max(abs(den) - s * t.error_bound, 1e-300)
        err = ((1.0 - s * s) * dt.error_bound / dmin**2
               + (abs(dt.value) + dt.error_bound) * (1.0 - s * s) * 2.0 * s * t.error_bound / dmin**3
               + 16 * EPS * abs(v))
        if err > tol:
            raise CertificationError(f"cannot certify derivative tolerance {tol:g} at z={z}")
        return EvalResult(complex(v), err, max(t.terms_used, dt.terms_used))

    def to_config(self) -> dict:
        return {"kind": "frostman", "base": self.base.to_config(), "a": [self.a.real, self.a.imag]}


def frostman_shift(theta: InnerFunction, a: complex) -> Frostman:
    """The Frostman shift Theta_a of ``theta``."""
    if abs(a) >= 1:
        raise ValueError("Frostman parameter must satisfy |a| < 1")
    return Frostman(theta, complex(a))


def singular_inner() -> AtomicSingular:
    """S(z) = exp((z + 1)/(z - 1))."""
    return AtomicSingular(2.0)


# -- hyperbolic geometry and diagnostics -------------------------------------

def pseudo_hyperbolic(z, w):
    """|z - w| / |1 - conj(w) z|."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)


def automorphism_identity_residual(z, a):
    """Relative residual of |(1 - conj(a) z)/(z - a)|^2 = (1-|z|^2)(1-|a|^2)/|z-a|^2 + 1.

    Points with z == a are assigned residual 0 (identity undefined there).
    """
    z = np.asarray(z, dtype=complex)
    a = np.asarray(a, dtype=complex)
    d2 = np.abs(z - a) ** 2
    same = d2 == 0
    d2 = np.where(same, 1.0, d2)
    lhs = np.abs(1.0 - np.conj(a) * z) ** 2 / d2
    rhs = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(a) ** 2) / d2 + 1.0
    return np.where(same, 0.0, np.abs(lhs - rhs) / rhs)


def frostman_derivative_residual(theta: InnerFunction, a: complex, z):
    """Relative residual of |Theta_a'| |1 - conj(a) Theta|^2 = |Theta'| (1 - |a|^2)."""
    fa = frostman_shift(theta, a)
    t = theta.value(z)
    lhs = np.abs(fa.derivative(z)) * np.abs(1.0 - np.conj(a) * t) ** 2
    rhs = np.abs(theta.derivative(z)) * (1.0 - abs(a) ** 2)
    return np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)


@dataclass(frozen=True)
class SeparationReport:
    separated_delta: float
    uniformly_separated_inf: float
    depth: int


def separation_report(seq, depth: int) -> SeparationReport:
    """Separation diagnostics over the first ``depth`` zeros (upper bounds for the infima)."""
    if depth < 2:
        raise ValueError("separation_report needs depth >= 2")
    z = seq.take(depth) if isinstance(seq, ZeroSequence) else sort_zeros(np.asarray(seq, dtype=complex))[:depth]
    rho = pseudo_hyperbolic(z[:, None], z[None, :])
    np.fill_diagonal(rho, np.inf)
    delta = float(np.min(rho))
    np.fill_diagonal(rho, 1.0)
    with np.errstate(divide="ignore"):
        logprod = np.sum(np.log(rho), axis=1)
    return SeparationReport(delta, float(np.exp(np.min(logprod))), len(z))


def random_disc_points(n: int, seed: int, r_max: float = 1.0) -> np.ndarray:
    """Uniform samples from the disc |z| < r_max."""
    rng = np.random.default_rng(seed)
    rad = r_max * np.sqrt(rng.random(n))
    ang = 2 * np.pi * rng.random(n)
    return rad * np.exp(1j * ang)


def schwarz_pick_check(theta: InnerFunction, samples: int, seed: int) -> float:
    """max over random z of |Theta'(z)|(1 - |z|^2) - (1 - |Theta(z)|^2)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    z = random_disc_points(samples, seed)
    lhs = np.abs(theta.derivative(z)) * (1.0 - np.abs(z) ** 2)
    rhs = 1.0 - np.abs(theta.value(z)) ** 2
    return float(np.max(lhs - rhs))
