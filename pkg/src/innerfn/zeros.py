"""Zero sequences of Frostman shifts and their dyadic profiles.

Annuli are indexed by n with r_n = 1 - 2**-n and binned half-open,
r_n <= |z| < r_{n+1}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from ._numerics import dyadic_radius, ordered_map
from .inner import (
    AtomicSingular,
    FiniteBlaschke,
    Frostman,
    InnerFunction,
    ZeroSequence,
    frostman_shift,
    sort_zeros,
)


class ZeroFindingError(RuntimeError):
    """Argument-principle or Newton failure, naming the offending cell."""


class IncompleteZerosError(ValueError):
    """A zero list does not cover the requested annuli."""


@dataclass
class ZeroList:
    """Zeros sorted by modulus, with accurate gaps 1 - |z| and completeness radius.

    ``complete_below`` is the radius below which every zero is listed
    (1.0 for a finite, complete list).
    """

    zeros: np.ndarray
    gaps: np.ndarray
    complete_below: float = 1.0
    a: Optional[complex] = None
    index: Optional[np.ndarray] = None
    certificate: Optional["ZeroCertificate"] = None

    def __len__(self):
        return len(self.zeros)

    @classmethod
    def from_array(cls, zeros, complete_below: float = 1.0, a=None) -> "ZeroList":
        z = sort_zeros(np.asarray(zeros, dtype=complex).ravel())
        return cls(z, 1.0 - np.abs(z), complete_below, a)


def _as_zero_list(zeros) -> ZeroList:
    return zeros if isinstance(zeros, ZeroList) else ZeroList.from_array(zeros)


# -- exact zeros of S_a --------------------------------------------------------

def _atomic_parts(a: complex, k, mass: float = 2.0):
    a = complex(a)
    if a == 0:
        raise ValueError("Frostman parameter in exceptional set of S (a = 0)")
    if abs(a) >= 1:
        raise ValueError("Frostman parameter must satisfy |a| < 1")
    k = np.asarray(k, dtype=float)
    c = np.log(abs(a)) + 1j * (2 * np.pi * k + np.angle(a))
    d = 2.0 * c / mass
    z = 1.0 + 2.0 / (d - 1.0)
    one_minus_sq = -4.0 * d.real / np.abs(d - 1.0) ** 2
    return z, one_minus_sq, c


def atomic_frostman_zeros(a: complex, N: int, mass: float = 2.0) -> ZeroList:
    """Exact zeros z_n(a) = (c_n + 1)/(c_n - 1), c_n = log|a| + i(2 pi n + arg a), |n| <= N.

    Returned sorted by modulus; ``index`` holds the n of each zero and
    ``complete_below`` the modulus below which no zero with |n| > N exists.
    """
    n = np.arange(-N, N + 1)
    z, oms, _ = _atomic_parts(a, n, mass)
    gaps = oms / (1.0 + np.abs(z))
    order = np.lexsort((np.angle(z), -gaps))
    _, oms_out, _ = _atomic_parts(a, np.array([N + 1, -N - 1]), mass)
    gap_out = float(np.max(oms_out / 2.0))  # 1 - |z| >= (1 - |z|^2)/2
    return ZeroList(z[order], gaps[order], 1.0 - gap_out, complex(a), n[order])


def atomic_one_minus_modulus_sq(a: complex, n, mass: float = 2.0) -> np.ndarray:
    """1 - |z_n(a)|^2 = -4 log|a| / |c_n - 1|^2."""
    return _atomic_parts(a, n, mass)[1]


def atomic_zero_sequence(a: complex, mass: float = 2.0) -> ZeroSequence:
    """The zeros of S_a as a modulus-ordered generator with a closed-form tail bound."""
    lam = -2.0 * np.log(abs(a)) / mass
    theta = np.angle(a)

    def gen(count):
        half = count // 2 + 1
        k = np.arange(-half, half + 1)
        order = np.argsort(np.abs(2 * np.pi * k + theta), kind="stable")
        z, _, _ = _atomic_parts(a, k[order][:count], mass)
        return z

    def tail(count):
        # the first `count` zeros contain all |k| <= (count-1)//2; beyond that
        # 1 - |z|^2 <= 4 lam / (2 pi |k| - pi)^2
        m = max((count - 1) // 2, 1)
        return 4.0 * lam / (np.pi**2 * (2 * m - 1))

    return ZeroSequence(generator=gen, tail=tail, name="atomic_frostman",
                        params=(("a", [complex(a).real, complex(a).imag]), ("mass", mass)))


def atomic_count_below(a, R, mass: float = 2.0):
    """#{k : |z_k(a)| < R} in closed form (vectorised over a)."""
    a = np.asarray(a, dtype=complex)
    lam = -np.log(np.abs(a)) * 2.0 / mass
    theta = np.angle(a)
    # |d_k - 1|^2 = (lam + 1)^2 + (2/m)^2 (2 pi k + theta)^2 < 4 lam / (1 - R^2)
    s = 2.0 / mass
    y2 = 4.0 * lam / (1.0 - R * R) - (lam + 1.0) ** 2
    y = np.sqrt(np.maximum(y2, 0.0)) / s
    hi = (y - theta) / (2 * np.pi)
    lo = (-y - theta) / (2 * np.pi)
    cnt = np.ceil(hi) - np.floor(lo) - 1.0
    return np.where(y2 > 0, np.maximum(cnt, 0.0), 0.0)


# -- numeric zeros via the argument principle ----------------------------------

@dataclass
class ZeroCertificate:
    cells: list
    total_winding: int
    refined: int
    r_max: float
    tiling: tuple

    @property
    def conserved(self) -> bool:
        return self.total_winding == self.refined


@dataclass(frozen=True)
class _Cell:
    r0: float
    r1: float
    t0: float
    t1: float
    disc: bool = False
    tag: tuple = ()

    @property
    def center(self) -> complex:
        if self.disc:
            return 0j
        rm = 0.5 * (self.r0 + self.r1)
        return rm * np.exp(0.5j * (self.t0 + self.t1))

    @property
    def scale(self) -> float:
        if self.disc:
            return self.r1
        rm = 0.5 * (self.r0 + self.r1)
        return max(self.r1 - self.r0, rm * (self.t1 - self.t0))

    def contains(self, z: complex, slack: float = 1e-9) -> bool:
        r = abs(z)
        if self.disc:
            return r <= self.r1 * (1 + slack)
        if r < self.r0 * (1 - slack) or r > self.r1 * (1 + slack):
            return False
        t = (np.angle(z) - self.t0) % (2 * np.pi)
        return t <= (self.t1 - self.t0) + slack * 2 * np.pi

    def split(self) -> list:
        if self.disc:
            inner = _Cell(0.0, 0.5 * self.r1, 0.0, 2 * np.pi, True, self.tag + ("c",))
            ring = [_Cell(0.5 * self.r1, self.r1, self.t0 + 2 * np.pi * j / 8,
                          self.t0 + 2 * np.pi * (j + 1) / 8, False, self.tag + (j,)) for j in range(8)]
            return [inner] + ring
        rm = 0.5 * (self.r0 + self.r1)
        tm = 0.5 * (self.t0 + self.t1)
        return [_Cell(r0, r1, t0, t1, False, self.tag + (i,))
                for i, (r0, r1, t0, t1) in enumerate([
                    (self.r0, rm, self.t0, tm), (self.r0, rm, tm, self.t1),
                    (rm, self.r1, self.t0, tm), (rm, self.r1, tm, self.t1)])]


_GL16 = np.polynomial.legendre.leggauss(16)


def _edge_rule(panels: int):
    # composite 16-point Gauss-Legendre on [0, 1]
    x, w = _GL16
    edges = np.linspace(0.0, 1.0, panels + 1)
    s = (edges[:-1, None] + 0.5 * (x[None, :] + 1.0) / panels).ravel()
    ws = np.tile(0.5 * w / panels, panels)
    return s, ws


def _cell_contour(cell: _Cell, panels: int):
    s, ws = _edge_rule(panels)
    if cell.disc:
        ang = cell.t0 + 2 * np.pi * s
        z = cell.r1 * np.exp(1j * ang)
        dz = 1j * z * 2 * np.pi * ws
        return z, dz
    zs, dzs = [], []
    dt = cell.t1 - cell.t0
    # outer arc, counter-clockwise
    ang = cell.t0 + dt * s
    z = cell.r1 * np.exp(1j * ang)
    zs.append(z); dzs.append(1j * z * dt * ws)
    # radial segment inward at t1
    e1 = np.exp(1j * cell.t1)
    r = cell.r1 + (cell.r0 - cell.r1) * s
    zs.append(r * e1); dzs.append(e1 * (cell.r0 - cell.r1) * ws)
    if cell.r0 > 0:
        # inner arc, clockwise
        ang = cell.t1 - dt * s
        z = cell.r0 * np.exp(1j * ang)
        zs.append(z); dzs.append(-1j * z * dt * ws)
    # radial segment outward at t0
    e0 = np.exp(1j * cell.t0)
    r = cell.r0 + (cell.r1 - cell.r0) * s
    zs.append(r * e0); dzs.append(e0 * (cell.r1 - cell.r0) * ws)
    return np.concatenate(zs), np.concatenate(dzs)


def _contour_moments(cells, logder, panels, max_moment=0):
    """(1/2 pi i) contour integrals of w^j f dz, w = (z - c)/s, for each cell."""
    zs, dzs, owner = [], [], []
    for i, c in enumerate(cells):
        z, dz = _cell_contour(c, panels)
        zs.append(z); dzs.append(dz); owner.append(np.full(z.size, i))
    z = np.concatenate(zs); dz = np.concatenate(dzs); owner = np.concatenate(owner)
    with np.errstate(all="ignore"):
        f = logder(z) * dz
    out = np.zeros((len(cells), max_moment + 1), dtype=complex)
    centers = np.array([c.center for c in cells])[owner]
    scales = np.array([c.scale for c in cells])[owner]
    w = (z - centers) / scales
    term = f.copy()
    for j in range(max_moment + 1):
        re = np.bincount(owner, weights=term.real, minlength=len(cells))
        im = np.bincount(owner, weights=term.imag, minlength=len(cells))
        out[:, j] = (re + 1j * im) / (2j * np.pi)
        term = term * w
    return out


def _initial_cells(r_max: float, sigma: float, phase: float):
    # radii rho_n = 1 - sigma 2**-n, chosen so that rho_L > r_max
    radii = [0.0]
    n = 1
    while True:
        rho = 1.0 - sigma * 2.0**-n
        radii.append(rho)
        if rho > r_max:
            break
        n += 1
    cells = []
    for lvl in range(len(radii) - 1):
        r0, r1 = radii[lvl], radii[lvl + 1]
        if lvl == 0:
            cells.extend(_Cell(0.0, r1, phase, phase + 2 * np.pi, True, (0,)).split())
            continue
        k = 2 ** (int(np.ceil(lvl / 2)) + 3)
        off = phase * 2 * np.pi / k
        for j in range(k):
            cells.append(_Cell(r0, r1, off + 2 * np.pi * j / k, off + 2 * np.pi * (j + 1) / k,
                               False, (lvl, j)))
    return cells


_TILINGS = ((2.0**0.0317, 0.2887), (2.0**-0.0423, 0.6180), (2.0**0.0711, 0.4142), (2.0**-0.0917, 0.1716))


def _windings(cells, logder, min_panels=4, max_panels=256):
    """Winding numbers with panel doubling; returns (ints, panels used, inconclusive cells)."""
    n = len(cells)
    result = np.zeros(n, dtype=int)
    used = np.zeros(n, dtype=int)
    pending = np.arange(n)
    prev = np.full(n, np.nan + 0j)
    panels = min_panels
    bad = []
    while pending.size:
        vals = _contour_moments([cells[i] for i in pending], logder, panels)[:, 0]
        done = []
        for j, idx in enumerate(pending):
            v = vals[j]
            rounded = np.round(v.real)
            ok = np.isfinite(v) and abs(v - rounded) < 0.05 and np.isfinite(prev[idx]) \
                and np.round(prev[idx].real) == rounded
            if ok:
                result[idx] = int(rounded); used[idx] = panels; done.append(j)
            elif panels >= max_panels:
                if np.isfinite(v) and abs(v - rounded) < 0.2:
                    result[idx] = int(rounded); used[idx] = panels
                else:
                    bad.append(idx)
                done.append(j)
            prev[idx] = v
        pending = np.delete(pending, done)
        panels *= 2
    return result, used, bad


def _newton(fa: Frostman, z: complex, tol: float, maxit: int = 60) -> tuple[complex, float]:
    """Newton on Theta_a; returns (z, residual / attainable target)."""
    v = d = 0j
    for _ in range(maxit):
        v = complex(fa.value(z))
        d = complex(fa.derivative(z))
        # rounding floor: a double-precision z moves Theta_a by about eps |z Theta_a'|
        target = max(tol, 16 * np.finfo(float).eps * (1.0 + abs(z * d)))
        if abs(v) <= target:
            return z, abs(v) / target
        if d == 0 or not np.isfinite(d):
            break
        z = z - v / d
        if abs(z) >= 1:
            return z, np.inf
    return z, np.inf


def _roots_from_moments(s, k):
    # Newton identities: power sums -> elementary symmetric -> monic polynomial
    e = [1.0 + 0j]
    for j in range(1, k + 1):
        acc = 0j
        for i in range(1, j + 1):
            acc += (-1) ** (i - 1) * e[j - i] * s[i]
        e.append(acc / j)
    coeffs = [(-1) ** j * e[j] for j in range(k + 1)]
    return np.roots(coeffs)


def _extract(cells, windings, panels, fa, tol, depth=0):
    zeros, records = [], []
    multi = [(c, w, p) for c, w, p in zip(cells, windings, panels) if w > 0]
    for c, w, p in multi:
        if w < 0:
            raise ZeroFindingError(f"negative winding {w} in cell {c.tag}")
        roots = None
        if w <= 3:
            mom = _contour_moments([c], fa.log_derivative, max(p, 8), max_moment=w)[0]
            cand = c.center + c.scale * _roots_from_moments(mom, w)
            polished = [_newton(fa, complex(z0), tol) for z0 in cand]
            if all(res <= 1.0 and c.contains(z) for z, res in polished):
                roots = [z for z, _ in polished]
        if roots is None:
            if depth > 12:
                raise ZeroFindingError(f"Newton refinement failed in cell {c.tag}")
            kids = c.split()
            kw, kp, bad = _windings(kids, fa.log_derivative)
            if bad:
                raise ZeroFindingError(f"cell inconclusive: {kids[bad[0]].tag}")
            if int(np.sum(kw)) != w:
                raise ZeroFindingError(f"winding not conserved when splitting cell {c.tag}")
            sub, subrec = _extract(kids, kw, kp, fa, tol, depth + 1)
            zeros.extend(sub); records.extend(subrec)
        else:
            zeros.extend(roots); records.append((c.tag, w))
    return zeros, records


def find_zeros_numeric(theta: InnerFunction, a: complex, r_max: float, tol: float = 1e-13) -> ZeroList:
    """All solutions of Theta(z) = a with |z| <= r_max, with a completeness certificate.

    The disc is tiled by dyadic annulus-sector cells (2**(ceil(n/2)+3) sectors
    at level n); each cell's zero count is the winding of Theta_a along its
    boundary, and zeros are located from contour moments and polished by
    Newton's method.  If a cell is inconclusive the tiling is shifted and
    the count retried.
    """
    if not 0 < r_max < 1:
        raise ValueError("r_max must lie in (0, 1)")
    if r_max > 1 - 2.0**-20:
        raise ValueError("zero finding is limited to r_max <= 1 - 2**-20")
    fa = frostman_shift(theta, a)
    last = None
    for sigma, phase in _TILINGS:
        cells = _initial_cells(r_max, sigma, phase)
        w, used, bad = _windings(cells, fa.log_derivative)
        if bad:
            last = cells[bad[0]].tag
            continue
        zs, records = _extract(cells, w, used, fa, tol)
        total = int(np.sum(w))
        if len(zs) != total:
            raise ZeroFindingError(f"winding total {total} but {len(zs)} refined zeros")
        z = sort_zeros(np.array(zs, dtype=complex))
        keep = np.abs(z) <= r_max
        cert = ZeroCertificate(records, total, len(zs), r_max, (sigma, phase))
        return ZeroList(z[keep], 1.0 - np.abs(z[keep]), r_max, complex(a), certificate=cert)
    raise ZeroFindingError(f"cell inconclusive: {last}")


def blaschke_frostman_zeros(B: FiniteBlaschke, a: complex, tol: float = 1e-13) -> ZeroList:
    """Zeros of B_a for a finite Blaschke product: roots of c prod(z_k - z) - a prod(1 - conj(z_k) z).

    The polynomial roots are polished by Newton's method on B_a.
    """
    from numpy.polynomial import polynomial as P

    from .inner import _factor_units

    zk = B.zeros
    if len(zk) == 0:
        return ZeroList(np.zeros(0, complex), np.zeros(0), 1.0, complex(a))
    c = B.rotation * np.prod(_factor_units(zk))
    p1 = (-1) ** len(zk) * P.polyfromroots(zk)
    p2 = np.array([1.0 + 0j])
    for w in zk:
        p2 = P.polymul(p2, [1.0, -np.conj(w)])
    roots = P.polyroots(c * p1 - a * p2)
    fa = frostman_shift(B, a)
    polished = np.array([_newton(fa, complex(z0), tol)[0] for z0 in roots])
    z = sort_zeros(polished)
    return ZeroList(z, 1.0 - np.abs(z), 1.0, complex(a))


# -- dyadic profiles -----------------------------------------------------------

@dataclass
class DyadicProfile:
    counts: dict
    max_n: int
    a: Optional[complex] = None

    def array(self) -> np.ndarray:
        return np.array([self.counts.get(n, 0) for n in range(self.max_n + 1)], dtype=float)

    def to_json(self) -> str:
        return json.dumps({str(n): int(c) for n, c in sorted(self.counts.items())})


def annulus_index(gaps) -> np.ndarray:
    """n such that r_n <= |z| < r_{n+1}, computed from 1 - |z|."""
    g = np.asarray(gaps, dtype=float)
    m, e = np.frexp(g)  # g = m 2**e, 0.5 <= m < 1
    # 2**-(n+1) < g <= 2**-n  <=>  n = -e when m > 0.5, n = -e + 1 when m == 0.5
    return np.where(m == 0.5, 1 - e, -e).astype(int)


def dyadic_counts(zeros, max_n: int, a=None) -> DyadicProfile:
    """Exact counts per annulus n = 0..max_n; refuses incomplete lists."""
    zl = _as_zero_list(zeros)
    need = float(dyadic_radius(max_n + 1))
    if zl.complete_below < need:
        raise IncompleteZerosError(
            f"zero list complete only below |z| = {zl.complete_below:.12g}, need {need:.12g}")
    idx = annulus_index(zl.gaps)
    idx = idx[idx <= max_n]
    bc = np.bincount(idx, minlength=max_n + 1)
    return DyadicProfile({n: int(bc[n]) for n in range(max_n + 1)}, max_n,
                         zl.a if a is None else a)


# -- disc averages -------------------------------------------------------------

@dataclass
class DiscAverage:
    n: int
    exponent: float
    value: float
    delta: float
    nodes: int
    node_max: float = 0.0


ZeroSource = Union[InnerFunction, Callable[[complex], object]]


def _is_atomic(source) -> bool:
    return isinstance(source, AtomicSingular)


def _counts_at_nodes(source, a_nodes, max_n):
    """υ_n(a) for n = 0..max_n at each node (rows = nodes)."""
    if _is_atomic(source):
        radii = dyadic_radius(np.arange(max_n + 2)).astype(float)
        below = np.stack([atomic_count_below(a_nodes, R, source.mass) for R in radii], axis=1)
        return np.diff(below, axis=1)
    r_need = float(dyadic_radius(max_n + 1))

    def one(a):
        if isinstance(source, InnerFunction):
            zl = frostman_zeros(source, a, r_need)
        else:
            zl = _as_zero_list(source(a))
        return dyadic_counts(zl, max_n).array()

    return np.array(ordered_map(one, list(a_nodes)))


def _disc_grid(delta, nodes, inner):
    # midpoint rule in |a| on [inner, delta], uniform in arg a
    nr = nodes
    nt = nodes
    edges = np.linspace(inner, delta, nr + 1)
    rho = 0.5 * (edges[:-1] + edges[1:])
    w_r = rho * np.diff(edges)
    th = 2 * np.pi * (np.arange(nt) + 0.5) / nt
    a = (rho[:, None] * np.exp(1j * th[None, :])).ravel()
    w = np.repeat(w_r, nt) * (2 * np.pi / nt)
    return a, w


def disc_averages(source: ZeroSource, delta: float, exponent: float, max_n: int,
                  nodes: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """int_{|a| <= delta} υ_n(a)**exponent dA(a) for n = 0..max_n.

    Returns ``(values, node_max)``.  For the atomic singular function the
    exceptional point a = 0 is cut out by the inner radius delta 2**-10.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    inner = delta * 2.0**-10 if _is_atomic(source) else 0.0
    a, w = _disc_grid(delta, nodes, inner)
    counts = _counts_at_nodes(source, a, max_n)
    powered = np.power(counts, exponent)
    values = w @ powered
    return values, powered.max(axis=0)


def disc_average_counts(source: ZeroSource, delta: float, exponent: float, n: int,
                        nodes: int = 64) -> DiscAverage:
    values, node_max = disc_averages(source, delta, exponent, n, nodes)
    return DiscAverage(n, exponent, float(values[n]), delta, nodes, float(node_max[n]))


# -- zero sources and IO ---------------------------------------------------------

def frostman_zeros(theta: InnerFunction, a: complex, r_max: float, N: int | None = None) -> ZeroList:
    """Zeros of Theta_a: exact for the atomic singular function, numeric otherwise."""
    if isinstance(theta, AtomicSingular):
        if N is None:
            # enough indices to cover |z| < r_max
            lam = -2.0 * np.log(abs(a)) / theta.mass
            y = np.sqrt(max(4 * lam / (1 - r_max**2), 0.0)) * theta.mass / 2.0
            N = int(np.ceil(y / (2 * np.pi))) + 2
        return atomic_frostman_zeros(a, N, theta.mass)
    if isinstance(theta, FiniteBlaschke):
        if a == 0:
            z = theta.zeros
            return ZeroList(z.copy(), 1.0 - np.abs(z), 1.0, 0j)
        return blaschke_frostman_zeros(theta, a)
    return find_zeros_numeric(theta, a, r_max)


def write_zeros_csv(path, zeros) -> None:
    zl = _as_zero_list(zeros)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re", "im"])
        for z in zl.zeros:
            wr.writerow([repr(float(z.real)), repr(float(z.imag))])


def read_zeros_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows], dtype=complex)


def zeros_to_json(zeros) -> str:
    zl = _as_zero_list(zeros)
    return json.dumps({"zeros": [[float(z.real), float(z.imag)] for z in zl.zeros],
                       "complete_below": zl.complete_below})


def zeros_from_json(text: str) -> ZeroList:
    obj = json.loads(text)
    z = np.array([re + 1j * im for re, im in obj["zeros"]], dtype=complex)
    # keep the stored order; re-sorting can swap near-tied conjugate pairs
    return ZeroList(z, 1.0 - np.abs(z), obj.get("complete_below", 1.0))
