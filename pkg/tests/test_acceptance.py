"""Acceptance criteria AC1-AC15.

Each test records one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import cmath
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import conftest
from innerfn.inner import (
    AtomicSingular,
    FiniteBlaschke,
    automorphism_identity_residual,
    frostman_derivative_residual,
    frostman_shift,
    random_disc_points,
    schwarz_pick_check,
)
from innerfn.norms import (
    DerivativeOf,
    MixedNormParams,
    clear_cache,
    hardy_norm_truncated,
    hp_blaschke_identity_rhs,
    mixed_norm_truncated,
    zero_power_sum,
)
from innerfn.verify import (
    classify,
    verify_besov,
    verify_corollary_hp,
    verify_shift,
    verify_theorem1,
    verify_theorem1b,
    verify_theorem3,
)
from innerfn.weights import classify_weight, exponential_weight, power_log_weight, power_weight
from innerfn.zeros import atomic_frostman_zeros, dyadic_counts, find_zeros_numeric

A_VALUES = [math.exp(-1), 0.3 + 0.2j, -0.5]
UNIT = power_weight(0.0)
S = AtomicSingular()


def record(ac, ok, detail):
    line = f"{ac} {'PASS' if ok else 'FAIL'}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_ac01_exact_zeros():
    t0 = time.perf_counter()
    worst_res = worst_mod = 0.0
    for a in A_VALUES:
        zl = atomic_frostman_zeros(a, 200)
        worst_res = max(worst_res, float(np.max(np.abs(S.value(zl.zeros) - a))))
        c = math.log(abs(a)) + 1j * (2 * np.pi * zl.index + cmath.phase(a))
        formula = -4 * math.log(abs(a)) / np.abs(c - 1) ** 2
        direct = 1 - np.abs(zl.zeros) ** 2
        worst_mod = max(worst_mod, float(np.max(np.abs(direct - formula))))
    dt = time.perf_counter() - t0
    ok = worst_res <= 1e-10 and worst_mod <= 1e-12 and dt < 5
    record("AC1", ok, f"max |S(z_n)-a| = {worst_res:.2e}, modulus identity error {worst_mod:.2e}, "
                      f"{dt:.2f} s")


def test_ac02_moduli_law():
    windows = []
    for a in A_VALUES:
        zl = atomic_frostman_zeros(a, 200)
        sel = np.abs(zl.index) >= 10
        law = (1 - np.abs(zl.zeros[sel])) * zl.index[sel].astype(float) ** 2
        windows.append(law.max() / law.min())
    record("AC2", max(windows) <= 2, f"max/min of (1-|z_n|) n^2 per a: "
                                     + ", ".join(f"{w:.4f}" for w in windows))


def test_ac03_zero_sum_threshold():
    t0 = time.perf_counter()
    zl = atomic_frostman_zeros(math.exp(-1), 50_000)
    got = {al: classify(zero_power_sum(zl, al)) for al in (0.25, 0.5, 0.75)}
    dt = time.perf_counter() - t0
    expected = {0.25: "divergent", 0.5: "divergent", 0.75: "convergent"}
    ok = all(got[al].verdict == expected[al] for al in got) and dt < 30 and len(zl) == 100_001
    record("AC3", ok, ", ".join(f"alpha={al}: {v.verdict} (slope {v.fitted_slope:.4f})"
                               for al, v in got.items()) + f"; {len(zl)} zeros, {dt:.1f} s")


def test_ac04_bergman_threshold():
    t0 = time.perf_counter()
    fp = DerivativeOf(S)
    bad, notes = [], []
    for p in (0.75, 1.0, 1.5, 2.0):
        for al in (-0.75, -0.5, 0.0, 0.5, 1.0):
            dist = al - (p - 1.5)
            law = "convergent" if dist > 0 else "divergent"
            v = classify(mixed_norm_truncated(fp, MixedNormParams(p, p, power_weight(al)), 16))
            if abs(dist) >= 0.25:
                if v.verdict != law:
                    bad.append((p, al, v.verdict))
            else:
                # at the threshold: the strict inequality says divergent
                notes.append(f"({p:g},{al:g})={v.verdict}")
                if v.verdict not in (law, "inconclusive"):
                    bad.append((p, al, v.verdict))
    dt = time.perf_counter() - t0
    record("AC4", not bad and dt < 600,
           f"{20 - len(notes)} off-threshold cells, mismatches {bad}; threshold cells "
           + " ".join(notes) + f"; {dt:.0f} s")


def test_ac05_theorem1_agreement():
    rows, ok = [], True
    for p, q in ((1, 1), (2, 2), (2, 1)):
        for g in (0.0, 0.25):
            res = verify_theorem1(S, p, q, power_weight(g), math.exp(-1), m=16)
            n, s = res.verdicts["norm"], res.verdicts["sum"]
            hyp = res.hypotheses["status"]
            if n.conclusive and s.conclusive and n.verdict != s.verdict:
                ok = False
            rows.append(f"(p,q)=({p},{q}) w^{g:g} [{hyp}]: {n.verdict}/{s.verdict}")
    record("AC5", ok, "; ".join(rows))


def test_ac06_theorem1b_ratio():
    res = verify_theorem1b(S, 1, 1, UNIT, 0.5, (8, 14), (1 / 50, 50))
    r = res.ratio
    record("AC6", r.drift <= 10 and r.window_ok,
           f"ratio in [{r.ratio_min:.4f}, {r.ratio_max:.4f}], drift {r.drift:.4f}, window_ok {r.window_ok}")


def test_ac07_theorem3_coherence():
    a = math.exp(-1)
    cases = [
        ("S p=0.75", S, 0.75, a, "convergent"),
        ("S p=1", S, 1.0, a, "convergent"),
        ("S p=1.75", S, 1.75, a, "divergent"),
        ("S p=2", S, 2.0, a, "divergent"),
        ("B{0.5} p=0.75", FiniteBlaschke(np.array([0.5])), 0.75, 0.3, "convergent"),
        ("B{0.3,-0.6} p=2", FiniteBlaschke(np.array([0.3, -0.6])), 2.0, 0.2j, "convergent"),
    ]
    ok, rows = True, []
    for name, theta, p, aa, law in cases:
        res = verify_theorem3(theta, p, UNIT, aa, 0.5, 16)
        vs = [res.verdicts[k].verdict for k in ("norm", "zero_sum", "level_set")]
        ok &= res.agree and all(v == law for v in vs)
        rows.append(f"{name}: {'/'.join(vs)}")
    record("AC7", ok, "; ".join(rows))


def test_ac08_hardy_chain():
    ok, rows = True, []
    keys = ("hardy", "bergman[alpha=0]", "bergman[alpha=1]", "zero_sum", "level_set")
    for p in (0.6, 0.75, 0.9):
        res = verify_corollary_hp(S, p, math.exp(-1), (0.0, 1.0), 0.5, 16)
        vs = [res.verdicts[k].verdict for k in keys]
        ok &= all(v == "divergent" for v in vs)
        rows.append(f"S p={p}: {'/'.join(vs)}")
    B = FiniteBlaschke(np.array([0.3, -0.6]))
    res = verify_corollary_hp(B, 0.75, 0.2, (0.0, 1.0), 0.5, 16)
    vs = [res.verdicts[k].verdict for k in keys]
    ok &= all(v == "convergent" for v in vs)
    rows.append(f"B p=0.75: {'/'.join(vs)}")
    record("AC8", ok, "; ".join(rows))


def test_ac09_shift():
    res = verify_shift(S, 1, 1, 1, UNIT, (10, 16))
    d = res.ratio.drift
    record("AC9", d <= 1.25 and res.agree, f"ratio drift {d:.4f} over m in [10,16], verdicts "
           + "/".join(v.verdict for v in res.verdicts.values()))


def test_ac10_besov():
    r2 = verify_besov(S, 2, 2, 0.2)
    r3 = verify_besov(S, 2, 2, 0.3)
    v2 = {k: v.verdict for k, v in r2.verdicts.items()}
    v3 = {k: v.verdict for k, v in r3.verdicts.items()}
    ok = (set(v2.values()) == {"convergent"} and set(v3.values()) == {"divergent"}
          and r2.agree and r3.agree)
    slopes = {k: round(v.fitted_slope, 3) for k, v in r2.verdicts.items()}
    record("AC10", ok, f"alpha=0.2: {v2} slopes {slopes}; alpha=0.3: {v3}")


def test_ac11_identities():
    z = random_disc_points(10_000, seed=11)
    a_pts = random_disc_points(10_000, seed=12)
    auto = float(np.max(automorphism_identity_residual(z, a_pts)))
    frost = 0.0
    for i, a in enumerate(random_disc_points(10, seed=13)):
        frost = max(frost, float(np.max(frostman_derivative_residual(S, a, z[i * 1000:(i + 1) * 1000]))))
    fns = [S, frostman_shift(S, 0.4), FiniteBlaschke(np.array([0.5, -0.5])),
           FiniteBlaschke(np.array([0.3 + 0.4j, 0.9, -0.2j]))]
    sp = max(schwarz_pick_check(f, 10_000, seed=14) for f in fns)
    ok = auto <= 1e-12 and frost <= 1e-12 and sp <= 1e-8
    record("AC11", ok, f"automorphism {auto:.2e}, Frostman derivative {frost:.2e}, "
                       f"Schwarz-Pick max violation {sp:.2e}")


def test_ac12_zero_finder():
    r = 1 - 2.0**-10
    ok, rows = True, []
    for a in A_VALUES:
        num = find_zeros_numeric(S, a, r)
        ex = atomic_frostman_zeros(a, 80)
        ex_in = ex.zeros[np.abs(ex.zeros) <= r]
        d = np.abs(num.zeros[:, None] - ex_in[None, :]).min(axis=1).max() if len(num) else 0.0
        ca = dyadic_counts(num, 9).counts
        cb = dyadic_counts(ex, 9).counts
        cons = num.certificate.conserved
        ok &= len(num) == len(ex_in) and d <= 1e-8 and ca == cb and cons
        rows.append(f"a={a:.4g}: {len(num)} zeros, max dist {d:.1e}, counts equal {ca == cb}, "
                    f"winding conserved {cons}")
    record("AC12", ok, "; ".join(rows))


def test_ac13_hp_identity():
    cases = [([0.5], 1.0), ([0.5, -0.5], 0.75), ([0.3 + 0.4j, -0.6, 0.2j], 1.5),
             ([0.7j, 0.1], 2.0)]
    worst, rows = 0.0, []
    for zs, p in cases:
        z = np.array(zs, dtype=complex)
        lhs = hardy_norm_truncated(DerivativeOf(FiniteBlaschke(z)), p, 14) ** p
        rhs = hp_blaschke_identity_rhs(z, p)
        worst = max(worst, abs(lhs / rhs - 1))
        rows.append(f"{len(zs)} zeros p={p}: {lhs:.5f} vs {rhs:.5f}")
    record("AC13", worst <= 0.02, "; ".join(rows) + f"; worst relative gap {worst:.2e}")


def test_ac14_weight_classifier():
    ok, rows = True, []
    for al in (-0.5, 0.0, 1.0, 2.0):
        rep = classify_weight(power_weight(al))
        good = rep.in_Dhat is True and rep.in_Dcheck is True
        good &= abs(rep.alpha_hat - (al + 1)) <= 0.05 and abs(rep.beta_hat - (al + 1)) <= 0.05
        ok &= good
        rows.append(f"(1-r)^{al:g}: R={good} a={rep.alpha_hat:.3f} b={rep.beta_hat:.3f}")
    rep = classify_weight(power_log_weight(1.0, 1.0))
    ok &= rep.in_Dhat is True and rep.in_Dcheck is True
    rows.append(f"(1-r)log(e/(1-r)): Dhat={rep.in_Dhat} Dcheck={rep.in_Dcheck}")
    rep = classify_weight(exponential_weight(1.0))
    ok &= rep.in_Dhat is False
    rows.append(f"exp(-1/(1-r)): Dhat={rep.in_Dhat}")
    record("AC14", ok, "; ".join(rows))


def test_ac15_determinism(tmp_path):
    clear_cache()
    first = verify_theorem1b(S, 1, 1, UNIT, 0.5, (8, 12), nodes=32).to_json()
    clear_cache()
    second = verify_theorem1b(S, 1, 1, UNIT, 0.5, (8, 12), nodes=32).to_json()
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        proc = subprocess.run([sys.executable, "-m", "innerfn", "verify", "theorem3", "--function",
                               '{"kind": "blaschke", "zeros": [0.5]}', "--p", "0.75", "--m", "12",
                               "--seed", "5", "--out", str(out)], capture_output=True, text=True)
        outs.append(out.read_bytes() if proc.returncode == 0 else proc.stderr.encode())
    ok = first == second and outs[0] == outs[1]
    record("AC15", ok, f"in-process rerun identical {first == second}, "
                       f"CLI rerun identical {outs[0] == outs[1]} ({len(outs[0])} bytes)")
