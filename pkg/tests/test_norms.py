import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innerfn.inner import AtomicSingular, FiniteBlaschke
from innerfn.norms import (
    BoundaryDefect,
    DerivativeOf,
    MixedNormParams,
    QuadratureError,
    TruncatedValue,
    besov_norm_truncated,
    circle_mean,
    circle_power_mean,
    dyadic_sum_theorem1b,
    fractional_derivative_circle,
    hardy_means,
    hardy_norm_truncated,
    hp_blaschke_identity_rhs,
    level_set_integral,
    mixed_norm_truncated,
    single_point_sum,
    stolz_sum,
    zero_power_sum,
    zero_sum_theorem3,
)
from innerfn.verify import classify
from innerfn.weights import power_weight, tail_integral
from innerfn.zeros import DyadicProfile, ZeroList, atomic_frostman_zeros, dyadic_counts

UNIT = power_weight(0.0)
identity = lambda z: np.asarray(z, dtype=complex)  # noqa: E731


@pytest.fixture(scope="module")
def dS():
    return DerivativeOf(AtomicSingular(), 1)


@pytest.fixture(scope="module")
def s_zeros():
    return atomic_frostman_zeros(math.exp(-1), 50_000)


class TestCircleMeans:
    @pytest.mark.parametrize("r", [0.1, 0.5, 0.9, 0.999])
    def test_identity(self, r):
        assert circle_mean(identity, r, 2) == pytest.approx(r, rel=1e-14)

    @pytest.mark.parametrize("p", [0.5, 1, 3])
    def test_constant(self, p):
        c = lambda z: np.full(np.shape(z), 0.3 - 0.4j)  # noqa: E731
        assert circle_mean(c, 0.7, p) == pytest.approx(0.5, rel=1e-14)

    def test_derivative_vs_mpmath(self, dS):
        S = AtomicSingular()
        with mpmath.workdps(25):
            ref = mpmath.quad(lambda t: abs(mpmath.diff(
                lambda z: mpmath.exp((z + 1) / (z - 1)), 0.5 * mpmath.expj(t))), [0, mpmath.pi, 2 * mpmath.pi])
            ref = float(ref / (2 * mpmath.pi))
        got = circle_mean(dS, 0.5, 1.0, tol=1e-12)
        assert got == pytest.approx(ref, rel=1e-10)
        assert abs(S.derivative(0.5) - float(mpmath.diff(lambda z: mpmath.exp((z + 1) / (z - 1)), 0.5))) < 1e-12

    def test_non_convergence_reports_values(self):
        step = lambda z: 1.0 + (np.sin(1e5 * np.angle(z)) > 0)  # noqa: E731
        # unresolved oscillation keeps changing under refinement
        with pytest.raises(QuadratureError, match="last values"):
            circle_power_mean(step, 0.5, 1.0, tol=1e-6)
        with pytest.raises(QuadratureError):
            circle_power_mean(step, 0.5, 1.0, max_doublings=0)

    def test_radius_range(self):
        with pytest.raises(ValueError):
            circle_mean(identity, 1.0, 1)


class TestMixedNorm:
    def test_identity_limit(self):
        tv = mixed_norm_truncated(identity, MixedNormParams(2, 2, UNIT), 14)
        R = 1 - 2.0**-14
        assert tv.value == pytest.approx(R**3 / 3, rel=1e-12)
        assert abs(tv.value - 1 / 3) < 2.0**-14

    def test_value_is_sum_of_blocks(self):
        tv = mixed_norm_truncated(identity, MixedNormParams(1, 3, power_weight(0.5)), 10)
        assert tv.value == pytest.approx(float(np.sum(tv.blocks)), rel=1e-15)
        assert np.all(tv.blocks >= 0)

    @settings(max_examples=10, deadline=None)
    @given(c=st.floats(0.01, 100.0))
    def test_weight_scaling_exact(self, c):
        w = power_weight(0.5)
        a = mixed_norm_truncated(identity, MixedNormParams(2, 1, w), 8).value
        b = mixed_norm_truncated(identity, MixedNormParams(2, 1, w.scaled(c)), 8).value
        assert b == pytest.approx(c * a, rel=1e-13)

    def test_tail_kernel_on_identity(self):
        # int_0^R r^2 omega_hat(r)/(1-r) dr with omega = 1 equals int r^2 dr
        tv = mixed_norm_truncated(identity, MixedNormParams(2, 2, UNIT), 12, kernel="tail")
        R = 1 - 2.0**-12
        assert tv.value == pytest.approx(R**3 / 3, rel=1e-12)

    def test_bad_depth_and_kernel(self):
        with pytest.raises(ValueError):
            mixed_norm_truncated(identity, MixedNormParams(2, 2, UNIT), 21)
        with pytest.raises(ValueError):
            mixed_norm_truncated(identity, MixedNormParams(2, 2, UNIT), 4, kernel="nope")
        with pytest.raises(ValueError):
            MixedNormParams(0, 1, UNIT)

    def test_derivative_convergent_case(self, dS):
        tv = mixed_norm_truncated(dS, MixedNormParams(1, 1, UNIT), 14)
        b = tv.blocks
        assert np.all(b[9:14] < b[8:13])
        assert classify(b).verdict == "convergent"
        # geometric decay at rate 2**-1/2 between m = 12 and m = 14
        ratios = b[9:14] / b[8:13]
        np.testing.assert_allclose(ratios, 2**-0.5, rtol=0.05)

    def test_derivative_divergent_case(self, dS):
        tv = mixed_norm_truncated(dS, MixedNormParams(2, 2, UNIT), 16)
        b = tv.blocks[8:16]
        assert np.all(np.diff(b) >= 0)
        assert classify(tv.blocks).verdict == "divergent"

    def test_kernel_equivalence(self, dS):
        params = MixedNormParams(2, 2, power_weight(1.0))
        S = AtomicSingular()
        a = mixed_norm_truncated(dS, params, 16).partial_sums()
        b = mixed_norm_truncated(BoundaryDefect(S), params, 16).partial_sums()
        c = mixed_norm_truncated(dS, params, 16, kernel="tail").partial_sums()
        for x, y in ((a, b), (a, c), (b, c)):
            ratio = x[9:16] / y[9:16]
            assert 1 / 50 <= ratio.min() and ratio.max() <= 50


class TestHardy:
    def test_identity(self):
        assert hardy_norm_truncated(identity, 1, 12) == pytest.approx(1 - 2.0**-12, rel=1e-13)

    def test_running_max_increments(self, dS):
        tv = hardy_means(dS, 0.75, 16)
        assert np.all(tv.blocks >= 0)
        assert np.all(tv.blocks[8:] > 0)
        assert classify(tv.blocks).verdict == "divergent"

    def test_blaschke_stabilises(self):
        dB = DerivativeOf(FiniteBlaschke(np.array([0.5])), 1)
        h12 = hardy_norm_truncated(dB, 0.75, 12)
        h16 = hardy_norm_truncated(dB, 0.75, 16)
        assert h16 - h12 < 1e-3 * h16


class TestHpIdentity:
    def test_origin(self):
        assert hp_blaschke_identity_rhs(np.array([0j]), 1.0) == pytest.approx(1.0, rel=1e-14)
        dB = DerivativeOf(FiniteBlaschke(np.array([0j])), 1)
        assert hardy_norm_truncated(dB, 1.0, 14) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("zeros,p,rel", [
        ([0.5], 1.0, 0.01),
        ([0.5, -0.5], 0.75, 0.02),
        ([0.3 + 0.4j, -0.6, 0.2j], 1.5, 0.02),
    ])
    def test_matches_hardy(self, zeros, p, rel):
        z = np.array(zeros, dtype=complex)
        dB = DerivativeOf(FiniteBlaschke(z), 1)
        lhs = hardy_norm_truncated(dB, p, 14) ** p
        assert lhs == pytest.approx(hp_blaschke_identity_rhs(z, p), rel=rel)

    def test_empty(self):
        assert hp_blaschke_identity_rhs(np.array([], dtype=complex), 1.0) == 0.0


class TestLevelSet:
    def test_identity_closed_form(self):
        B = FiniteBlaschke(np.array([0j]))
        tv = level_set_integral(B, 0.5, 0.75, UNIT, 6)
        u = lambda x: 4 * x**0.25 - 0.8 * x**1.25  # noqa: E731
        exact = 2 * math.pi * (u(1.0) - u(0.5))
        assert tv.value == pytest.approx(exact, abs=1e-6)

    def test_monotone_in_C(self):
        S = AtomicSingular()
        small = level_set_integral(S, 0.3, 0.75, UNIT, 8).partial_sums()
        large = level_set_integral(S, 0.5, 0.75, UNIT, 8).partial_sums()
        assert np.all(small <= large + 1e-15)

    def test_unweighted_divergent_like_zero_sum(self, s_zeros):
        tv = level_set_integral(AtomicSingular(), 0.5, 0.75, None, 16)
        v = classify(tv.blocks)
        assert v.verdict == "divergent"
        assert classify(zero_power_sum(s_zeros, 0.25).blocks).verdict == v.verdict

    def test_C_range(self):
        with pytest.raises(ValueError):
            level_set_integral(AtomicSingular(), 1.0, 1, UNIT, 4)


class TestDyadicSums:
    def test_zero_averages(self):
        tv = dyadic_sum_theorem1b(None, MixedNormParams(1, 1, UNIT), 0.5, 8, averages=np.zeros(9))
        assert tv.value == 0.0

    def test_missing_averages(self):
        with pytest.raises(ValueError, match="missing"):
            dyadic_sum_theorem1b(None, MixedNormParams(1, 1, UNIT), 0.5, 8)
        with pytest.raises(ValueError, match="missing"):
            dyadic_sum_theorem1b(None, MixedNormParams(1, 1, UNIT), 0.5, 8, averages=np.ones(3))

    def test_single_fixed_zero(self):
        src = lambda a: ZeroList.from_array([0.9])  # noqa: E731
        delta = 0.4
        tv = dyadic_sum_theorem1b(src, MixedNormParams(1, 1, UNIT), delta, 6, nodes=6)
        expected = tail_integral(UNIT, 7 / 8) * math.pi * delta**2
        assert tv.value == pytest.approx(expected, rel=1e-12)
        assert np.count_nonzero(tv.blocks) == 1 and tv.blocks[3] > 0

    def test_atomic_decay_rate(self):
        tv = dyadic_sum_theorem1b(AtomicSingular(), MixedNormParams(1, 1, UNIT), 0.5, 16)
        ratios = tv.blocks[9:17] / tv.blocks[8:16]
        assert np.all(np.abs(ratios / 2**-0.5 - 1) <= 0.3)

    def test_single_point_empty(self):
        prof = DyadicProfile({n: 0 for n in range(9)}, 8)
        assert single_point_sum(prof, MixedNormParams(1, 1, UNIT)).value == 0.0

    def test_single_point_beyond_profile(self):
        prof = DyadicProfile({0: 1}, 0)
        with pytest.raises(ValueError):
            single_point_sum(prof, MixedNormParams(1, 1, UNIT), 4)

    def test_single_point_verdicts(self, s_zeros, dS):
        prof = dyadic_counts(s_zeros, 24)
        conv = single_point_sum(prof, MixedNormParams(1, 1, UNIT))
        assert classify(conv.blocks).verdict == "convergent"
        div = single_point_sum(prof, MixedNormParams(2, 2, UNIT))
        norm = mixed_norm_truncated(dS, MixedNormParams(2, 2, UNIT), 16)
        assert classify(div.blocks).verdict == classify(norm.blocks).verdict == "divergent"

    def test_theorem3_sum(self, s_zeros):
        assert classify(zero_sum_theorem3(s_zeros, 0.75, UNIT).blocks).verdict == "convergent"
        assert classify(zero_sum_theorem3(s_zeros, 1.5, UNIT).blocks).verdict == "divergent"

    def test_theorem3_finite_direct(self):
        z = np.array([0.1, 0.5j, -0.7, 0.95 + 0.1j])
        tv = zero_sum_theorem3(z, 1.3, power_weight(0.5), depth=10)
        g = 1 - np.abs(z)
        direct = sum(tail_integral(power_weight(0.5), 1 - x) / x**0.3 for x in g)
        assert tv.value == pytest.approx(direct, rel=1e-13)
        assert len(tv.blocks) == 10


class TestFractionalDerivative:
    def test_identity(self):
        r, N = 0.6, 256
        vals = fractional_derivative_circle(identity, 1.0, r, N=N)
        t = 2 * np.pi * np.arange(N) / N
        np.testing.assert_allclose(vals, 2 * r * np.exp(1j * t), atol=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
    def test_series_oracle(self, alpha):
        f = lambda z: 1 / (1 - z / 2)  # noqa: E731
        r = 0.8
        vals = fractional_derivative_circle(f, alpha, r)
        N = len(vals)
        for j in (0, N // 3, N // 2):
            z = r * np.exp(2j * np.pi * j / N)
            n = np.arange(400)
            ref = np.sum((n + 1.0) ** alpha * (z / 2) ** n)
            assert abs(vals[j] - ref) < 1e-10 * abs(ref)

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_comparable_to_derivative(self, p):
        S = AtomicSingular()
        for k in range(1, 9):
            r = 1 - 2.0**-k
            d1 = fractional_derivative_circle(S.value, 1.0, r)
            m1 = np.mean(np.abs(d1) ** p) ** (1 / p)
            m2 = circle_mean(DerivativeOf(S), r, p)
            assert 1 / 8 <= m1 / m2 <= 8

    def test_power_of_two(self):
        with pytest.raises(ValueError):
            fractional_derivative_circle(identity, 1.0, 0.5, N=100)

    def test_aliasing_error(self):
        S = AtomicSingular()
        with pytest.raises(QuadratureError):
            fractional_derivative_circle(S.value, 1.0, 1 - 2.0**-14, max_n=1 << 12)


class TestBesov:
    def test_identity_closed_form(self):
        m = 12
        tv = besov_norm_truncated(identity, 2, 2, 0.25, m)
        R = 1 - 2.0**-m
        exact = 2**2.5 * (R**3 / 3 - R**4 / 4)
        assert tv.value == pytest.approx(exact, rel=1e-12)

    def test_general_p_matches_parseval(self):
        f = lambda z: 1 / (1 - z / 2)  # noqa: E731
        a = besov_norm_truncated(f, 2, 2, 0.25, 6)
        b = besov_norm_truncated(f, 2.0000001, 2, 0.25, 6)
        assert b.value == pytest.approx(a.value, rel=1e-5)


class TestStolz:
    def test_origin(self):
        assert stolz_sum(np.array([0j]), 2.0, 0.75) == pytest.approx(2 * math.pi)

    def test_empty(self):
        assert stolz_sum(np.array([], dtype=complex), 2.0, 0.75) == 0.0

    def test_exact_vs_sampled(self):
        zl = atomic_frostman_zeros(math.exp(-1), 10)
        exact = stolz_sum(zl, 2.0, 0.75)
        sampled = stolz_sum(zl, 2.0, 0.75, N=1 << 20)
        assert sampled == pytest.approx(exact, rel=2e-3)

    def test_single_arc(self):
        # |z - e^{it}| <= eta (1-|z|) is an explicit arc around arg z
        z, eta = 0.9, 3.0
        t = np.linspace(-np.pi, np.pi, 2_000_001)
        inside = np.abs(z - np.exp(1j * t)) <= eta * (1 - z)
        length = inside.mean() * 2 * np.pi
        assert stolz_sum(np.array([z + 0j]), eta, 1.0) == pytest.approx(length * 10, rel=1e-4)

    def test_grows_with_truncation(self):
        vals = [stolz_sum(atomic_frostman_zeros(math.exp(-1), N), 2.0, 0.75) for N in (50, 150, 500)]
        assert vals[0] < vals[1] < vals[2]

    def test_eta(self):
        with pytest.raises(ValueError):
            stolz_sum(np.array([0.5 + 0j]), 1.0, 1.0)


class TestTruncatedValue:
    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=30))
    def test_partial_sums_monotone(self, blocks):
        tv = TruncatedValue.from_blocks(blocks)
        assert np.all(np.diff(tv.partial_sums()) >= 0)

    def test_negative_blocks(self):
        with pytest.raises(ValueError):
            TruncatedValue.from_blocks([1.0, -1.0])

    def test_serialisation(self):
        import json

        tv = TruncatedValue.from_blocks([1.0, 0.5, 0.25], label="x")
        d = json.loads(tv.to_json())
        assert d["blocks"] == [1.0, 0.5, 0.25] and d["depth"] == 3
        lines = tv.to_csv().splitlines()
        assert lines[0] == "m,value" and lines[-1] == "3,1.75"
