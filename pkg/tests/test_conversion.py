import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqsim.conversion import (
    LLR_MAX,
    MinkaFallback,
    SoftBit,
    damped_msg,
    gaussian_to_softbit,
    minka_gaussian,
    minka_or_standard,
    softbit_moments,
    standard_gaussian,
    standard_gaussians,
    true_moments,
)
from eqsim.messages import NON_INFORMATIVE, GaussianMessage, make_from_mean_var, mean_var
from eqsim.oracles import two_point_moments

llrs = st.floats(-LLR_MAX, LLR_MAX, allow_nan=False)


def two_point(p_plus):
    """Mean and variance of a {+1, -1} variable by direct enumeration."""
    support = np.array([1.0, -1.0])
    p = np.array([p_plus, 1 - p_plus])
    mean = p @ support
    return mean, p @ (support - mean) ** 2


def test_softbit_clamps():
    assert SoftBit(100).llr == LLR_MAX
    assert SoftBit(-100).llr == -LLR_MAX
    with pytest.raises(ValueError):
        SoftBit(math.nan)


class TestGaussianToSoftbit:
    def test_hand_evaluation(self):
        assert gaussian_to_softbit(make_from_mean_var(1, 0.5)).llr == pytest.approx(4.0)

    def test_non_informative(self):
        assert gaussian_to_softbit(NON_INFORMATIVE).llr == 0.0

    def test_symmetric(self):
        assert gaussian_to_softbit(make_from_mean_var(0, 2)).llr == 0.0

    def test_negative_weight_uses_same_formula(self):
        assert gaussian_to_softbit(GaussianMessage(-2.0, 0.75)).llr == 1.5


class TestSoftbitMoments:
    def test_neutral(self):
        assert softbit_moments(SoftBit(0)) == (0, 1)

    def test_brute_force(self):
        m, v = softbit_moments(SoftBit(math.log(4)))
        assert (m, v) == pytest.approx(two_point(0.8), abs=1e-14)
        assert (m, v) == pytest.approx((0.6, 0.64), abs=1e-14)

    def test_saturation(self):
        m, v = softbit_moments(SoftBit(LLR_MAX))
        assert abs(m - 1) < 1e-12 and abs(v) < 1e-12

    @given(llrs)
    def test_consistent_with_exponential_form(self, llr):
        m, v = softbit_moments(SoftBit(llr))
        e = math.exp(llr)
        assert m == pytest.approx((e - 1) / (e + 1), abs=1e-12)
        assert v == pytest.approx(1 - m * m, abs=1e-12)


class TestStandardGaussian:
    def test_neutral(self):
        assert standard_gaussian(SoftBit(0)) == GaussianMessage(1, 0)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_moments(self, sign):
        m, v = mean_var(standard_gaussian(SoftBit(sign * math.log(4))))
        m0, v0 = softbit_moments(SoftBit(sign * math.log(4)))
        assert (m, v) == pytest.approx((m0, v0), rel=1e-12)
        assert (m, v) == pytest.approx((sign * 0.6, 0.64), rel=1e-12)

    def test_vectorized_matches_scalar(self):
        ls = np.linspace(-40, 40, 81)
        w, xi = standard_gaussians(ls)
        for l0, wk, xk in zip(ls, w, xi):
            g = standard_gaussian(SoftBit(l0))
            assert (wk, xk) == pytest.approx((g.weight, g.wmean), rel=1e-12)


class TestTrueMoments:
    def test_neutral(self):
        t = true_moments(SoftBit(0), SoftBit(0))
        assert (t.mean, t.variance) == (0, 1)

    def test_brute_force(self):
        # m = 0.5 <=> p_plus = 0.75; joint p_plus ∝ 0.75**2, p_minus ∝ 0.25**2
        l_half = math.log(3)
        t = true_moments(SoftBit(l_half), SoftBit(l_half))
        p = 0.75**2 / (0.75**2 + 0.25**2)
        assert (t.mean, t.variance) == pytest.approx(two_point(p), abs=1e-14)
        assert t.mean == pytest.approx(0.8, abs=1e-14)

    @given(llrs)
    def test_opposite_cancel(self, llr):
        t = true_moments(SoftBit(llr), SoftBit(-llr))
        assert (t.mean, t.variance) == (0, 1)

    # the addition formula itself cancels badly once both tanh values saturate
    @given(st.floats(-12, 12), st.floats(-12, 12))
    def test_matches_mean_formula(self, a, b):
        ma, mb = math.tanh(a / 2), math.tanh(b / 2)
        t = true_moments(SoftBit(a), SoftBit(b))
        assert t.mean == pytest.approx((ma + mb) / (1 + ma * mb), abs=1e-9)


class TestMinka:
    def test_frozen_example(self):
        # enumeration of the two-point posterior, then message division (mpmath, 30 digits)
        g = minka_gaussian(SoftBit(0), make_from_mean_var(1, 1))
        assert g.weight == pytest.approx(1.3810978455418157, abs=1e-12)
        assert g.wmean == pytest.approx(0.8134302039235094, abs=1e-12)
        assert mean_var(g) == pytest.approx((0.5889736245330208, 0.7240616609663105), abs=1e-12)

    def test_weak_incoming_limit(self):
        g = minka_gaussian(SoftBit(0), make_from_mean_var(0, 1e6))
        m, v = mean_var(g)
        assert abs(m) < 1e-3 and abs(v - 1) < 1e-3

    def test_negative_weight_case(self):
        g = minka_gaussian(SoftBit(0), make_from_mean_var(0, 0.5))
        assert g.weight == pytest.approx(-1.0, abs=1e-14)
        assert g.is_improper

    @pytest.mark.parametrize("incoming", [NON_INFORMATIVE, GaussianMessage(-1.0, 0.3)])
    def test_fallback(self, incoming):
        with pytest.raises(MinkaFallback):
            minka_gaussian(SoftBit(1.0), incoming)
        assert minka_or_standard(SoftBit(1.0), incoming) == standard_gaussian(SoftBit(1.0))

    @given(llrs, st.floats(1e-15, 1e-9), st.floats(-3, 3))
    def test_reduces_to_standard(self, llr, weight, mean):
        f = SoftBit(llr)
        a = minka_gaussian(f, GaussianMessage(weight, weight * mean))
        b = standard_gaussian(f)
        ma, va = mean_var(a)
        mb, vb = mean_var(b)
        assert abs(ma - mb) <= 1e-6 and abs(va - vb) <= 1e-6

    @given(st.floats(0.1, 20), st.floats(0.1, 3).flatmap(lambda m: st.sampled_from([m, -m])))
    def test_not_trivial_for_neutral_forward(self, weight, mean):
        g = minka_gaussian(SoftBit(0), GaussianMessage(weight, weight * mean))
        assert abs(g.weight - 1) >= 1e-3 or abs(g.wmean / g.weight) >= 1e-3

    @settings(max_examples=300)
    @given(st.floats(-8, 8), st.floats(-1.5, 1.5), st.floats(0.2, 4.0))
    def test_moment_match_fixed_point(self, llr, mean, var):
        f = SoftBit(llr)
        g = make_from_mean_var(mean, var)
        m, v = mean_var(minka_gaussian(f, g) * g)
        t = true_moments(f, gaussian_to_softbit(g))
        assert abs(m - t.mean) <= 1e-10 and abs(v - t.variance) <= 1e-10
        m_o, v_o = two_point_moments(1 / (1 + math.exp(-llr)), g)
        assert abs(m - m_o) <= 1e-10 and abs(v - v_o) <= 1e-10


class TestDamping:
    minka = GaussianMessage(2, 1)
    std = GaussianMessage(4, 2)

    def test_endpoints(self):
        assert damped_msg(self.minka, self.std, 0.0) == self.std
        assert damped_msg(self.minka, self.std, 1.0) == self.minka

    def test_midpoint(self):
        assert damped_msg(self.minka, self.std, 0.5) == GaussianMessage(3, 1.5)

    def test_matches_mixture_formulas(self):
        # mean of the mixture written with variances, as in the geometric-mixture derivation
        a = 0.3
        vm, vs = 1 / self.minka.weight, 1 / self.std.weight
        mm, ms = self.minka.wmean * vm, self.std.wmean * vs
        prec = a / vm + (1 - a) / vs
        mean = (mm * a / vm + ms * (1 - a) / vs) / prec
        m, v = mean_var(damped_msg(self.minka, self.std, a))
        assert (m, v) == pytest.approx((mean, 1 / prec), rel=1e-12)

    @given(st.floats(0, 1), st.floats(-10, 10), st.floats(0.1, 10))
    def test_affine_in_alpha(self, alpha, wm, ws):
        m = GaussianMessage(wm, 0.5 * wm)
        s = GaussianMessage(ws, -ws)
        d = damped_msg(m, s, alpha)
        assert d.weight == pytest.approx(ws + alpha * (wm - ws), abs=1e-12)
        lo, hi = sorted((wm, ws))
        assert lo - 1e-12 <= d.weight <= hi + 1e-12

    @pytest.mark.parametrize("alpha", [-0.1, 1.1])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            damped_msg(self.minka, self.std, alpha)
