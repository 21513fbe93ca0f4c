import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqsim.messages import (
    NON_INFORMATIVE,
    WEIGHT_CAP,
    GaussianMessage,
    GaussianMessages,
    GaussianVec,
    NonInformativeError,
    TrueMoments,
    clamp_events,
    divide,
    make_from_mean_var,
    mean_var,
    multiply,
)

weights = st.floats(-50, 50, allow_nan=False)
wmeans = st.floats(-50, 50, allow_nan=False)


@st.composite
def messages(draw):
    w = draw(weights)
    xi = draw(wmeans) if w != 0 else 0.0
    return GaussianMessage(w, xi)


def assert_msg_close(a, b, rel=1e-12):
    scale = max(1.0, abs(a.weight), abs(a.wmean))
    assert a.weight == pytest.approx(b.weight, rel=rel, abs=rel * scale)
    assert a.wmean == pytest.approx(b.wmean, rel=rel, abs=rel * scale)


class TestMakeFromMeanVar:
    def test_identity_case(self):
        g = make_from_mean_var(0, 1)
        assert (g.weight, g.wmean) == (1, 0)

    def test_direct_arithmetic(self):
        g = make_from_mean_var(1, 0.5)
        assert (g.weight, g.wmean) == (2, 2)

    def test_hand_arithmetic(self):
        g = make_from_mean_var(0.8, 0.36)
        assert g.weight == pytest.approx(2.7777777777777777, rel=1e-14)
        assert g.wmean == pytest.approx(2.2222222222222222, rel=1e-14)
        m, v = mean_var(g)
        assert (m, v) == pytest.approx((0.8, 0.36), rel=1e-12)

    @pytest.mark.parametrize("mean, var", [(0, 0), (0, -1), (math.nan, 1), (0, math.inf)])
    def test_invalid(self, mean, var):
        with pytest.raises(ValueError):
            make_from_mean_var(mean, var)

    @given(st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
    def test_round_trip(self, mean, var):
        g = make_from_mean_var(mean, var)
        back = make_from_mean_var(*mean_var(g))
        assert_msg_close(back, g)


class TestMultiplyDivide:
    def test_non_informative_is_identity(self):
        assert multiply(GaussianMessage(1, 0), NON_INFORMATIVE) == GaussianMessage(1, 0)

    def test_additivity(self):
        assert multiply(GaussianMessage(2, 1), GaussianMessage(1, 1)) == GaussianMessage(3, 2)

    def test_additivity_negative_weight(self):
        assert multiply(GaussianMessage(-1, 0.5), GaussianMessage(3, 1)) == GaussianMessage(2, 1.5)

    def test_divide_inverse(self):
        assert divide(GaussianMessage(3, 2), GaussianMessage(2, 1)) == GaussianMessage(1, 1)

    def test_divide_negative_result(self):
        q = divide(GaussianMessage(1, 0.5), GaussianMessage(2, 1))
        assert q == GaussianMessage(-1, -0.5)
        assert q.is_improper

    def test_divide_by_non_informative(self):
        g = GaussianMessage(2.5, -1.25)
        assert divide(g, NON_INFORMATIVE) == g

    def test_operators(self):
        a, b = GaussianMessage(2, 1), GaussianMessage(1, 1)
        assert a * b == multiply(a, b)
        assert (a * b) / b == a

    @given(messages(), messages())
    def test_commutative(self, a, b):
        assert multiply(a, b) == multiply(b, a)

    @given(messages(), messages(), messages())
    def test_associative(self, a, b, c):
        assert_msg_close(multiply(multiply(a, b), c), multiply(a, multiply(b, c)))

    @given(messages(), messages())
    def test_divide_undoes_multiply(self, a, b):
        prod = multiply(a, b)
        if prod.weight - b.weight == 0 and prod.wmean - b.wmean != 0:
            return  # would construct the forbidden (0, xi != 0)
        assert_msg_close(divide(prod, b), a)

    @given(st.floats(-5, 5), st.floats(0.01, 10), st.floats(-5, 5), st.floats(0.01, 10))
    def test_matches_density_product(self, m1, v1, m2, v2):
        # product of two Gaussian densities in mean/variance form
        var = v1 * v2 / (v1 + v2)
        mean = (m1 * v2 + m2 * v1) / (v1 + v2)
        m, v = mean_var(multiply(make_from_mean_var(m1, v1), make_from_mean_var(m2, v2)))
        assert v == pytest.approx(var, rel=1e-10)
        assert m == pytest.approx(mean, rel=1e-10, abs=1e-10)


class TestMeanVar:
    def test_positive(self):
        assert mean_var(GaussianMessage(2, 2)) == (1, 0.5)

    def test_negative_passthrough(self):
        assert mean_var(GaussianMessage(-2, 1)) == (-0.5, -0.5)

    def test_non_informative(self):
        with pytest.raises(NonInformativeError):
            mean_var(NON_INFORMATIVE)


class TestInvariants:
    def test_zero_weight_requires_zero_wmean(self):
        with pytest.raises(ValueError):
            GaussianMessage(0.0, 1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            GaussianMessage(math.inf, 0.0)

    def test_weight_cap(self):
        before = clamp_events()
        g = GaussianMessage(4 * WEIGHT_CAP, 8 * WEIGHT_CAP)
        assert g.weight == WEIGHT_CAP
        assert g.wmean / g.weight == pytest.approx(2.0)
        assert clamp_events() == before + 1

    def test_immutable(self):
        g = GaussianMessage(1, 0)
        with pytest.raises(AttributeError):
            g.weight = 2

    def test_gaussian_vec(self):
        GaussianVec([0, 1], np.eye(2))
        with pytest.raises(ValueError):
            GaussianVec([0, 1], [[1, 0.5], [0.4, 1]])
        with pytest.raises(ValueError):
            GaussianVec([0, 1, 2], np.eye(2))

    def test_true_moments(self):
        TrueMoments(0.6, 0.64)
        with pytest.raises(ValueError):
            TrueMoments(0.6, 0.5)

    def test_bulk_messages(self):
        msgs = GaussianMessages.from_mean_var([1.0, -2.0], [0.5, 4.0])
        assert len(msgs) == 2
        assert msgs[1] == GaussianMessage(0.25, -0.5)
        m, v = msgs.mean_var()
        np.testing.assert_allclose(m, [1.0, -2.0])
        np.testing.assert_allclose(v, [0.5, 4.0])
        with pytest.raises(NonInformativeError):
            GaussianMessages.non_informative(3).mean_var()
