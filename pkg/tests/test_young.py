import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz.extended import INF, fmt, mul, recip, sub
from orlicz.young import (
    CutOff,
    Dilated,
    ExpMinusOne,
    GridSpec,
    Identity,
    LinearAboveKnee,
    Piecewise,
    Power,
    SampledYoung,
    convexity_violations,
    dilate,
    fundamental_function,
    infinite_generator,
    linfty_generator,
    sample,
)

CLOSED_FORMS = [
    Power(2.0),
    Power(3.0),
    Power(1.5, 2.0),
    Identity(),
    ExpMinusOne(),
    ExpMinusOne(0.5),
    LinearAboveKnee(1.0),
    CutOff(Power(2.0), 1.0),
    CutOff(Power(2.0), 1.0, 1.0),
    CutOff(Power(3.0), 2.0, 10.0),
    Dilated(Power(2.0), 3.0),
    Dilated(CutOff(Power(2.0), 1.0), 2.0),
    Piecewise(((0, 0), (1, 1), (2, 4))),
    Piecewise(((0, 0), (1, 0), (2, 1), (3, INF))),
    linfty_generator(1.0),
]


class TestExtended:
    def test_rules(self):
        assert recip(0.0) == INF and recip(INF) == 0.0
        assert mul(0.0, INF) == 0.0
        assert sub(INF, 1.0) == INF
        assert fmt(INF) == "inf" and fmt(2.5) == 2.5


class TestEvaluate:
    def test_power(self):
        assert Power(2).evaluate(3.0) == 9.0

    def test_beyond_cutoff(self):
        assert CutOff(Power(2), 1.0, 1.0).evaluate(2.0) == INF

    def test_below_knee(self):
        assert LinearAboveKnee(1.0).evaluate(0.5) == 0.0

    def test_vectorised_shape(self):
        u = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert np.asarray(Power(2).evaluate(u)).shape == (2, 2)

    def test_cutoff_value_at_b(self):
        assert CutOff(Power(2), 1.0, 1.0).evaluate(1.0) == 1.0
        assert CutOff(Power(2), 1.0).evaluate(1.0) == INF
        assert CutOff(Power(2), 1.0).evaluate_left(1.0) == 1.0

    def test_piecewise_interpolates(self):
        f = Piecewise(((0, 0), (1, 1), (2, 4)))
        assert f.evaluate(1.5) == pytest.approx(2.5)
        assert f.evaluate(3.0) == pytest.approx(7.0)  # extrapolates the last slope

    def test_piecewise_infinite_suffix(self):
        f = Piecewise(((0, 0), (1, 1), (2, INF)))
        assert f.evaluate(1.0) == 1.0 and f.evaluate(1.0 + 1e-12) == INF
        assert f.b_phi == 1.0

    @pytest.mark.parametrize(
        "points",
        [((0, 1), (1, 2)), ((0, 0), (2, 1), (1, 3)), ((0, 0), (1, 2), (2, 3)), ((0, 0), (1, 0))],
    )
    def test_piecewise_rejects_invalid(self, points):
        with pytest.raises(ValueError):
            Piecewise(points)

    def test_power_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            Power(0.5)


class TestRightInverse:
    def test_power(self):
        assert Power(2).right_inverse(4.0) == pytest.approx(2.0)

    def test_linfty_indicator(self):
        assert linfty_generator(1.0).right_inverse(17.0) == 1.0

    def test_knee_at_zero(self):
        assert LinearAboveKnee(1.0).right_inverse(0.0) == 1.0

    def test_at_infinity_returns_b(self):
        assert CutOff(Power(2), 1.0).right_inverse(INF) == 1.0
        assert Power(2).right_inverse(INF) == INF

    def test_infinite_generator(self):
        assert infinite_generator().right_inverse(5.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Power(2).right_inverse(-1.0)

    @pytest.mark.parametrize("phi", CLOSED_FORMS, ids=repr)
    def test_right_continuity(self, phi):
        us = np.logspace(-2, 2, 81)
        vals = np.asarray(phi.evaluate(us))
        eps = 1e-9
        # strictly increasing, finite region
        ok = np.isfinite(vals) & (vals > 0)
        with np.errstate(invalid="ignore"):
            ok[1:] &= np.diff(vals) > 0
        for u, v in zip(us[ok], vals[ok]):
            assert phi.right_inverse(max(v - eps * v, 0.0)) <= u * (1 + 1e-9)
            assert u <= phi.right_inverse(v + eps * v) * (1 + 1e-9)


class TestDegeneracy:
    def test_examples(self):
        assert Power(3).degeneracy_params()[:2] == (0.0, INF)
        assert CutOff(Power(2), 1.0, 1.0).degeneracy_params() == (0.0, 1.0, True)
        assert LinearAboveKnee(1.0).degeneracy_params()[:2] == (1.0, INF)

    @pytest.mark.parametrize("phi", CLOSED_FORMS, ids=repr)
    def test_round_trip(self, phi):
        a, b, _ = phi.degeneracy_params()
        if a > 0:
            assert phi.evaluate(a * (1 - 1e-6)) == 0.0
            assert phi.evaluate(a * (1 + 1e-6)) > 0.0
        if 0 < b < INF:
            assert phi.evaluate(b * (1 + 1e-6)) == INF
            assert math.isfinite(phi.evaluate(b * (1 - 1e-6)))


class TestFundamental:
    def test_power(self):
        assert fundamental_function(Power(2), 0.25) == pytest.approx(0.5)

    def test_identity(self):
        assert fundamental_function(Identity(), 2.0) == pytest.approx(2.0)

    def test_cutoff_not_right_continuous_at_zero(self):
        ts = np.logspace(-12, -1, 12)
        vals = fundamental_function(CutOff(Power(2), 1.0), ts)
        assert np.all(vals >= 1.0 - 1e-12)

    def test_unbounded_b_is_continuous_at_zero(self):
        assert fundamental_function(Power(2), 1e-12) < 1e-5


class TestDilate:
    def test_value(self):
        assert dilate(Power(2), 3.0).evaluate(1.0) == 9.0

    def test_b_parameter(self):
        psi = dilate(CutOff(Power(2), 1.0, 1.0), 2.0)
        assert psi.b_phi == 0.5
        assert dilate(LinearAboveKnee(1.0), 4.0).a_phi == 0.25

    def test_identity_factor(self):
        us = GridSpec(1e-3, 1e3, 101).points()
        for phi in CLOSED_FORMS:
            np.testing.assert_array_equal(dilate(phi, 1.0).evaluate(us), phi.evaluate(us))

    @pytest.mark.parametrize("phi", CLOSED_FORMS, ids=repr)
    @pytest.mark.parametrize("a", [0.5, 2.0, 3.0])
    def test_consistency(self, phi, a):
        us = GridSpec(1e-3, 1e3, 101).points()
        np.testing.assert_array_equal(dilate(phi, a).evaluate(us), phi.evaluate(a * us))


class TestSample:
    def test_identity_values_equal_grid(self):
        s = sample(Identity(), GridSpec(1e-2, 1e2, 5))
        np.testing.assert_allclose(s.values, s.grid)
        assert s.grid[0] == 0.0 and len(s.grid) == 6

    def test_cutoff_suffix_strictly_after_b(self):
        s = sample(CutOff(Power(2), 1.0), GridSpec(1e-2, 1e2, 5))
        k = int(np.nonzero(s.grid == 1.0)[0][0])
        assert np.isfinite(s.values[k]) and np.all(np.isinf(s.values[k + 1 :]))

    @pytest.mark.parametrize("phi", CLOSED_FORMS, ids=repr)
    def test_invariants(self, phi):
        s = sample(phi, GridSpec(1e-3, 1e3, 257))
        assert s.invariant_problems() == []

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            GridSpec(1.0, 1.0, 10)
        with pytest.raises(ValueError):
            GridSpec(1e-2, 1e2, 1)

    def test_sampled_inverse_ties_resolve_right(self):
        s = SampledYoung(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, 0.0, 1.0, 3.0]))
        assert s.right_inverse(0.0) == 1.0
        assert s.right_inverse(1.0) == pytest.approx(2.0)
        assert s.a_phi == 1.0

    def test_sampled_matches_closed_form_at_nodes(self):
        s = sample(ExpMinusOne(), GridSpec(1e-3, 10, 65))
        np.testing.assert_allclose(s.evaluate(s.grid), np.expm1(s.grid), rtol=1e-15)


@pytest.mark.parametrize("phi", CLOSED_FORMS, ids=repr)
def test_convexity_on_dense_grid(phi):
    us = np.logspace(-3, 3, 2001)
    assert convexity_violations(phi, us, rtol=1e-12) == 0


@settings(max_examples=200, deadline=None)
@given(
    p=st.floats(1.0, 6.0),
    scale=st.floats(0.1, 10.0),
    b=st.floats(0.1, 10.0),
    a=st.floats(0.1, 10.0),
)
def test_convexity_property(p, scale, b, a):
    phi = dilate(CutOff(Power(p, scale), b), a)
    us = np.logspace(-3, 3, 301)
    assert convexity_violations(phi, us, rtol=1e-12) == 0
    assert phi.evaluate(0.0) == 0.0
    vals = np.asarray(phi.evaluate(us))
    assert np.all(np.diff(vals[np.isfinite(vals)]) >= 0)
