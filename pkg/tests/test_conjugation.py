import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FOUR_27, dense_sup, power_conjugate, random_convex
from orlicz.conjugation import (
    DomainConvention,
    PointwiseOminus,
    bruteforce_rows,
    classical_conjugate,
    ominus,
    ominus_at,
    ominus_b,
    ominus_bruteforce,
    ominus_monotone,
    ominus_truncated,
    power_argmax,
    power_ominus,
    truncation_sweep,
)
from orlicz.extended import INF
from orlicz.young import (
    CutOff,
    ExpMinusOne,
    GridSpec,
    Identity,
    LinearAboveKnee,
    Piecewise,
    Power,
    SampledYoung,
    dilate,
    linfty_generator,
    sample,
)

SMALL = GridSpec(1e-2, 1e2, 257)


class TestOminus:
    def test_identity_identity(self):
        v, _ = ominus_at(Identity(), Identity(), np.array([0.5, 1.0, 1.0001, 2.0]))
        np.testing.assert_array_equal(v, [0.0, 0.0, INF, INF])

    def test_power_pair_against_dense_oracle(self):
        for u in [0.3, 1.0, 2.5]:
            want, s_want = dense_sup(lambda x: x**2, lambda s: s**3, u)
            got, s_got = ominus_at(Power(2), Power(3), u)
            # a dense grid can only under-estimate the supremum
            assert want <= got * (1 + 1e-15)
            assert got == pytest.approx(want, rel=1e-8)
            assert s_got == pytest.approx(s_want, rel=1e-4)
        assert ominus_at(Power(2), Power(3), 1.0)[0] == pytest.approx(FOUR_27, rel=1e-14)
        assert ominus_at(Power(2), Power(3), 1.0)[1] == pytest.approx(2 / 3, rel=1e-7)

    def test_power_pair_on_grid(self):
        res = ominus(Power(2), Power(3), SMALL)
        u = res.grid[1:]
        np.testing.assert_allclose(res.values[1:], FOUR_27 * u**6, rtol=1e-12)
        np.testing.assert_allclose(res.argmax[1:], 2 * u**2 / 3, rtol=1e-6)
        assert res.domain_convention is DomainConvention.UNBOUNDED
        assert res.function.invariant_problems() == []

    def test_trivial_case(self):
        res = ominus(CutOff(Power(2), 1.0), Power(2), SMALL)
        assert np.all(np.isinf(res.values[1:])) and res.values[0] == 0.0

    @pytest.mark.parametrize(
        "p, q, alpha, beta",
        [(2, 3, 1, 1), (1.5, 3, 1, 1), (2, 4, 2, 0.5), (1, 2, 1, 0.5), (3, 5, 1, 3)],
    )
    def test_closed_form_matches_numeric(self, p, q, alpha, beta):
        phi, phi1 = Power(p, alpha), Power(q, beta)
        u = np.logspace(-2, 2, 41)
        got, s = ominus_at(phi, phi1, u)
        want, s_want = power_conjugate(p, q, u, alpha, beta)
        np.testing.assert_allclose(got, want, rtol=1e-12)
        np.testing.assert_allclose(power_ominus(phi, phi1).evaluate(u), want, rtol=1e-12)
        np.testing.assert_allclose(power_argmax(phi, phi1, u), s_want, rtol=1e-12)

    def test_closed_form_degenerate_cases(self):
        g = power_ominus(Power(2), Power(2, 4.0))
        assert g.evaluate(1.99) == 0.0 and g.evaluate(2.01) == INF
        assert power_ominus(Power(3), Power(2)).evaluate(1e-3) == INF
        v, _ = ominus_at(Power(2), Power(2, 4.0), np.array([1.99, 2.01]))
        np.testing.assert_array_equal(v, [0.0, INF])

    def test_cancellation_does_not_win(self):
        v, s = ominus_at(Identity(), LinearAboveKnee(1.0), 1.0)
        assert v == pytest.approx(1.0) and s == pytest.approx(1.0)

    def test_sup_escaping_to_infinity(self):
        # phi(su) - phi1(s) = s u - (s - 1)^+ tends to 1 as s -> inf when u = 1
        v, s = ominus_at(Identity(), LinearAboveKnee(1.0), np.array([0.5, 1.0, 1.5]))
        assert v[0] == pytest.approx(0.5) and v[1] == pytest.approx(1.0) and v[2] == INF

    def test_exponential_classical_conjugate(self):
        u = np.logspace(0.01, 2, 21)
        got, _ = ominus_at(Identity(), ExpMinusOne(), u)
        np.testing.assert_allclose(got, u * np.log(u) - u + 1, rtol=1e-9)


class TestDomainConventions:
    def test_open_at_b(self):
        res = ominus(Power(2), CutOff(Power(2), 1.0), SMALL)
        assert res.domain_convention is DomainConvention.OPEN_AT_B

    def test_closed_at_b(self):
        res = ominus(Power(2), CutOff(Power(2), 1.0, 1.0), SMALL)
        assert res.domain_convention is DomainConvention.CLOSED_AT_B

    def test_open_end_uses_left_limit(self):
        # s ranges over (0, 1): sup of s^2 (u^2 - 1) is u^2 - 1 (left limit at s = 1)
        phi1 = CutOff(Power(2), 1.0)
        v, s = ominus_at(Power(2), phi1, 3.0)
        assert v == pytest.approx(8.0) and s == 1.0
        v, s = ominus_at(Power(2), CutOff(Power(2), 1.0, 1.0), 3.0)
        assert v == pytest.approx(8.0) and s == 1.0

    def test_b_propagation(self):
        phi = CutOff(Power(2), 1.0)
        assert ominus_b(phi, phi) == 1.0
        assert ominus_b(Power(2), CutOff(Power(3), 1.0)) == INF
        assert ominus_b(phi, Power(2)) == 0.0
        assert ominus_b(Power(2), Power(2)) == pytest.approx(1.0, rel=1e-12)
        assert ominus_b(Power(2), Power(3)) == INF
        # numeric location agrees with the sampled result
        res = ominus(phi, phi, SMALL)
        last = res.grid[res.function.infinite_from() - 1]
        assert last <= 1.0 < res.grid[res.function.infinite_from()]

    def test_attainment_below_one(self):
        phi = CutOff(Power(2), 1.0)
        phi1 = CutOff(Power(3), 1.0)
        res = ominus(phi, phi1, SMALL)
        below = res.grid < 1.0
        assert np.all(np.isfinite(res.argmax[below]))


class TestTruncated:
    def test_identity(self):
        res = ominus_truncated(Identity(), Identity(), 1.0, SMALL)
        np.testing.assert_allclose(res.values, np.maximum(0.0, res.grid - 1.0), atol=1e-15)

    def test_interior_argmax(self):
        v, s = ominus_at(Power(2), Power(3), 1.0, truncation=10.0)
        assert v == pytest.approx(FOUR_27, rel=1e-14) and s == pytest.approx(2 / 3, rel=1e-7)

    def test_boundary_argmax(self):
        v, s = ominus_at(Power(2), Power(3), 1.0, truncation=0.5)
        assert v == pytest.approx(0.125, rel=1e-14) and s == 0.5

    def test_rejects_bad_a(self):
        with pytest.raises(ValueError):
            ominus_truncated(Power(2), Power(3), 0.0, SMALL)
        with pytest.raises(ValueError):
            ominus_truncated(Power(2), CutOff(Power(3), 1.0), 2.0, SMALL)

    def test_finite_where_phi_is(self):
        res = ominus_truncated(Power(2), Power(2), 3.0, SMALL)
        assert np.all(np.isfinite(res.values))
        assert res.function.invariant_problems() == []


class TestSweep:
    def test_power_example(self):
        results = truncation_sweep(Power(2), Power(3), [1, 2, 4, 8], SMALL)
        k = int(np.argmin(np.abs(SMALL.points() - 1.0)))
        vals = [r.values[k] for r in results]
        assert all(v == pytest.approx(FOUR_27, rel=1e-12) for v in vals)
        v_small, _ = ominus_at(Power(2), Power(3), 1.0, truncation=0.5)
        assert v_small < vals[0]

    def test_monotone_in_a(self):
        results = truncation_sweep(Power(2), ExpMinusOne(), [0.5, 1, 2, 4, 8, 16], SMALL)
        stack = np.array([r.values for r in results])
        assert np.all(np.diff(stack, axis=0) >= -1e-12 * np.abs(stack[1:]))

    def test_converges_to_untruncated(self):
        u = 3.0
        full, _ = ominus_at(Identity(), Power(2, 0.5), u)
        gaps = [abs(full - ominus_at(Identity(), Power(2, 0.5), u, truncation=2.0**k)[0]) for k in range(6)]
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-12 * full

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            truncation_sweep(Power(2), Power(3), [2, 1])


class TestClassical:
    def test_self_conjugate(self):
        res = classical_conjugate(Power(2, 0.5), GridSpec(1e-2, 1e2, 129))
        np.testing.assert_allclose(res.values[1:], 0.5 * res.grid[1:] ** 2, rtol=1e-2)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_legendre_pairs(self, p):
        q = p / (p - 1)
        res = classical_conjugate(Power(p, 1 / p), GridSpec(1e-2, 1e2, 129))
        np.testing.assert_allclose(res.values[1:], res.grid[1:] ** q / q, rtol=1e-2)

    def test_p3_at_one(self):
        v, _ = ominus_at(Identity(), Power(3, 1 / 3), 1.0)
        assert v == pytest.approx(2 / 3, rel=1e-12)

    def test_linfty_indicator(self):
        res = classical_conjugate(linfty_generator(1.0), SMALL)
        np.testing.assert_allclose(res.values, res.grid, rtol=1e-12)


class TestSampledRoutes:
    def test_bruteforce_close_to_closed_form(self):
        g = GridSpec()
        res = ominus_bruteforce(sample(Power(2), g), sample(Power(3), g))
        u = res.grid
        # s* = 2u^2/3 and s* u stay well inside the grid here
        inside = (u >= 1e-1) & (u <= 1e1)
        np.testing.assert_allclose(res.values[inside], FOUR_27 * u[inside] ** 6, rtol=1e-2)

    def test_bruteforce_identity(self):
        g = GridSpec(1e-2, 1e2, 257)
        res = ominus_bruteforce(sample(Identity(), g), sample(Identity(), g))
        assert np.all(np.abs(res.values[res.grid < 1 - 1e-9]) <= 1e-12)

    def test_monotone_equals_bruteforce_power(self):
        g = GridSpec()
        a, b = sample(Power(2), g), sample(Power(3), g)
        m, bf = ominus_monotone(a, b), ominus_bruteforce(a, b)
        assert not m.fallback
        np.testing.assert_allclose(m.values, bf.values, rtol=1e-12)

    def test_monotone_cutoff_suffix(self):
        g = GridSpec(1e-2, 1e2, 513)
        for phi, phi1 in [
            (CutOff(Power(2), 1.0), CutOff(Power(2), 1.0)),
            (Power(2), CutOff(Power(3), 2.0, 8.0)),
            (CutOff(Power(2), 3.0), CutOff(Power(3), 1.0)),
        ]:
            a, b = sample(phi, g), sample(phi1, g)
            m, bf = ominus_monotone(a, b), ominus_bruteforce(a, b)
            assert m.function.infinite_from() == bf.function.infinite_from()
            np.testing.assert_allclose(m.values, bf.values, rtol=1e-12)

    def test_fallback_on_nonconvex(self):
        g = np.linspace(0, 4, 9)
        vals = np.array([0, 1, 1.5, 1.7, 4, 5, 9, 10, 20.0])
        bad = SampledYoung(g, vals)
        res = ominus_monotone(bad, sample(Power(2), GridSpec(1e-2, 1e2, 65)))
        assert res.fallback

    def test_bruteforce_rows_subset(self):
        g = GridSpec(1e-2, 1e2, 257)
        a, b = sample(Power(2), g), sample(Power(3), g)
        full = ominus_bruteforce(a, b)
        rows = np.arange(0, 258, 16)
        v, s = bruteforce_rows(a, b, rows)
        np.testing.assert_array_equal(v, full.values[rows])


def test_random_convex_pairs_argmax_monotone_and_fast_path_exact():
    rng = np.random.default_rng(11)
    grid = GridSpec(1e-2, 1e2, 255).points()
    for _ in range(100):
        a, b = random_convex(rng, grid), random_convex(rng, grid)
        if b.infinite_from() < 2:
            continue
        bf = ominus_bruteforce(a, b)
        m = ominus_monotone(a, b)
        assert not m.fallback
        fin = np.isfinite(bf.argmax)
        assert np.all(np.diff(bf.argmax[fin]) >= 0)
        same_inf = np.isinf(bf.values) == np.isinf(m.values)
        assert same_inf.all()
        f = np.isfinite(bf.values)
        np.testing.assert_allclose(m.values[f], bf.values[f], rtol=1e-12, atol=0)


class TestInvariants:
    PAIRS = [
        (Power(2), Power(3)),
        (Identity(), ExpMinusOne()),
        (Power(2), Power(2)),
        (CutOff(Power(2), 1.0), CutOff(Power(2), 1.0)),
        (Power(2), CutOff(Power(3), 1.0, 1.0)),
        (LinearAboveKnee(1.0), Power(2)),
    ]

    @pytest.mark.parametrize("phi, phi1", PAIRS, ids=repr)
    def test_young_inequality(self, phi, phi1):
        gen = ominus(phi, phi1, GridSpec(1e-3, 1e3, 1025)).function
        u = np.logspace(-2, 2, 200)
        v = np.logspace(-2, 2, 200)
        lhs = np.asarray(phi.evaluate(u[:, None] * v[None, :]))
        rhs = np.asarray(gen.evaluate(u))[:, None] + np.asarray(phi1.evaluate(v))[None, :]
        fin = np.isfinite(lhs)
        assert not np.any(fin & np.isfinite(rhs) & (lhs > rhs * (1 + 1e-9)))
        assert not np.any(~fin & np.isfinite(rhs))

    @pytest.mark.parametrize("phi, phi1", PAIRS, ids=repr)
    @pytest.mark.parametrize("a, b", [(2.0, 3.0), (0.5, 4.0)])
    def test_dilation_identity(self, phi, phi1, a, b):
        lhs = ominus(dilate(phi, a), dilate(phi1, b), SMALL)
        rhs, _ = ominus_at(phi, phi1, a * lhs.grid / b)
        l, r = lhs.values, np.asarray(rhs)
        assert np.array_equal(np.isinf(l), np.isinf(r))
        f = np.isfinite(l)
        np.testing.assert_allclose(l[f], r[f], rtol=1e-6, atol=1e-300)

    @pytest.mark.parametrize("phi, phi1", PAIRS, ids=repr)
    def test_result_is_young(self, phi, phi1):
        res = ominus(phi, phi1, SMALL)
        assert res.function.invariant_problems() == []
        fin = np.isfinite(res.argmax) & np.isfinite(res.values) & (res.values > 0)
        assert np.all(np.diff(res.argmax[fin]) >= -1e-6 * res.argmax[fin][1:])


def test_pointwise_wrapper():
    g = PointwiseOminus(Power(2), Power(3))
    assert g(1.0) == pytest.approx(FOUR_27)
    gt = PointwiseOminus(Power(2), Power(3), truncation=0.5)
    assert gt.evaluate(1.0) == pytest.approx(0.125)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(1.0, 3.0), dq=st.floats(0.2, 3.0), u=st.floats(1e-2, 1e2))
def test_power_family_property(p, dq, u):
    q = p + dq
    got, _ = ominus_at(Power(p), Power(q), u)
    want, _ = power_conjugate(p, q, u)
    assert got == pytest.approx(want, rel=1e-9)
