import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz.extended import INF
from orlicz.measure import (
    Kind,
    MeasureSpace,
    PartitionError,
    SimpleFunction,
    charfn_norm,
    check_norm_modular,
    dump_table,
    load_table,
    luxemburg_norm,
    luxemburg_norms,
    make_space,
    modular,
    plan_partition,
    threshold_measure,
)
from orlicz.young import CutOff, ExpMinusOne, Identity, LinearAboveKnee, Power

UNIT = make_space("finite", 64)
FUNCS = [Power(2), Power(3), Power(1.5, 2.0), Identity(), ExpMinusOne(), LinearAboveKnee(1.0), CutOff(Power(2), 1.0)]


def half_indicator(value=1.0):
    return SimpleFunction.indicator(range(32), 64, value)


class TestSpaces:
    def test_defaults(self):
        assert UNIT.total == pytest.approx(1.0) and UNIT.n_cells == 64
        inf = make_space("infinite", 8)
        assert inf.total == INF and inf.kind is Kind.SIGMA_FINITE_INFINITE

    def test_extend_and_refine(self):
        inf = make_space("infinite", 4)
        assert inf.extend(3).n_cells == 7
        with pytest.raises(ValueError):
            UNIT.extend(1)
        r = UNIT.refine(4)
        assert r.n_cells == 256 and r.total == pytest.approx(1.0)

    def test_rejects_bad_cells(self):
        with pytest.raises(ValueError):
            MeasureSpace(np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            SimpleFunction(np.array([1.0, np.inf]))
        with pytest.raises(ValueError):
            SimpleFunction.from_levels([(70, 1.0)], 64)

    def test_levels(self):
        x = SimpleFunction.from_levels([(3, 2.0), (5, 1.0)], 8)
        assert x.levels == [(3, 2.0), (5, 1.0)]
        assert (x * 2).levels == [(3, 4.0), (5, 2.0)]


class TestModular:
    def test_examples(self):
        assert modular(Power(2), half_indicator(2.0), UNIT) == pytest.approx(2.0)
        assert modular(Identity(), SimpleFunction(np.ones(64)), UNIT) == pytest.approx(1.0)
        assert modular(CutOff(Power(2), 1.0), half_indicator(2.0), UNIT) == INF

    def test_zero(self):
        assert modular(CutOff(Power(2), 1.0), SimpleFunction.zero(64), UNIT) == 0.0


class TestNorm:
    def test_examples(self):
        quarter = SimpleFunction.indicator(range(16), 64)
        assert luxemburg_norm(Power(2), quarter, UNIT) == pytest.approx(0.5, rel=1e-9)
        assert luxemburg_norm(Power(2), half_indicator(2.0), UNIT) == pytest.approx(math.sqrt(2), rel=1e-9)

    def test_l1(self):
        rng = np.random.default_rng(3)
        x = SimpleFunction(rng.uniform(0, 5, 64))
        assert luxemburg_norm(Identity(), x, UNIT) == pytest.approx(np.sum(x.values) / 64, rel=1e-9)

    def test_zero(self):
        assert luxemburg_norm(Power(2), SimpleFunction.zero(64), UNIT) == 0.0

    def test_linfty_generator_gives_sup_norm(self):
        from orlicz.young import linfty_generator

        rng = np.random.default_rng(4)
        x = SimpleFunction(rng.uniform(0, 5, 64))
        assert luxemburg_norm(linfty_generator(1.0), x, UNIT) == pytest.approx(x.values.max(), rel=1e-9)

    def test_bracket_certificate(self):
        x = half_indicator(3.0)
        hi = luxemburg_norm(ExpMinusOne(), x, UNIT)
        lo = luxemburg_norm(ExpMinusOne(), x, UNIT, lower=True)
        assert lo <= hi <= lo * (1 + 2e-10)
        assert modular(ExpMinusOne(), x * (1 / hi), UNIT) <= 1.0
        assert modular(ExpMinusOne(), x * (1 / lo), UNIT) > 1.0

    def test_batched_matches_single(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(0, 3, (10, 64))
        batch = luxemburg_norms(Power(3), X, UNIT.measures)
        single = [luxemburg_norm(Power(3), SimpleFunction(r), UNIT) for r in X]
        np.testing.assert_allclose(batch, single, rtol=1e-15)

    @pytest.mark.parametrize("phi", FUNCS, ids=repr)
    def test_charfn_matches_norm(self, phi):
        for k in [1, 7, 32, 64]:
            x = SimpleFunction.indicator(range(k), 64)
            assert luxemburg_norm(phi, x, UNIT) == pytest.approx(charfn_norm(phi, k / 64), rel=1e-8)

    def test_charfn_examples(self):
        assert charfn_norm(Power(2), 0.25) == pytest.approx(0.5)
        assert charfn_norm(Identity(), 2.0) == pytest.approx(2.0)
        assert all(charfn_norm(CutOff(Power(2), 1.0), t) >= 1.0 for t in [1e-3, 1e-6, 1e-9])


class TestNormModular:
    def test_examples(self):
        one = SimpleFunction(np.ones(64))
        r = check_norm_modular(Power(2), one, UNIT)
        assert r.holds and r.norm == pytest.approx(1.0) and r.modular == pytest.approx(1.0)
        r = check_norm_modular(Power(2), one * 0.5, UNIT)
        assert r.holds and r.norm == pytest.approx(0.5) and r.modular == pytest.approx(0.25)
        r = check_norm_modular(Power(2), one * 3.0, UNIT)
        assert r.holds and r.norm > 1


class TestPartition:
    def test_power(self):
        plan = plan_partition(Power(2), UNIT, 2.0)
        assert plan.t_a == pytest.approx(0.25, rel=1e-12)
        assert len(plan.groups) == 4
        np.testing.assert_allclose(plan.group_measures(UNIT), 0.25)

    def test_identity(self):
        plan = plan_partition(Identity(), UNIT, 1.0)
        assert plan.t_a == pytest.approx(1.0) and len(plan.groups) == 1

    def test_closed_form_threshold(self):
        # t_a = 1 / phi1(a) when phi1 is continuous and increasing
        for phi1, a in [(Power(3), 2.0), (ExpMinusOne(), 3.0), (Power(1.5, 2.0), 4.0)]:
            assert threshold_measure(phi1, 1 / a) == pytest.approx(1 / float(phi1.evaluate(a)), rel=1e-12)

    def test_finite_b_unreachable_bound(self):
        with pytest.raises(PartitionError, match="achievable bound is 1"):
            plan_partition(CutOff(Power(2), 1.0), UNIT, 2.0)

    def test_finite_b_reachable_bound(self):
        plan = plan_partition(CutOff(Power(2), 2.0), UNIT, 1.0)
        assert all(m <= plan.t_a * (1 + 1e-12) for m in plan.group_measures(UNIT))

    def test_coarse_cells_rejected(self):
        with pytest.raises(PartitionError, match="refine"):
            plan_partition(Power(2), make_space("finite", 2), 4.0)


def test_table_round_trip():
    rng = np.random.default_rng(0)
    sp = make_space("finite", 5, cell_measure=rng.uniform(0.1, 1, 5))
    x = SimpleFunction(rng.uniform(0, 2, 5))
    sp2, x2 = load_table(dump_table(sp, x))
    np.testing.assert_array_equal(sp2.measures, sp.measures)
    np.testing.assert_array_equal(x2.values, x.values)
    with pytest.raises(ValueError):
        load_table("cell_id,measure,value\n0,1,1\n2,1,1\n")


# --- properties ------------------------------------------------------------

_vals = st.lists(st.floats(0.0, 50.0), min_size=64, max_size=64).map(np.array)


@settings(max_examples=60, deadline=None)
@given(_vals, st.sampled_from(FUNCS), st.sampled_from([0.5, 2.0, 10.0]))
def test_homogeneity(v, phi, c):
    x = SimpleFunction(v)
    n = luxemburg_norm(phi, x, UNIT)
    nc = luxemburg_norm(phi, x * c, UNIT)
    if math.isinf(n):
        assert math.isinf(nc)
    else:
        assert nc == pytest.approx(c * n, rel=1e-9, abs=0)


@settings(max_examples=60, deadline=None)
@given(_vals, st.lists(st.floats(0.0, 1.0), min_size=64, max_size=64).map(np.array), st.sampled_from(FUNCS))
def test_ideal_property(v, shrink, phi):
    y = SimpleFunction(v)
    x = SimpleFunction(v * shrink)
    assert luxemburg_norm(phi, x, UNIT) <= luxemburg_norm(phi, y, UNIT) * (1 + 1e-10)


@settings(max_examples=40, deadline=None)
@given(_vals, st.sampled_from(FUNCS))
def test_fatou_increasing_sequence(v, phi):
    x = SimpleFunction(v)
    target = luxemburg_norm(phi, x, UNIT)
    seq = [luxemburg_norm(phi, SimpleFunction(np.minimum(v, k) * (1 - 2.0**-k)), UNIT) for k in range(1, 60)]
    assert all(b >= a * (1 - 1e-10) for a, b in zip(seq, seq[1:]))
    assert seq[-1] <= target * (1 + 1e-10)
    assert seq[-1] == pytest.approx(target, rel=1e-9)
