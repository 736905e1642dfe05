import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenrelax.errors import NotPositive
from degenrelax.functions import PiecewiseFunction, Poly, Weight
from degenrelax.muckenhoupt import (a1_constant, baldi_poincare_check, baldi_tv, local_growth_check,
                                    lsc_envelope, maximal_weight, maximal_weight_function)


def W(f):
    return Weight(f)


def test_a1_unit_weight_exact():
    rep = a1_constant(W(PiecewiseFunction.constant(0, 1, 1.0)), (0, 1))
    assert rep.best_c == 1.0 and rep.violating_ball is None


def test_a1_affine_weight():
    rep = a1_constant(W(PiecewiseFunction.polynomial(0, 1, [2, -1])), (0, 1))
    assert rep.best_c >= 1 - 1e-8


def test_a1_quadratic_closed_form():
    w = W(PiecewiseFunction.polynomial(1, 2, [0, 0, 1]))
    rep = a1_constant(w, (1, 2))
    x, r, ratio = np.array(rep.table).T
    assert np.allclose(ratio, x**2 / (x**2 + r**2 / 3), rtol=1e-10)
    assert 0.5 < rep.best_c < 1


def test_a1_rejects_zeros():
    with pytest.raises(NotPositive):
        a1_constant(W(PiecewiseFunction.polynomial(-1, 1, [0, 0, 1])), (-1, 1))


def test_maximal_weight_examples():
    assert maximal_weight(W(PiecewiseFunction.constant(0, 1, 1.0)), 0.3) == pytest.approx(1.0)
    assert maximal_weight(W(PiecewiseFunction.polynomial(0, 1, [2, -1])), 0.5) == pytest.approx(1.5)
    sq = W(PiecewiseFunction.polynomial(0, 1, [0, 0, 1]))
    assert maximal_weight(sq, 0.0) == pytest.approx(0.5 ** 2 / 3)


def test_maximal_weight_keeps_a1_constant():
    w = W(PiecewiseFunction.polynomial(1, 2, [0, 0, 1]))
    wt = maximal_weight_function(w, 201, inside_only=True)
    assert a1_constant(wt, (1, 2)).best_c >= a1_constant(w, (1, 2)).best_c - 1e-3


def test_envelope_continuous_and_step():
    w = W(PiecewiseFunction.polynomial(0, 1, [1, 1]))
    env = lsc_envelope(w, 101)
    assert np.allclose(env.values, w(env.xs))
    step = W(PiecewiseFunction([0, 0.5, 1], [Poly([1.0]), Poly([2.0])]))
    env = lsc_envelope(step, 101)
    assert env.values[np.searchsorted(env.xs, 0.5)] == 1.0
    assert np.all(env.values <= step(env.xs))


def test_envelope_flags_isolated_dip():
    xs = np.linspace(0, 1, 11)
    ys = np.ones(11)
    ys[5] = 0.0
    w = W(PiecewiseFunction.from_samples(xs, ys))
    env = lsc_envelope(w, xs)
    assert env.dips == (0.5,)
    assert env.values[5] == 0.0


def test_baldi_tv_examples():
    unit = W(PiecewiseFunction.constant(0, 1, 1.0))
    assert baldi_tv(unit, PiecewiseFunction.constant(0, 1, 4.0)) == 0.0
    chi = PiecewiseFunction([0, 0.5, 1], [Poly([1.0]), Poly([0.0])])
    assert baldi_tv(W(PiecewiseFunction.polynomial(0, 1, [1, 1])), chi) == pytest.approx(1.5)
    zig = PiecewiseFunction.from_samples([0, 0.3, 0.6, 1], [0, 1, -1, 0.5])
    assert baldi_tv(unit, zig) == pytest.approx(1 + 2 + 1.5, abs=1e-14)


def test_local_growth_examples():
    unit = W(PiecewiseFunction.constant(-1, 1, 1.0))
    assert local_growth_check(unit, 2, pairs=[(0.0, 0.1, 0.2)]).best_c == pytest.approx(2.0)
    assert local_growth_check(unit, 2, pairs=[(0.0, 0.2, 0.2)]).best_c == pytest.approx(1.0)
    rep = local_growth_check(unit, 2)
    assert not rep.passed
    assert rep.refinements[1] > 5 * rep.refinements[0]


def test_baldi_poincare_examples():
    unit = W(PiecewiseFunction.constant(-1, 1, 1.0))
    r = baldi_poincare_check(unit, PiecewiseFunction.polynomial(-1, 1, [0, 1]), (0.0, 1.0))
    assert r.lhs == pytest.approx(1 / math.sqrt(3)) and r.tv == pytest.approx(2.0)
    c = baldi_poincare_check(unit, PiecewiseFunction.constant(-1, 1, 3.0), (0.0, 1.0))
    assert c.lhs == pytest.approx(0.0, abs=1e-12)


def test_baldi_poincare_ratio_stable_for_affine_weight():
    w = W(PiecewiseFunction.polynomial(0, 4, [1, 0.5]))
    u = PiecewiseFunction.polynomial(0, 4, [0, 1, 0.3])
    ratios = [baldi_poincare_check(w, u, (2.0, r)).ratio for r in (0.25, 0.5, 1.0)]
    assert max(ratios) / min(ratios) < 2


slopes = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=6)


@settings(max_examples=60, deadline=None)
@given(slopes, st.floats(0.5, 4.0))
def test_baldi_tv_classical_and_monotone(vals, lift):
    xs = np.linspace(0, 1, len(vals))
    u = PiecewiseFunction.from_samples(xs, vals)
    unit = W(PiecewiseFunction.constant(0, 1, 1.0))
    classical = float(np.sum(np.abs(np.diff(vals))))
    assert baldi_tv(unit, u) == pytest.approx(classical, rel=1e-12, abs=1e-12)
    heavier = W(PiecewiseFunction.polynomial(0, 1, [1.0, lift]))
    assert baldi_tv(heavier, u) >= baldi_tv(unit, u) - 1e-12
