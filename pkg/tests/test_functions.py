import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenrelax.errors import MissingDerivative, NonIntegrable, OutOfDomain, SpecParseError
from degenrelax.functions import (DEFAULT_QUADRATURE, Interval, OnePlusSinInv, PiecewiseFunction, Poly, Power,
                                  QuadratureConfig, Weight, essential_inf, ess_sup_reciprocal, function_from_spec,
                                  half_value, integrate, integrate_function, one_sided_limits,
                                  total_variation_measure, weight_from_spec)


def step(lo=0.0, mid=1.0, hi=2.0, a=0.0, b=1.0):
    return PiecewiseFunction([lo, mid, hi], [Poly([a]), Poly([b])])


def test_interval_basics():
    I = Interval(-1, 3)
    assert I.length == 4.0 and I.mid == 1.0
    assert I.contains(Interval(0, 1)) and not I.contains(Interval(2, 4))
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_point_value_convention_at_breakpoint():
    f = step()
    assert f(1.0) == 1.0
    assert f.limits(1.0) == (0.0, 1.0)
    assert f.half(1.0) == 0.5
    assert f.jumps() == [(1.0, 0.0, 1.0)]


def test_out_of_domain_raises():
    f = step()
    with pytest.raises(OutOfDomain):
        f.piece_index(2.5)


def test_vectorized_evaluation_matches_scalar():
    f = PiecewiseFunction.polynomial(-2, 2, [1, 0, -2, 0, 1])
    xs = np.linspace(-2, 2, 9)
    assert np.allclose(f(xs), [float(f(x)) for x in xs])


def test_derivative_and_antiderivative():
    f = PiecewiseFunction.polynomial(0, 1, [0, 0, 3])
    assert float(f.derivative()(0.5)) == pytest.approx(3.0)
    F = f.antiderivative()
    assert float(F(1.0) - F(0.0)) == pytest.approx(1.0, abs=1e-14)


def test_antiderivative_is_continuous_across_breaks():
    f = step(a=1.0, b=2.0)
    F = f.antiderivative()
    left, right = F.limits(1.0)
    assert left == pytest.approx(right, abs=1e-14)
    assert float(F(2.0) - F(0.0)) == pytest.approx(3.0, abs=1e-14)


def test_missing_derivative_for_expression_piece():
    from degenrelax.functions import Expr
    f = PiecewiseFunction.single(0, 1, Expr(np.exp, None, "exp"))
    with pytest.raises(MissingDerivative):
        f.derivative()


def test_arithmetic_and_abs():
    f = PiecewiseFunction.polynomial(-1, 1, [0, 1])
    g = abs(f) * 2 - 1
    assert float(g(-0.5)) == pytest.approx(0.0)
    assert float(g(0.75)) == pytest.approx(0.5)


def test_power_piece_limits():
    p = Power(1.0, -0.5, 0.0, 1)
    assert math.isinf(p.limit(0.0))
    assert p.limit(4.0) == pytest.approx(0.5)


def test_one_plus_sin_inv_zeros_listed_from_right():
    p = OnePlusSinInv()
    segs, truncated = p.zeros(0.0, 1.0, 5)
    pts = sorted(s[0] for s in segs if s[0] > 0)[-5:]
    expect = sorted(1 / (math.pi * (1.5 + 2 * i)) for i in range(5))
    assert np.allclose(pts, expect, atol=1e-12)
    assert truncated


def test_exact_polynomial_integral():
    f = PiecewiseFunction.polynomial(-2, 2, [1, 0, -2, 0, 1])
    r = integrate_function(f, (-2, 2))
    assert r.value == pytest.approx(4 - 32 / 3 + 64 / 5, abs=1e-12)


def test_integrable_singularity_and_divergence():
    f = PiecewiseFunction.single(0, 1, Power(1.0, -0.5, 0.0, 1))
    assert integrate_function(f, (0, 1)).value == pytest.approx(2.0, abs=1e-12)
    numeric = DEFAULT_QUADRATURE.numeric()
    assert integrate_function(f, (0, 1), numeric).value == pytest.approx(2.0, rel=1e-3)
    g = PiecewiseFunction.single(0, 1, Power(1.0, -1.5, 0.0, 1))
    with pytest.raises(NonIntegrable):
        integrate_function(g, (0, 1))
    with pytest.raises(NonIntegrable):
        integrate_function(g, (0, 1), numeric)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rule="gauss")
    with pytest.raises(ValueError):
        QuadratureConfig(panels=0)
    assert QuadratureConfig().refined().panels == 128


def test_weight_rejects_negative_values():
    with pytest.raises(ValueError):
        Weight(PiecewiseFunction.polynomial(-1, 1, [0, 1]))


def test_essential_inf_and_reciprocal():
    w = Weight(PiecewiseFunction.polynomial(-2, 2, [1, 0, -2, 0, 1]))
    assert essential_inf(w, (1.5, 2.0)) == pytest.approx(1.5625)
    assert ess_sup_reciprocal(w, (-1.5, -1.1)) == pytest.approx(1 / 0.21 ** 2 * 1.0, rel=1e-6)
    assert math.isinf(ess_sup_reciprocal(w, (-1.5, 0.0)))


def test_one_sided_limits_of_weight():
    w = Weight(step(a=2.0, b=3.0))
    assert one_sided_limits(w.f, 1.0) == (2.0, 3.0)


def test_total_variation_measure():
    w = Weight(PiecewiseFunction.polynomial(-2, 2, [1, 0, -2, 0, 1]))
    # |w'| integrates to the total rise and fall: 9 + 1 + 1 + 9
    assert total_variation_measure(w, (-2, 2)) == pytest.approx(20.0, abs=1e-10)


def test_half_value():
    assert half_value(1.0, 3.0) == 2.0
    assert half_value(-math.inf, math.inf) == 0.0
    assert half_value(math.nan, 4.0) == 4.0


def test_spec_round_trip_and_errors():
    doc = {"domain": [0, 1], "pieces": [{"range": [0, 0.5], "kind": "constant", "params": {"value": 1}},
                                        {"range": [0.5, 1], "kind": "poly", "params": {"coeffs": [0, 2]}}]}
    f = function_from_spec(doc)
    assert float(f(0.75)) == pytest.approx(1.5)
    with pytest.raises(SpecParseError):
        function_from_spec({"domain": [0, 1], "pieces": [{"range": [0, 0.4], "kind": "constant",
                                                          "params": {"value": 1}}]})
    with pytest.raises(SpecParseError):
        function_from_spec({"domain": [0, 1], "pieces": [{"range": [0, 1], "kind": "bogus"}]})
    with pytest.raises(SpecParseError):
        weight_from_spec({"domain": [0, 1], "pieces": [{"range": [0, 1], "kind": "poly",
                                                        "params": {"coeffs": [-1]}}]})


def test_samples_spec_marks_sampled():
    f = function_from_spec({"domain": [0, 1], "pieces": [
        {"range": [0, 1], "kind": "samples", "params": {"x": [0, 0.5, 1], "y": [1, 0, 1]}}]})
    assert f.sampled
    assert float(f(0.25)) == pytest.approx(0.5)


coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(coeffs, st.floats(-1, 0.9), st.floats(0.05, 1.0))
def test_additivity_of_integral(c, a, width):
    f = PiecewiseFunction.polynomial(-1, 2, c)
    m = a + width / 2
    b = a + width
    whole = integrate_function(f, (a, b)).value
    parts = integrate_function(f, (a, m)).value + integrate_function(f, (m, b)).value
    assert whole == pytest.approx(parts, abs=1e-10 * (1 + abs(whole)))


@settings(max_examples=60, deadline=None)
@given(coeffs, coeffs)
def test_product_integral_matches_exact_primitive(c1, c2):
    f = PiecewiseFunction.polynomial(0, 1, c1)
    g = PiecewiseFunction.polynomial(0, 1, c2)
    exact = float((np.polynomial.Polynomial(c1) * np.polynomial.Polynomial(c2)).integ()(1.0))
    assert integrate(f, g, (0, 1)).value == pytest.approx(exact, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(coeffs)
def test_fundamental_theorem(c):
    f = PiecewiseFunction.polynomial(-1, 1, c)
    F = f.antiderivative()
    xs = np.linspace(-1, 1, 7)
    dF = F.derivative()
    assert np.allclose(dF(xs), f(xs), atol=1e-10)


def test_products_stay_accurate_on_narrow_cells():
    narrow = np.polynomial.Polynomial([0.0, 1.0], domain=[-1.0005, -1.0], window=[0.0, 1.0])
    f = PiecewiseFunction([-1.0005, -1.0], [Poly((narrow - 1) ** 6)])
    g = PiecewiseFunction([-1.0005, -1.0], [Poly(np.polynomial.Polynomial([0.0, 1.0], domain=[-2, 0]) ** 6)])
    h = f * g - g * f + f * g
    xs = np.linspace(-1.0005, -1.0, 7)
    ref = (((xs + 1.0005) / 0.0005 - 1) ** 6) * ((xs + 1) ** 6)
    assert np.allclose(h(xs), ref, rtol=1e-9, atol=1e-15)
    assert integrate_function(abs(h), (-1.0005, -1.0)).value >= 0
