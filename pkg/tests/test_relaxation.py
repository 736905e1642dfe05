import math

import numpy as np
import pytest

from degenrelax.degeneracy import detect_intervals
from degenrelax.errors import (BadParameters, ConvergenceNotEstablished, HNotAdmissible, HypothesisViolated,
                               OutOfDomain)
from degenrelax.functions import OnePlusSinInv, PiecewiseFunction, Poly, Power, Sine, Weight
from degenrelax.hat import build_hat
from degenrelax.relaxation import (BarWeight, build_primitive, build_recovery, compactness_demo,
                                   counterexample_diagnostics, counterexample_weight, energy, lsc_probe,
                                   mollify_derivative, recovery_schedule, relaxed_functional)


def test_relaxed_value_identity(quartic_setup, identity):
    w, dec, hw = quartic_setup
    r = relaxed_functional(w, identity, dec, hw)
    assert r.finite and r.value == pytest.approx(92 / 15, abs=1e-12)


def test_relaxed_value_infinite_on_jump(quartic_setup):
    w, dec, hw = quartic_setup
    heav = PiecewiseFunction([-2, 0.1, 2], [Poly([0.0]), Poly([1.0])])
    r = relaxed_functional(w, heav, dec, hw)
    assert not r.finite and r.value is None


def test_relaxed_value_constant(quartic_setup):
    w, dec, hw = quartic_setup
    assert relaxed_functional(w, PiecewiseFunction.constant(-2, 2, 7.0), dec, hw).value == 0.0


def test_relaxation_keeps_ac_energy(quartic_setup):
    w, dec, hw = quartic_setup
    u = PiecewiseFunction.polynomial(-2, 2, [0.3, -1, 0.2, 0.4])
    assert relaxed_functional(w, u, dec, hw).value == pytest.approx(energy(w, u), abs=1e-12)


def test_truncated_decomposition_rejected():
    w = Weight(PiecewiseFunction.single(0, 1, OnePlusSinInv()))
    dec = detect_intervals(w, max_intervals=8)
    hw = build_hat(w, dec)
    with pytest.raises(HypothesisViolated):
        relaxed_functional(w, PiecewiseFunction.polynomial(0, 1, [0, 1]), dec, hw)


def test_mollified_derivative_meets_schedule(quartic_setup, identity):
    w, dec, _ = quartic_setup
    for h in (8, 32):
        m = mollify_derivative(w, identity, dec, h)
        assert m.l1_error <= 1 / h
        assert float(m.v(-2.0)) == 0.0 and float(m.v(0.0)) == pytest.approx(1.0)


def test_primitive_exact_and_trivial_cases(identity):
    I = (-1.0, 1.0)
    zero = PiecewiseFunction.constant(-2, 2, 0.0)
    flat = build_primitive(identity, zero, I)
    assert float(flat(0.7)) == pytest.approx(0.0)
    same = build_primitive(identity, identity.derivative(), I)
    assert np.allclose(same(np.linspace(-1, 1, 9)), np.linspace(-1, 1, 9), atol=1e-14)


def test_bar_weight_unit():
    w = Weight(PiecewiseFunction.constant(0, 1, 1.0))
    dec = detect_intervals(w)
    bw = BarWeight(build_hat(w, dec), 0)
    h = 16
    assert bw(1 - 1 / h) == pytest.approx(1 / h - 0.5)
    assert bw.abs(1 - 1 / h) == pytest.approx(0.5 - 1 / h)
    assert bw.derivative(0.9) == -1.0
    with pytest.raises(OutOfDomain):
        bw(0.5)


def test_bar_weight_derivative_matches_finite_difference(quartic_setup):
    _, _, hw = quartic_setup
    bw = BarWeight(hw, 1)
    for x in (0.8, 0.9, 0.95):
        fd = (bw(x + 1e-6) - bw(x - 1e-6)) / 2e-6
        assert fd == pytest.approx(bw.derivative(x), abs=1e-6)


def test_recovery_identity_schedule(quartic_setup, identity):
    w, dec, hw = quartic_setup
    steps = recovery_schedule(w, hw, dec, identity)
    l1 = [s.l1_hat_error for s in steps]
    gaps = [s.energy_gap for s in steps]
    assert all(b <= a for a, b in zip(l1, l1[1:]))
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-2 * (1 + 92 / 15)
    for s in steps:
        assert max(s.midpoint_errors) <= 1e-14
        assert not s.u_h.jumps(1e-10)
    terms = [s.collar_term for s in steps]
    assert all(b <= a for a, b in zip(terms, terms[1:]))


def test_recovery_separated_intervals_uses_bridges():
    w = Weight(PiecewiseFunction([0, 1, 2, 3], [Poly([1.0]), Poly([0.0]), Poly([1.0])]))
    dec = detect_intervals(w)
    hw = build_hat(w, dec)
    u = PiecewiseFunction.polynomial(0, 3, [0, 1])
    s = build_recovery(w, hw, dec, u, 16)
    assert not s.u_h.jumps(1e-10)
    assert float(s.u_h(1.5)) == pytest.approx(0.5 * (float(s.u_h(1.0)) + float(s.u_h(2.0))))


def test_recovery_guard(quartic_setup, identity):
    w, dec, hw = quartic_setup
    with pytest.raises(HNotAdmissible):
        build_recovery(w, hw, dec, identity, 4)


def test_lsc_probe_on_recovery_and_constant_family(quartic_setup, identity):
    w, dec, hw = quartic_setup
    fam = [s.u_h for s in recovery_schedule(w, hw, dec, identity)]
    rep = lsc_probe(w, hw, dec, fam, identity)
    assert rep.passed and rep.tail_min >= 92 / 15 - 1e-6
    assert lsc_probe(w, hw, dec, [identity] * 3, identity).passed


def test_lsc_probe_oscillating_family(quartic_setup, identity):
    w, dec, hw = quartic_setup
    ks = (10, 40, 160, 640)
    fam = [identity + PiecewiseFunction.single(-2, 2, Sine(1.0 / k, k, 0.0)) for k in ks]
    # int cos(kx) w dx is bounded by 2 w(2) / k + O(1/k^2); the tail starts at k = 160
    rep = lsc_probe(w, hw, dec, fam, identity, tol=20.0 / 160)
    assert rep.passed


def test_lsc_probe_rejects_nonconvergent_family(quartic_setup, identity):
    w, dec, hw = quartic_setup
    fam = [identity + c for c in (1.0, 1.0, 1.0, 1.0)]
    with pytest.raises(ConvergenceNotEstablished):
        lsc_probe(w, hw, dec, fam, identity)


def test_compactness_demo(quartic_setup, identity):
    w, dec, hw = quartic_setup
    fam = [identity + 1.0 / k for k in range(1, 6)]
    rep = compactness_demo(w, hw, dec, fam)
    assert rep.cauchy
    # K is the middle half of (-2, -1), where ŵ is the constant w(-1.25)
    mass = 0.5 * (1 - 1.25 ** 2) ** 2
    assert rep.distances[0][1] == pytest.approx(0.5 * mass, rel=1e-9)
    with pytest.raises(HypothesisViolated):
        compactness_demo(w, hw, dec, [PiecewiseFunction.constant(-2, 2, 10.0 ** k) for k in range(4)])


def test_counterexample_weight_shape():
    w = counterexample_weight(2.0, 0.5, 3)
    assert float(w(0.75)) == pytest.approx(9 / 16)
    left = [c for c in w.f.cells if c[1] <= 1.0]
    assert len(left) == 7
    xs = np.linspace(0, 2, 2001)
    xs = xs[~np.isin(np.round(xs, 12), np.round(w.f.breakpoints, 12))]
    assert np.max(w(xs)) <= 1.0
    assert np.allclose(w(xs), w(2 - xs))
    with pytest.raises(BadParameters):
        counterexample_weight(0.5, 0.5, 3)
    with pytest.raises(BadParameters):
        counterexample_weight(2.0, 1.5, 3)


def test_counterexample_diagnostics_small():
    d = counterexample_diagnostics(2.0, 0.5, [10, 20, 40])
    assert all(b > a for a, b in zip(d.S_uw, d.S_uw[1:]))
    assert abs(d.S_uhat[-1] - d.S_uhat[-2]) < 1e-3
    assert max(d.tv_K) - min(d.tv_K) < 1e-4 * d.tv_K[0]


def test_block_weight_violates_sobolev_hypothesis(block_setup):
    w, dec, hw = block_setup
    u = PiecewiseFunction.single(0, 2, Power(1.0, -3.0, 0.0, 1))
    with pytest.raises(HypothesisViolated):
        relaxed_functional(w, u, dec, hw)
    with pytest.raises(HypothesisViolated):
        build_recovery(w, hw, dec, u, 64)
