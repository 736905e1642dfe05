"""Precise representatives, the pairing (w, Du), and membership in Dom_w."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .degeneracy import DegeneracyDecomposition
from .errors import MissingDerivative, NonIntegrable
from .functions import (DEFAULT_QUADRATURE, Interval, PiecewiseFunction, Poly, QuadratureConfig, Quad,
                        Weight, as_interval, half_value, integrate, integrate_function)
from .hat import HatWeight


@dataclass(frozen=True)
class PreciseValue:
    x: float
    u_minus: float
    u_plus: float
    u_half: float


@dataclass(frozen=True)
class PairingReport:
    test_value: float
    tv: float
    quadrature_error: float
    jump_in_support: bool = False


@dataclass(frozen=True)
class DomMembership:
    in_w11_loc: bool
    pairing_tv_finite: bool
    verdict: bool
    norm: float | None
    reasons: tuple = field(default_factory=tuple)


def precise_representative(u: PiecewiseFunction, x: float) -> PreciseValue:
    left, right = u.limits(x)
    sides = [v for v in (left, right) if not math.isnan(v)]
    lo, hi = min(sides), max(sides)
    return PreciseValue(float(x), lo, hi, half_value(left, right))


def support(phi: PiecewiseFunction) -> Interval:
    """Smallest closed interval outside which phi vanishes identically."""
    cells = phi.cells
    nz = [k for k, (_, _, p) in enumerate(cells) if not (isinstance(p, Poly) and p.is_zero())]
    if not nz:
        return phi.domain
    return Interval(cells[nz[0]][0], cells[nz[-1]][1])


def _require_derivative(w: Weight) -> PiecewiseFunction:
    if w.derivative_density is None:
        raise MissingDerivative("the pairing needs the derivative density of w")
    return w.derivative_density


def _pairing_terms(w, u, phi, q):
    dw = _require_derivative(w)
    S = support(phi)
    # u and its precise representative differ on a null set only, and Dw has no singular part
    t1 = integrate(u * phi, dw, S, q)
    t2 = integrate(u * phi.derivative(), w.f, S, q)
    return t1, t2, S


def pairing_apply(w: Weight, u: PiecewiseFunction, phi: PiecewiseFunction,
                  q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """<(w, Du), phi> = -int u^(1/2) phi w' - int u phi' w."""
    t1, t2, _ = _pairing_terms(w, u, phi, q)
    return -t1.value - t2.value


def pairing_measure_action(w: Weight, u: PiecewiseFunction, phi: PiecewiseFunction,
                           q: QuadratureConfig = DEFAULT_QUADRATURE) -> Quad:
    """int phi d(w, Du) for piecewise-C1 u: absolutely continuous part plus jump atoms."""
    S = support(phi)
    r = integrate(u.derivative() * phi, w.f, S, q)
    atoms = sum(float(w.f(x)) * (right - left) * float(phi(x))
                for x, left, right in u.jumps() if S.lo < x < S.hi)
    return Quad(r.value + atoms, r.error)


def ibp_defect(w: Weight, u: PiecewiseFunction, phi: PiecewiseFunction, q: QuadratureConfig) -> float:
    """|int phi d(w,Du) + int u phi' w + int u^(1/2) phi w'|, every integral by the rule in q."""
    qn = q.numeric()
    t1, t2, _ = _pairing_terms(w, u, phi, qn)
    m = pairing_measure_action(w, u, phi, qn)
    return abs(m.value + t2.value + t1.value)


def _tv_quad(w: Weight, u: PiecewiseFunction, I, q) -> Quad:
    I = as_interval(I)
    r = integrate(abs(u.derivative()), w.f, I, q)
    atoms = sum(float(w.f(x)) * abs(right - left) for x, left, right in u.jumps() if I.lo < x < I.hi)
    return Quad(r.value + atoms, r.error)


def pairing_total_variation(w: Weight, u: PiecewiseFunction, I=None,
                            q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """|(w, Du)|(I) = int_I |u'| w (plus w-weighted jumps when u has any)."""
    return _tv_quad(w, u, w.domain if I is None else I, q).value


def pairing_report(w: Weight, u: PiecewiseFunction, phi: PiecewiseFunction,
                   q: QuadratureConfig = DEFAULT_QUADRATURE) -> PairingReport:
    t1, t2, S = _pairing_terms(w, u, phi, q)
    tv = _tv_quad(w, u, S, q)
    jump = any(S.lo < x < S.hi for x, _, _ in u.jumps())
    return PairingReport(-t1.value - t2.value, tv.value, t1.error + t2.error + tv.error, jump)


def _shrunk_compacts(I: Interval):
    for frac in (1 / 8, 1e-2, 1e-3):
        d = frac * I.length
        yield Interval(I.lo + d, I.hi - d)


def dom_w_membership(w: Weight, u: PiecewiseFunction, dec: DegeneracyDecomposition, hw: HatWeight,
                     q: QuadratureConfig = DEFAULT_QUADRATURE) -> DomMembership:
    reasons = []
    in_w11 = True
    for x, left, right in u.jumps():
        if dec.index_of(x) is not None:
            in_w11 = False
            reasons.append(f"jump of u at {x:.17g}")
    for x in u.breakpoints:
        if dec.index_of(x) is not None and not all(math.isfinite(v) for v in u.limits(x)):
            in_w11 = False
            reasons.append(f"u unbounded at {x:.17g}")
    try:
        u.derivative()
    except MissingDerivative:
        in_w11 = False
        reasons.append("u has no derivative")
    tv_finite = in_w11
    if in_w11:
        try:
            for I in dec.intervals:
                for K in _shrunk_compacts(I):
                    _tv_quad(w, u, K, q)
        except NonIntegrable as exc:
            tv_finite = False
            reasons.append(f"local pairing variation diverges: {exc}")
    verdict = in_w11 and tv_finite
    norm = dom_w_norm(w, u, dec, hw, q) if verdict else None
    return DomMembership(in_w11, tv_finite, verdict, norm, tuple(reasons))


def dom_w_norm(w: Weight, u: PiecewiseFunction, dec: DegeneracyDecomposition, hw: HatWeight,
               q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """||u||_{L1(I, ŵ)} + |(w, Du)|(I); +inf when either global integral diverges."""
    total = 0.0
    au = abs(u)
    hf = hw.as_function()
    for I in dec.intervals:
        try:
            total += integrate(au, hf, I, q).value
            total += _tv_quad(w, u, I, q).value
        except NonIntegrable:
            return math.inf
    return total
