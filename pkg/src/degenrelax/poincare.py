"""Pointwise bounds and the double-weight Poincaré inequality on Dom_w."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .degeneracy import DegeneracyDecomposition
from .errors import NonIntegrable, NotInDomain, OrderingViolation
from .functions import DEFAULT_QUADRATURE, PiecewiseFunction, Poly, QuadratureConfig, Weight, integrate
from .hat import HatWeight
from .pairing import dom_w_membership

ABS_FLOOR = 1e-10


@dataclass(frozen=True)
class PoincareReport:
    lhs: float
    rhs: float
    margin: float
    per_interval: tuple
    error: float
    passed: bool


@dataclass(frozen=True)
class BatchReport:
    reports: tuple
    failures: tuple
    passed: bool


def _weighted_variation(w: Weight, u: PiecewiseFunction, lo: float, hi: float, q) -> tuple[float, float]:
    if hi <= lo:
        return 0.0, 0.0
    try:
        r = integrate(abs(u.derivative()), w.f, (lo, hi), q)
    except NonIntegrable:
        return math.inf, 0.0
    return r.value, r.error


def pointwise_bounds(w: Weight, hw: HatWeight, u: PiecewiseFunction, i: int, eta: float, x: float,
                     q: QuadratureConfig = DEFAULT_QUADRATURE) -> dict:
    """Both sides of (b1),(b2) or (b3),(b4), depending on which half holds eta and x."""
    h = hw.part(i)
    ue, ux = float(u.half(eta)), float(u.half(x))
    we = float(hw(eta))
    if h.a < eta <= x <= h.mid:
        var, _ = _weighted_variation(w, u, eta, x, q)
        tail, _ = _weighted_variation(w, u, h.a, x, q)
        return {"b1": (abs(ux - ue) * we, var), "b2": (abs(ue) * we, abs(ux) * we + tail)}
    if h.mid <= x <= eta < h.b:
        var, _ = _weighted_variation(w, u, x, eta, q)
        tail, _ = _weighted_variation(w, u, x, h.b, q)
        return {"b3": (abs(ux - ue) * we, var), "b4": (abs(ue) * we, abs(ux) * we + tail)}
    raise OrderingViolation(
        f"need a < eta <= x <= mid or mid <= x <= eta < b on ({h.a}, {h.b}); got eta={eta}, x={x}")


def sup_bound(w: Weight, hw: HatWeight, u: PiecewiseFunction, i: int, grid: int = 2001,
              q: QuadratureConfig = DEFAULT_QUADRATURE) -> tuple[float, float]:
    """(sup over [mid, b) of |u| ŵ on a grid, |u(mid)| L_i + int_mid^b |u'| w)."""
    h = hw.part(i)
    xs = np.linspace(h.mid, h.b, grid)[:-1]
    lhs = float(np.max(np.abs(u(xs)) * hw(xs)))
    var, _ = _weighted_variation(w, u, h.mid, h.b, q)
    return lhs, abs(float(u(h.mid))) * h.upper_bound + var


def poincare_gap(w: Weight, hw: HatWeight, dec: DegeneracyDecomposition, u: PiecewiseFunction,
                 q: QuadratureConfig = DEFAULT_QUADRATURE) -> PoincareReport:
    mem = dom_w_membership(w, u, dec, hw, q)
    if not mem.verdict:
        raise NotInDomain("; ".join(mem.reasons) or "u is not in Dom_w")
    hf = hw.as_function()
    lhs = rhs = err = 0.0
    rows = []
    for k, h in enumerate(hw.parts):
        dev = abs(u - float(u.half(h.mid)))
        try:
            r = integrate(dev, hf, (h.a, h.b), q)
            li, le = r.value / (h.b - h.a), r.error / (h.b - h.a)
        except NonIntegrable:
            li, le = math.inf, 0.0
        ri, re = _weighted_variation(w, u, h.a, h.b, q)
        rows.append((k, li, ri))
        lhs += li
        rhs += ri
        err += le + re
    margin = math.inf if math.isinf(rhs) else rhs - lhs
    passed = margin >= -(err + ABS_FLOOR)
    return PoincareReport(lhs, rhs, margin, tuple(rows), err, passed)


def batch_verify(w: Weight, hw: HatWeight, dec: DegeneracyDecomposition, corpus,
                 q: QuadratureConfig = DEFAULT_QUADRATURE) -> BatchReport:
    reports = tuple(poincare_gap(w, hw, dec, u, q) for u in corpus)
    failures = tuple(k for k, r in enumerate(reports) if not r.passed)
    return BatchReport(reports, failures, not failures)


def hermite_cubic(x0: float, x1: float, y0: float, y1: float, m0: float, m1: float) -> Poly:
    h = x1 - x0
    t = Polynomial([0.0, 1.0], domain=[x0, x1], window=[0.0, 1.0])
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return Poly(y0 * h00 + h * m0 * h10 + y1 * h01 + h * m1 * h11)


def random_piecewise_cubics(dec: DegeneracyDecomposition, count: int, seed: int = 0,
                            cells: int = 4, scale: float = 1.0) -> list[PiecewiseFunction]:
    """Seeded C1 piecewise cubics whose breakpoints keep a 1% buffer from every interval end."""
    rng = np.random.default_rng(seed)
    lo, hi = dec.domain.lo, dec.domain.hi
    buf = 0.01 * (hi - lo)
    ends = np.array([e for I in dec.intervals for e in (I.lo, I.hi)])
    out = []
    while len(out) < count:
        cand = np.sort(rng.uniform(lo + buf, hi - buf, cells - 1))
        if np.any(np.abs(cand[:, None] - ends[None, :]) < buf) or np.any(np.diff(cand) < buf):
            continue
        xs = np.concatenate([[lo], cand, [hi]])
        ys = scale * rng.normal(size=xs.size)
        ms = scale * rng.normal(size=xs.size)
        pieces = [hermite_cubic(xs[k], xs[k + 1], ys[k], ys[k + 1], ms[k], ms[k + 1])
                  for k in range(xs.size - 1)]
        out.append(PiecewiseFunction(xs, pieces))
    return out
