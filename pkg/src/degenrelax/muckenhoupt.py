"""Muckenhoupt-type diagnostics: A1 constant, maximal weight, lsc envelope, weighted TV."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotPositive
from .functions import (DEFAULT_QUADRATURE, PiecewiseFunction, Poly, QuadratureConfig, Weight, as_interval,
                        essential_inf, integrate)

PER_DECADE = 20


@dataclass(frozen=True)
class A1Report:
    best_c: float
    violating_ball: tuple | None
    resolution: dict
    table: tuple = ()


@dataclass(frozen=True)
class Envelope:
    xs: np.ndarray
    values: np.ndarray
    function: PiecewiseFunction
    dips: tuple


@dataclass(frozen=True)
class GrowthReport:
    best_c: float
    passed: bool
    worst: tuple | None
    refinements: tuple


@dataclass(frozen=True)
class BaldiPoincare:
    lhs: float
    tv: float
    rhs_scaled: float
    ratio: float


def default_radii(length: float, per_decade: int = PER_DECADE, lo_frac: float = 1e-3,
                  hi_frac: float = 0.5) -> np.ndarray:
    lo, hi = lo_frac * length, hi_frac * length
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _ball_averages(W: PiecewiseFunction, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return (W(hi) - W(lo)) / (hi - lo)


def a1_constant(w: Weight, omega0=None, radii=None, centers: int = 201) -> A1Report:
    """Empirical inf of w(x) / (average of w over B(x, r)) over balls inside Ω0."""
    omega0 = w.domain if omega0 is None else as_interval(omega0)
    if essential_inf(w, omega0) <= w.zero_floor:
        raise NotPositive(f"w vanishes somewhere in ({omega0.lo}, {omega0.hi})")
    radii = default_radii(omega0.length) if radii is None else np.asarray(radii, dtype=float)
    xs = np.linspace(omega0.lo, omega0.hi, centers)
    W = w.f.antiderivative()
    X, R = np.meshgrid(xs, radii, indexing="ij")
    inside = (X - R >= omega0.lo) & (X + R <= omega0.hi)
    Xi, Ri = X[inside], R[inside]
    if Xi.size == 0:
        raise ValueError("no sampled ball fits inside the domain")
    ratio = w(Xi) / _ball_averages(W, Xi - Ri, Xi + Ri)
    k = int(np.argmin(ratio))
    best = min(1.0, float(ratio[k]))
    ball = (float(Xi[k]), float(Ri[k])) if ratio[k] < 1 else None
    table = tuple(zip(Xi.tolist(), Ri.tolist(), ratio.tolist()))
    return A1Report(best, ball, {"centers": centers, "radii": int(radii.size),
                                 "r_min": float(radii.min()), "r_max": float(radii.max())}, table)


def maximal_weight(w: Weight, x: float, radii=None, omega0=None, inside_only: bool = False) -> float:
    """sup over sampled radii of the average of w over B(x, r) clipped to Ω0.

    With ``inside_only`` the sup runs over balls contained in Ω0 (the family
    ``a1_constant`` samples), falling back to w(x) when none fits.
    """
    omega0 = w.domain if omega0 is None else as_interval(omega0)
    radii = default_radii(omega0.length) if radii is None else np.asarray(radii, dtype=float)
    W = w.f.antiderivative()
    if inside_only:
        radii = radii[(x - radii >= omega0.lo) & (x + radii <= omega0.hi)]
        if radii.size == 0:
            return float(w(x))
        return float(max(np.max(_ball_averages(W, x - radii, x + radii)), w(x)))
    lo = np.maximum(omega0.lo, x - radii)
    hi = np.minimum(omega0.hi, x + radii)
    return float(np.max(_ball_averages(W, lo, hi)))


def maximal_weight_function(w: Weight, n: int = 401, radii=None, omega0=None,
                            inside_only: bool = False) -> Weight:
    """Sampled w̃ on a uniform grid, as a piecewise-linear weight."""
    omega0 = w.domain if omega0 is None else as_interval(omega0)
    xs = np.linspace(omega0.lo, omega0.hi, n)
    vals = [maximal_weight(w, x, radii, omega0, inside_only) for x in xs]
    return Weight(PiecewiseFunction.from_samples(xs, vals), auto_derivative=False)


def envelope_value(w: Weight, x: float) -> float:
    left, right = w.f.limits(x)
    return min(v for v in (float(w.f(x)), left, right) if not math.isnan(v))


def lsc_envelope(w: Weight, grid=2049, dip_tolerance: float = 1e-9) -> Envelope:
    """Grid realization of the largest lower semicontinuous minorant of w."""
    d = w.domain
    xs = np.linspace(d.lo, d.hi, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    xs = np.union1d(xs, w.f.breakpoints[(w.f.breakpoints >= xs[0]) & (w.f.breakpoints <= xs[-1])])
    vals = np.asarray(w.f(xs), dtype=float)
    hits = np.isin(xs, w.f.breakpoints)
    for k in np.nonzero(hits)[0]:
        vals[k] = envelope_value(w, xs[k])
    dips = tuple(float(xs[k]) for k in kernels.isolated_dips(vals, dip_tolerance))
    return Envelope(xs, vals, PiecewiseFunction.from_samples(xs, vals), dips)


def baldi_tv(w: Weight, u: PiecewiseFunction, omega=None, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """int w |u'| plus the lsc-envelope value of w times |jump| at each jump of u."""
    omega = w.domain if omega is None else as_interval(omega)
    ac = 0.0
    du = u.derivative()
    for lo, hi, p in (du * w.f).restrict(omega.lo, omega.hi).cells:
        wp, up = w.f.piece_at(0.5 * (lo + hi)), u.piece_at(0.5 * (lo + hi))
        if isinstance(wp, Poly) and wp.p.degree() == 0 and up.monotone():
            # constant weight on a monotone cell: int w |u'| = w |u(hi-) - u(lo+)|
            ac += abs(float(wp.coeffs[0])) * abs(up.limit(hi) - up.limit(lo))
        else:
            ac += integrate(abs(du), w.f, (lo, hi), q).value
    atoms = sum(envelope_value(w, x) * abs(r - l) for x, l, r in u.jumps() if omega.lo < x < omega.hi)
    return ac + atoms


def _growth_c(W, xs, radii, expo):
    lo = xs[:, None] - radii[None, :]
    hi = xs[:, None] + radii[None, :]
    mass = W(hi.ravel()).reshape(hi.shape) - W(lo.ravel()).reshape(lo.shape)
    return kernels.max_growth_ratio(mass, radii, expo)


def local_growth_check(w: Weight, q_exponent: float, pairs=None, centers: int = 21, radii=None,
                       refinements: int = 2, stability: float = 1.1) -> GrowthReport:
    """Smallest c with int_{B_r} w <= c (r/s)^(q/(q-1)) int_{B_s} w over nested balls."""
    if not q_exponent > 1:
        raise ValueError("q_exponent must exceed 1")
    expo = q_exponent / (q_exponent - 1)
    W = w.f.antiderivative()
    if pairs is not None:
        best, worst = -math.inf, None
        for x, r, s in pairs:
            m_r = float(W(x + r) - W(x - r))
            m_s = float(W(x + s) - W(x - s))
            c = m_r / m_s * (s / r) ** expo
            if c > best:
                best, worst = c, (x, r, s)
        return GrowthReport(best, math.isfinite(best), worst, (best,))
    d = w.domain
    half = d.length / 2
    xs = np.linspace(d.lo + 0.25 * d.length, d.hi - 0.25 * d.length, centers)
    top = 0.25 * d.length
    cs = []
    worst = None
    for k in range(refinements + 1):
        rr = default_radii(half, lo_frac=1e-2 * 10.0 ** -k, hi_frac=top / half) if radii is None \
            else np.asarray(radii, dtype=float) * 10.0 ** -k
        c, i, j, l = _growth_c(W, xs, rr, expo)
        cs.append(float(c))
        worst = (float(xs[i]), float(rr[j]), float(rr[l]))
    passed = all(math.isfinite(c) for c in cs) and cs[-1] <= stability * cs[0]
    return GrowthReport(cs[-1], passed, worst, tuple(cs))


def baldi_poincare_check(w: Weight, u: PiecewiseFunction, ball, q_exponent: float = 2.0,
                         q: QuadratureConfig = DEFAULT_QUADRATURE) -> BaldiPoincare:
    """lhs = (avg_B |u - u_B|^q w)^(1/q) against r TV(u; w)(B) / |B|."""
    x, r = ball
    B = as_interval((x - r, x + r))
    one = PiecewiseFunction.constant(B.lo, B.hi, 1.0)
    u_B = integrate(u, one, B, q).value / B.length
    dev = u - u_B
    if q_exponent == 2:
        integrand = dev * dev
    else:
        integrand = abs(dev).power(q_exponent)
    lhs = (integrate(integrand, w.f, B, q).value / B.length) ** (1.0 / q_exponent)
    tv = baldi_tv(w, u, B, q)
    rhs = r * tv / B.length
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return BaldiPoincare(lhs, tv, rhs, ratio)
