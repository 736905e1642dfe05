"""Relaxed functional, recovery sequences, the block counterexample, and lsc probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .degeneracy import DegeneracyDecomposition, detect_intervals
from .errors import (BadParameters, ConvergenceNotEstablished, HNotAdmissible, HypothesisViolated,
                     NonIntegrable, OutOfDomain, ScheduleUnreachable)
from .functions import (DEFAULT_QUADRATURE, Interval, PiecewiseFunction, Poly, Power, QuadratureConfig,
                        Weight, as_interval, integrate, integrate_function)
from .hat import HatWeight, build_hat
from .pairing import _tv_quad, dom_w_membership

SCHEDULE = (8, 16, 32, 64)
MAX_HALVINGS = 30


@dataclass(frozen=True)
class RelaxedValue:
    finite: bool
    value: float | None = None


@dataclass(frozen=True)
class MollifiedDerivative:
    v: PiecewiseFunction
    l1_error: float
    deltas: tuple


@dataclass(frozen=True)
class RecoveryStep:
    h: int
    u_h: PiecewiseFunction
    l1_hat_error: float
    energy: float
    energy_gap: float
    collar_term: float = 0.0
    collar_energy: float = 0.0
    mollify_error: float = 0.0
    midpoint_errors: tuple = ()


@dataclass(frozen=True)
class LscReport:
    f_values: tuple
    relaxed: float
    tail_min: float
    passed: bool
    probes: tuple = ()


@dataclass(frozen=True)
class CounterexampleDiagnostics:
    H: tuple
    S_uw: tuple
    S_uhat: tuple
    tv_K: tuple
    fitted_growth_exponent: float
    block_term_slope: float
    u_power: float
    K: tuple


@dataclass(frozen=True)
class CompactnessReport:
    distances: tuple
    consecutive: tuple
    cauchy: bool
    sup_tv: float
    sup_mid: float
    w11_bounds: tuple = ()


# ---------------------------------------------------------------------------
# helpers


def _concat(cells) -> PiecewiseFunction:
    cells = [c for c in cells if c[1] > c[0]]
    bps = [cells[0][0]] + [c[1] for c in cells]
    return PiecewiseFunction(bps, [c[2] for c in cells])


def _cells_on(f: PiecewiseFunction, lo: float, hi: float):
    return f.restrict(lo, hi).cells if hi > lo else []


def _line(x0, y0, x1, y1) -> Poly:
    s = (y1 - y0) / (x1 - x0)
    return Poly(Polynomial([y0, s], domain=[x0, x0 + 1.0], window=[0.0, 1.0]))


def _check_hypotheses(w: Weight, dec: DegeneracyDecomposition):
    if dec.truncated:
        raise HypothesisViolated("the weight is not finitely degenerate (decomposition truncated)")
    if w.derivative_density is None:
        raise HypothesisViolated("w has no derivative density on I")
    for I in dec.intervals:
        if not w.is_continuous_on(I.lo, I.hi):
            raise HypothesisViolated(f"w jumps inside ({I.lo}, {I.hi})")


def relaxed_functional(w: Weight, u: PiecewiseFunction, dec: DegeneracyDecomposition, hw: HatWeight,
                       q: QuadratureConfig = DEFAULT_QUADRATURE) -> RelaxedValue:
    """F̄(u) = |(w, Du)|(I) on Dom_w, +inf elsewhere."""
    _check_hypotheses(w, dec)
    if not dom_w_membership(w, u, dec, hw, q).verdict:
        return RelaxedValue(False)
    try:
        value = sum(_tv_quad(w, u, I, q).value for I in dec.intervals)
    except NonIntegrable:
        return RelaxedValue(False)
    return RelaxedValue(True, value)


def energy(w: Weight, u: PiecewiseFunction, I=None, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """F(u) = int |u'| w for absolutely continuous u."""
    return integrate(abs(u.derivative()), w.f, I, q).value


# ---------------------------------------------------------------------------
# recovery sequences


def _smoothed_derivative(du: PiecewiseFunction, lo: float, hi: float, h: int) -> PiecewiseFunction:
    """u' on [lo, hi] with every jump replaced by a linear bridge of half-width <= 1/(2h)."""
    d = du.restrict(lo, hi)
    jumps = [x for x, _, _ in d.jumps()]
    if not jumps:
        return d
    bp = d.breakpoints
    cells = []
    cursor = lo
    for x in jumps:
        k = int(np.searchsorted(bp, x))
        eps = min(1.0 / (2 * h), 0.25 * (bp[k] - bp[k - 1]), 0.25 * (bp[k + 1] - bp[k]))
        s, e = x - eps, x + eps
        cells += _cells_on(d, cursor, s)
        cells.append((s, e, _line(s, d.limits(s)[1], e, d.limits(e)[0])))
        cursor = e
    cells += _cells_on(d, cursor, hi)
    return _concat(cells)


def _taper(c: float, start: float, stop: float, w: Weight, du: PiecewiseFunction, q) -> Poly:
    """c * (r + k r (1 - r)) with r running 0 -> 1 from ``start`` to ``stop``.

    k is chosen so the taper carries the same w-weighted mass as |u'| on the
    window; the added bump vanishes at both ends, so continuity is kept.
    """
    r = _line(start, 0.0, stop, 1.0)
    if c == 0:
        return Poly([0.0])
    lo, hi = min(start, stop), max(start, stop)
    bump = Poly(r.p * (1 - r.p))
    target = integrate(abs(du), w.f, (lo, hi), q).value
    base = integrate(PiecewiseFunction([lo, hi], [r]), w.f, (lo, hi), q).value * abs(c)
    extra = integrate(PiecewiseFunction([lo, hi], [bump]), w.f, (lo, hi), q).value * abs(c)
    k = (target - base) / extra if extra > 0 else 0.0
    k = max(k, -1.0)
    return Poly(c * (r.p + k * bump.p))


def mollify_derivative(w: Weight, u: PiecewiseFunction, dec: DegeneracyDecomposition, h: int,
                       q: QuadratureConfig = DEFAULT_QUADRATURE) -> MollifiedDerivative:
    """Continuous v_h, compactly supported in I, with ||v_h - u'||_{L1(I, w)} <= 1/h."""
    du = u.derivative()
    omega = dec.domain
    target = 1.0 / h
    cells = []
    cursor = omega.lo
    total_err = 0.0
    deltas = []
    for I in dec.intervals:
        a, b = I.lo, I.hi
        if a > cursor:
            cells.append((cursor, a, Poly([0.0])))
        core = _smoothed_derivative(du, a, b, h)
        delta = (b - a) / (4 * h)
        for _ in range(MAX_HALVINGS):
            try:
                cl = core.limits(a + delta)[1]
                cr = core.limits(b - delta)[0]
                left = _taper(cl, a, a + delta, w, du, q)
                right = _taper(cr, b, b - delta, w, du, q)
                part = _concat([(a, a + delta, left)] + _cells_on(core, a + delta, b - delta)
                               + [(b - delta, b, right)])
                err = integrate(abs(part - du.restrict(a, b)), w.f, (a, b), q).value
            except NonIntegrable as exc:
                raise ScheduleUnreachable(f"u' is not in L1(w) near ({a}, {b}): {exc}") from exc
            if err <= target * I.length / dec.measure:
                break
            delta /= 2
        else:
            raise ScheduleUnreachable(f"taper error {err:.3g} above {target:.3g} on ({a}, {b})")
        total_err += err
        deltas.append(delta)
        cells += part.cells
        cursor = b
    if cursor < omega.hi:
        cells.append((cursor, omega.hi, Poly([0.0])))
    return MollifiedDerivative(_concat(cells), total_err, tuple(deltas))


def build_primitive(u: PiecewiseFunction, v_h, I) -> PiecewiseFunction:
    """ũ(x) = u(mid) - int_x^mid v_h on the interval I."""
    v = v_h.v if isinstance(v_h, MollifiedDerivative) else v_h
    I = as_interval(I)
    V = v.restrict(I.lo, I.hi).antiderivative()
    mid = I.mid
    return V + (float(u.half(mid)) - float(V(mid)))


class BarWeight:
    """x -> int_x^mid ŵ on the outer quarters of one interval."""

    def __init__(self, hw: HatWeight, i: int):
        self.part = hw.part(i)
        p = self.part
        self._M = hw.as_function().restrict(p.a, p.b).antiderivative()
        self._m_mid = float(self._M(p.mid))
        self._hw = hw

    def __call__(self, x: float) -> float:
        p = self.part
        if not (p.a <= x <= p.q1 or p.q3 <= x <= p.b):
            raise OutOfDomain(f"{x} is not on an outer quarter of ({p.a}, {p.b})")
        return self._m_mid - float(self._M(x))

    def abs(self, x: float) -> float:
        return abs(self(x))

    def derivative(self, x: float) -> float:
        return -float(self._hw(x))


def _collar_factor(hw: HatWeight, lo: float, hi: float, rising: bool) -> tuple[PiecewiseFunction, float]:
    """ŵ-mass cutoff on [lo, hi]: 0 at the touching end, 1 at the inner end."""
    M = hw.as_function().restrict(lo, hi).antiderivative()
    m_lo, m_hi = float(M(lo)), float(M(hi))
    mass = m_hi - m_lo
    if not mass > 0:
        raise HypothesisViolated(f"ŵ has no mass on the collar [{lo}, {hi}]")
    psi = (M - m_lo) * (1.0 / mass) if rising else (M - m_hi) * (-1.0 / mass)
    return psi, mass


def build_recovery(w: Weight, hw: HatWeight, dec: DegeneracyDecomposition, u: PiecewiseFunction, h: int,
                   q: QuadratureConfig = DEFAULT_QUADRATURE) -> RecoveryStep:
    ivs = dec.intervals
    shortest = min(I.length for I in ivs)
    if not 1.0 / h < shortest / 4:
        raise HNotAdmissible(f"1/h = {1.0 / h} is not below min(b_i - a_i)/4 = {shortest / 4}")
    rel = relaxed_functional(w, u, dec, hw, q)
    if not rel.finite:
        raise HypothesisViolated("u is not in Dom_w or its pairing variation is infinite")
    mol = mollify_derivative(w, u, dec, h, q)
    hf = hw.as_function()
    omega = dec.domain
    cells = []
    collars = []
    mids = []
    prims = [build_primitive(u, mol, I) for I in ivs]
    for i, (I, ut) in enumerate(zip(ivs, prims)):
        a, b = I.lo, I.hi
        mids.append(abs(float(ut(I.mid)) - float(u.half(I.mid))))
        if i == 0 and a > omega.lo:
            cells.append((omega.lo, a, Poly([float(ut(a))])))
        elif i > 0 and ivs[i - 1].hi < a:
            prev = prims[i - 1]
            cells.append((ivs[i - 1].hi, a, _line(ivs[i - 1].hi, float(prev(ivs[i - 1].hi)), a, float(ut(a)))))
        touch_l = i > 0 and ivs[i - 1].hi == a
        touch_r = i + 1 < len(ivs) and ivs[i + 1].lo == b
        lo, hi = a, b
        if touch_l:
            psi, mass = _collar_factor(hw, a, a + 1.0 / h, rising=True)
            piece = ut.restrict(a, a + 1.0 / h) * psi
            cells += piece.cells
            collars.append((a, a + 1.0 / h, ut, mass))
            lo = a + 1.0 / h
        if touch_r:
            inner = _cells_on(ut, lo, b - 1.0 / h)
            cells += inner
            psi, mass = _collar_factor(hw, b - 1.0 / h, b, rising=False)
            cells += (ut.restrict(b - 1.0 / h, b) * psi).cells
            collars.append((b - 1.0 / h, b, ut, mass))
        else:
            cells += _cells_on(ut, lo, hi)
    if ivs[-1].hi < omega.hi:
        cells.append((ivs[-1].hi, omega.hi, Poly([float(prims[-1](ivs[-1].hi))])))
    u_h = _concat(cells)

    l1 = sum(integrate(abs(u_h - u), hf, I, q).value for I in ivs)
    en = energy(w, u_h, omega, q)
    collar_term = 0.0
    collar_energy = 0.0
    for lo, hi, ut, mass in collars:
        collar_term += integrate(abs(ut) * hf, w.f, (lo, hi), q).value / mass
        collar_energy += energy(w, u_h, (lo, hi), q)
    return RecoveryStep(h, u_h, l1, en, abs(en - rel.value), collar_term, collar_energy,
                        mol.l1_error, tuple(mids))


def recovery_schedule(w, hw, dec, u, schedule=SCHEDULE, q: QuadratureConfig = DEFAULT_QUADRATURE):
    return [build_recovery(w, hw, dec, u, h, q) for h in schedule]


# ---------------------------------------------------------------------------
# lower semicontinuity and compactness


def _bumps(dec: DegeneracyDecomposition):
    """Smooth test functions (1 - s^2)^2 centred in each interval, as functions on the domain."""
    out = []
    omega = dec.domain
    for I in dec.intervals:
        for c, r in ((I.mid, I.length / 4), (I.lo + I.length / 4, I.length / 8), (I.hi - I.length / 4, I.length / 8)):
            s = Polynomial([0.0, 1.0], domain=[c - r, c + r], window=[-1.0, 1.0])
            cells = []
            if c - r > omega.lo:
                cells.append((omega.lo, c - r, Poly([0.0])))
            cells.append((c - r, c + r, Poly((1 - s**2) ** 2)))
            if c + r < omega.hi:
                cells.append((c + r, omega.hi, Poly([0.0])))
            out.append(_concat(cells))
    return out


def _probe_values(w, hw, dec, family, u_limit, q):
    hf = hw.as_function()
    dwabs = abs(w.derivative_density)
    probes = []
    for phi in _bumps(dec):
        row_hat, row_dw = [], []
        for u in family:
            diff = (u - u_limit) * phi
            row_hat.append(abs(integrate(diff, hf, None, q).value))
            row_dw.append(abs(integrate(diff, dwabs, None, q).value))
        probes += [row_hat, row_dw]
    return probes


def lsc_probe(w: Weight, hw: HatWeight, dec: DegeneracyDecomposition, family, u_limit: PiecewiseFunction,
              q: QuadratureConfig = DEFAULT_QUADRATURE, tol: float = 1e-6) -> LscReport:
    """Check liminf F(u_k) >= F̄(u) on the tail of a (ŵ, Dw)-converging family."""
    family = list(family)
    _check_hypotheses(w, dec)
    probes = _probe_values(w, hw, dec, family, u_limit, q)
    for row in probes:
        head = max(row)
        if row[-1] > max(0.5 * head, 1e-9):
            raise ConvergenceNotEstablished(f"weak probe did not shrink: {row}")
    rel = relaxed_functional(w, u_limit, dec, hw, q)
    values = []
    for u in family:
        try:
            values.append(sum(_tv_quad(w, u, I, q).value for I in dec.intervals))
        except NonIntegrable:
            values.append(math.inf)
    tail = values[len(values) // 2:]
    fbar = rel.value if rel.finite else math.inf
    tail_min = min(tail)
    passed = tail_min >= fbar - tol if math.isfinite(fbar) else math.isinf(tail_min) or False
    return LscReport(tuple(values), fbar, tail_min, passed, tuple(tuple(r) for r in probes))


def compactness_demo(w: Weight, hw: HatWeight, dec: DegeneracyDecomposition, family,
                     q: QuadratureConfig = DEFAULT_QUADRATURE, K=None, growth: float = 1.5) -> CompactnessReport:
    """Cauchy evidence in L1(K, ŵ) for a family with bounded pairing variation and midpoint values."""
    family = list(family)
    if len(family) < 2:
        raise HypothesisViolated("need at least two members")
    first = hw.part(0)
    K = Interval(first.q1, first.q3) if K is None else as_interval(K)
    tvs = []
    for u in family:
        try:
            tvs.append(sum(_tv_quad(w, u, I, q).value for I in dec.intervals))
        except NonIntegrable:
            tvs.append(math.inf)
    # the hypothesis bounds |u_k(mid)|
    mids = [max(abs(float(u.half(p.mid))) for p in hw.parts) for u in family]
    for name, seq in (("pairing variation", tvs), ("midpoint value", mids)):
        if not all(math.isfinite(v) for v in seq):
            raise HypothesisViolated(f"{name} is infinite for some member")
        n = len(seq) // 2
        if n and max(seq[n:]) > growth * max(seq[:n]) + 1e-12:
            raise HypothesisViolated(f"{name} grows along the family")
    hf = hw.as_function()
    n = len(family)
    dist = [[0.0] * n for _ in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            dist[j][k] = dist[k][j] = integrate(abs(family[j] - family[k]), hf, K, q).value
    consecutive = [dist[k][k + 1] for k in range(n - 1)]
    tails = [max(dist[k][k + 1:]) for k in range(n - 1)]
    cauchy = all(tails[k + 1] <= tails[k] * (1 + 1e-9) + 1e-15 for k in range(len(tails) - 1))
    bounds = []
    from .functions import ess_sup_reciprocal
    c_K = ess_sup_reciprocal(w, K)
    for u, tv in zip(family, tvs):
        d1 = integrate_function(abs(u.derivative()), K, q).value
        bounds.append((d1, c_K * tv))
    return CompactnessReport(tuple(tuple(r) for r in dist), tuple(consecutive), cauchy,
                             max(tvs), max(mids), tuple(bounds))


# ---------------------------------------------------------------------------
# block counterexample


def _block_edges(H: int):
    """[(h, 1/(h+1), m_h, 1/h)] for h = H .. 1 (left to right)."""
    return [(h, 1.0 / (h + 1), 0.5 * (1.0 / (h + 1) + 1.0 / h), 1.0 / h) for h in range(H, 0, -1)]


def counterexample_weight(beta: float, gamma: float, H: int) -> Weight:
    """Block weight on (0, 2): h^-2 x^gamma on I_h^1, h^-2 x^beta on I_h^2, mirrored about 1."""
    if not (beta > 1 and 0 < gamma < 1):
        raise BadParameters(f"need beta > 1 and 0 < gamma < 1, got beta={beta}, gamma={gamma}")
    if int(H) != H or H < 1:
        raise BadParameters(f"need an integer block count >= 1, got {H}")
    H = int(H)
    edges = _block_edges(H)
    c = H ** -2.0 * (1.0 / (H + 1)) ** gamma
    left = [(0.0, edges[0][1], Poly([c]))]
    for h, lo, m, hi in edges:
        left.append((lo, m, Power(h ** -2.0, gamma, 0.0, 1)))
        left.append((m, hi, Power(h ** -2.0, beta, 0.0, 1)))
    right = []
    for lo, hi, p in reversed(left):
        mp = Poly([c]) if isinstance(p, Poly) else Power(p.coef, p.exponent, 2.0, -1)
        right.append((2.0 - hi, 2.0 - lo, mp))
    f = _concat(left + right)
    return Weight(f)


def counterexample_hat_closed_form(beta: float, H: int, x):
    """Closed-form ŵ on (1/(H+1), 1/2) away from block edges, and 9/16-type middle value."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    for h, lo, m, hi in _block_edges(H):
        if h == 1:
            continue
        sel1 = (x > lo) & (x < m)
        sel2 = (x > m) & (x < hi)
        out[sel1] = h ** -2.0 * m ** beta
        out[sel2] = h ** -2.0 * x[sel2] ** beta
    return out


def counterexample_middle_value(beta: float) -> float:
    return 0.75 ** beta


def counterexample_diagnostics(beta: float, gamma: float, H_schedule, K=(0.25, 0.5),
                               q: QuadratureConfig = DEFAULT_QUADRATURE, u_power: float = 3.0
                               ) -> CounterexampleDiagnostics:
    """Partial sums of int u w and int u ŵ over the first H blocks, with u = x^-u_power."""
    Hs = sorted(int(H) for H in H_schedule)
    if len(Hs) < 2:
        raise BadParameters("need at least two block counts")
    K = as_interval(K)
    w = counterexample_weight(beta, gamma, Hs[-1])
    dec = detect_intervals(w)
    hw = build_hat(w, dec)
    hf = hw.as_function()
    u = PiecewiseFunction.single(0.0, 2.0, Power(1.0, -u_power, 0.0, 1))
    S_uw, S_uhat = [], []
    for H in Hs:
        lo = 1.0 / (H + 1)
        S_uw.append(integrate(u, w.f, (lo, 1.0), q).value)
        S_uhat.append(integrate(u, hf, (lo, 1.0), q).value)
    tvs = []
    for H in Hs:
        wH = counterexample_weight(beta, gamma, H)
        tvs.append(_tv_quad(wH, u.restrict(K.lo, K.hi), K, q).value)
    lh = np.log(np.asarray(Hs, dtype=float))
    fit = float(np.polyfit(lh, np.log(np.asarray(S_uw)), 1)[0])
    hs = np.arange(Hs[0], Hs[-1] + 1)
    terms = [integrate(u, w.f, (1.0 / (h + 1), 1.0 / h), q).value for h in hs]
    slope = float(np.polyfit(np.log(hs), np.log(terms), 1)[0])
    return CounterexampleDiagnostics(tuple(Hs), tuple(S_uw), tuple(S_uhat), tuple(tvs), fit, slope,
                                     float(u_power), (K.lo, K.hi))
