"""The auxiliary weight built from running essential infima of w over half intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .degeneracy import DegeneracyDecomposition
from .functions import Interval, PiecewiseFunction, Poly, Weight, as_interval, essential_inf

DEFAULT_DENSITY = 2048


@dataclass
class HatInterval:
    index: int
    a: float
    b: float
    q1: float
    mid: float
    q3: float
    middle_value: float
    left: PiecewiseFunction   # on [a, q1]
    right: PiecewiseFunction  # on [q3, b]
    exact: bool

    @property
    def value_a(self) -> float:
        return float(self.left(self.a))

    @property
    def value_b(self) -> float:
        return float(self.right(self.b))

    @property
    def upper_bound(self) -> float:
        """L_i: the largest value taken on the open interval."""
        sup_l = max(p.extrema(lo, hi)[1] for lo, hi, p in self.left.cells)
        sup_r = max(p.extrema(lo, hi)[1] for lo, hi, p in self.right.cells)
        return max(sup_l, sup_r, self.middle_value)


@dataclass(frozen=True)
class PropertyReport:
    clauses: dict
    passed: bool
    details: dict = field(default_factory=dict)


def _monotone_cells(w: Weight, lo: float, hi: float, cut: float):
    """Cells of w on [lo, hi] refined into monotone runs and split at ``cut``."""
    out = []
    for cl, ch, p in w.f.cells:
        l, r = max(cl, lo), min(ch, hi)
        if l >= r:
            continue
        splits = p.monotone_splits(l, r)
        if splits is None:
            return None
        pts = sorted({l, r, *splits, *([cut] if l < cut < r else [])})
        out += [(s, e, p) for s, e in zip(pts[:-1], pts[1:]) if e > s]
    return out


def _crossing(p, S, l, r):
    try:
        return brentq(lambda t: p.limit(t) - S, l, r, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except ValueError:
        return None


def _assemble(segments):
    segments = sorted((s for s in segments if s[1] > s[0]), key=lambda s: s[0])
    bps = [segments[0][0]] + [s[1] for s in segments]
    return PiecewiseFunction(bps, [s[2] for s in segments])


def _left_closed_form(w, a, q1, mid):
    cells = _monotone_cells(w, a, mid, q1)
    if cells is None:
        return None
    S = math.inf
    segs = []
    for l, r, p in reversed(cells):
        pl, pr = p.limit(l), p.limit(r)
        if not (math.isfinite(pl) and math.isfinite(pr)):
            return None
        if l >= q1:
            S = min(S, pl, pr)
            continue
        if pr >= pl:  # nondecreasing: inf over [x, r] is p(x)
            if pr <= S:
                segs.append((l, r, p))
            elif pl >= S:
                segs.append((l, r, Poly([S])))
            else:
                x = _crossing(p, S, l, r)
                if x is None:
                    return None
                segs += [(l, x, p), (x, r, Poly([S]))]
            S = min(S, pl)
        else:
            S = min(S, pr)
            segs.append((l, r, Poly([S])))
    return _assemble(segs)


def _right_closed_form(w, q3, mid, b):
    cells = _monotone_cells(w, mid, b, q3)
    if cells is None:
        return None
    S = math.inf
    segs = []
    for l, r, p in cells:
        pl, pr = p.limit(l), p.limit(r)
        if not (math.isfinite(pl) and math.isfinite(pr)):
            return None
        if r <= q3:
            S = min(S, pl, pr)
            continue
        if pl >= pr:  # nonincreasing: inf over [l, x] is p(x)
            if pl <= S:
                segs.append((l, r, p))
            elif pr >= S:
                segs.append((l, r, Poly([S])))
            else:
                x = _crossing(p, S, l, r)
                if x is None:
                    return None
                segs += [(l, x, Poly([S])), (x, r, p)]
            S = min(S, pr)
        else:
            S = min(S, pl)
            segs.append((l, r, Poly([S])))
    return _assemble(segs)


def _sampled_side(w, start, stop, density, reverse):
    """Running infimum of w sampled from ``stop`` (the midpoint) outwards."""
    xs = np.linspace(start, stop, 2 * density + 1)
    with np.errstate(all="ignore"):
        vals = np.asarray(w.f(xs), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    if reverse:
        env = kernels.running_min(vals[::-1])[::-1]
        return PiecewiseFunction.from_samples(xs[:density + 1], env[:density + 1])
    env = kernels.running_min(vals)
    return PiecewiseFunction.from_samples(xs[density:], env[density:])


def build_hat_interval(w: Weight, I: Interval, index: int = 0, density: int = DEFAULT_DENSITY) -> HatInterval:
    a, b = I.lo, I.hi
    q1, mid, q3 = (3 * a + b) / 4, (a + b) / 2, (a + 3 * b) / 4
    middle = essential_inf(w, (q1, q3))
    left = _left_closed_form(w, a, q1, mid)
    right = _right_closed_form(w, q3, mid, b)
    exact = left is not None and right is not None
    if left is None:
        left = _sampled_side(w, a, mid, density, reverse=True)
    if right is None:
        right = _sampled_side(w, mid, b, density, reverse=False)
    return HatInterval(index, a, b, q1, mid, q3, middle, left, right, exact)


class HatWeight:
    """ŵ on the whole domain: interval profiles, and zero off the closure of I."""

    def __init__(self, parts, domain: Interval):
        self.parts = list(parts)
        self.domain = domain
        segs = []
        cursor = domain.lo
        for h in self.parts:
            if h.a > cursor:
                segs.append((cursor, h.a, Poly([0.0])))
            segs += [(lo, hi, p) for lo, hi, p in h.left.cells]
            segs.append((h.q1, h.q3, Poly([h.middle_value])))
            segs += [(lo, hi, p) for lo, hi, p in h.right.cells]
            cursor = h.b
        if cursor < domain.hi:
            segs.append((cursor, domain.hi, Poly([0.0])))
        self.function = _assemble(segs)
        self._q3 = np.array([h.q3 for h in self.parts])
        self._mid_values = np.array([h.middle_value for h in self.parts])
        self._ends = np.array(sorted({e for h in self.parts for e in (h.a, h.b)}))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.atleast_1d(x)
        out = np.atleast_1d(self.function(xs)).astype(float)
        for k in np.nonzero(np.isin(xs, self._q3))[0]:
            out[k] = self._mid_values[np.searchsorted(self._q3, xs[k])]
        for k in np.nonzero(np.isin(xs, self._ends))[0]:
            left, right = self.function.limits(xs[k])
            out[k] = max(v for v in (left, right) if not math.isnan(v))
        return float(out[0]) if x.ndim == 0 else out

    def as_function(self) -> PiecewiseFunction:
        return self.function

    def part(self, i: int) -> HatInterval:
        return self.parts[i]

    @property
    def exact(self) -> bool:
        return all(h.exact for h in self.parts)

    def global_bound(self) -> float:
        return max(h.upper_bound for h in self.parts)

    def profile(self, i: int, side: str, density: int = DEFAULT_DENSITY):
        """Grid samples (x, ŵ(x)) on one outer quarter of interval i."""
        h = self.parts[i]
        lo, hi = (h.a, h.q1) if side == "left" else (h.q3, h.b)
        xs = np.linspace(lo, hi, density + 1)
        return xs, self(xs)

    def samples(self, n: int = 2001):
        xs = np.linspace(self.domain.lo, self.domain.hi, n)
        return xs, self(xs)


def build_hat(w: Weight, dec: DegeneracyDecomposition, density: int = DEFAULT_DENSITY) -> HatWeight:
    parts = [build_hat_interval(w, I, i, density) for i, I in enumerate(dec.intervals)]
    return HatWeight(parts, dec.domain)


def check_hat_properties(hw: HatWeight, w: Weight, grid: int = 2001) -> PropertyReport:
    from .functions import ess_sup_reciprocal

    clauses = {"monotone_outer": True, "constant_middle": True, "bounded_positive": True,
               "compact_positive": True, "endpoint_vanishing": True, "below_w": True,
               "global_bound": True}
    details = {}
    wbp = w.f.breakpoints
    for h in hw.parts:
        tol = 1e-12 * max(1.0, h.upper_bound if math.isfinite(h.upper_bound) else 1.0)
        xl = np.linspace(h.a, h.q1, grid)[:-1]
        xr = np.linspace(h.q3, h.b, grid)[1:]
        if np.any(np.diff(hw(xl)) < -tol) or np.any(np.diff(hw(xr)) > tol):
            clauses["monotone_outer"] = False
        xm = np.linspace(h.q1, h.q3, grid)
        if np.any(np.abs(hw(xm) - h.middle_value) > tol):
            clauses["constant_middle"] = False
        inner = np.linspace(h.a, h.b, grid)[1:-1]
        vals = hw(inner)
        L = h.upper_bound
        if not (math.isfinite(L) and np.all(vals > 0) and np.all(vals <= L + tol)):
            clauses["bounded_positive"] = False
        pad = 0.01 * (h.b - h.a)
        if not np.min(hw(np.linspace(h.a + pad, h.b - pad, grid))) > 0:
            clauses["compact_positive"] = False
        for end, half in ((h.a, (h.a, h.mid)), (h.b, (h.mid, h.b))):
            unbounded = math.isinf(ess_sup_reciprocal(w, half))
            side_val = h.value_a if end == h.a else h.value_b
            if unbounded != (side_val <= 0):
                clauses["endpoint_vanishing"] = False
        free = inner[~np.isin(inner, wbp)]
        with np.errstate(all="ignore"):
            wv = w(free)
        ok = np.isnan(wv) | (hw(free) <= wv + tol * np.maximum(1.0, np.abs(wv)))
        if not np.all(ok):
            clauses["below_w"] = False
        details[h.index] = {"middle_value": h.middle_value, "L": L,
                            "value_a": h.value_a, "value_b": h.value_b}
    if hw.parts and not math.isfinite(hw.global_bound()):
        clauses["global_bound"] = False
    return PropertyReport(clauses, all(clauses.values()), details)


def support_full_measure(hw: HatWeight, omega=None, tol: float = 1e-9) -> bool:
    omega = hw.domain if omega is None else as_interval(omega)
    covered = 0.0
    for h in hw.parts:
        lo, hi = max(h.a, omega.lo), min(h.b, omega.hi)
        if hi > lo and h.middle_value > 0:
            covered += hi - lo
    return omega.length - covered < tol
