"""Piecewise closed-form functions on bounded intervals, and their quadrature.

A :class:`PiecewiseFunction` is an ordered list of breakpoints with one
expression (a :class:`Piece`) per cell.  Pieces come from a small registry of
closed forms (polynomials, powers ``c|x - x0|**p``, ``1 + sin(1/x)``, sines)
plus generic callables, and they compose under ``+``, ``*`` and ``abs``.
Every piece is evaluated on the closure of its cell through its own
expression, so one-sided limits at breakpoints are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import kernels
from .errors import MissingDerivative, NonIntegrable, OutOfDomain, SpecParseError

GRID_POINTS = 10_001
ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got ({self.lo}, {self.hi})")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __iter__(self):
        return iter((self.lo, self.hi))


def as_interval(I) -> Interval:
    return I if isinstance(I, Interval) else Interval(float(I[0]), float(I[1]))


# ---------------------------------------------------------------------------
# pieces


class Piece:
    """One closed-form expression.  Subclasses override what they know exactly."""

    name = "expr"

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self) -> "Piece | None":
        return None

    def antideriv(self) -> "Piece | None":
        return None

    def limit(self, x: float) -> float:
        with np.errstate(all="ignore"):
            return float(np.asarray(self(np.array([float(x)])))[0])

    def extrema(self, lo: float, hi: float) -> tuple[float, float]:
        """(inf, sup) over the closed cell, from a dense grid."""
        xs = np.linspace(lo, hi, GRID_POINTS)
        with np.errstate(all="ignore"):
            ys = np.asarray(self(xs), dtype=float)
        ys = ys[~np.isnan(ys)]
        if ys.size == 0:
            return (math.nan, math.nan)
        return float(ys.min()), float(ys.max())

    def zeros(self, lo: float, hi: float, max_count: int) -> "tuple[list[tuple[float, float]], bool] | None":
        """Closed zero segments in [lo, hi] (points are degenerate segments).

        Returns ``None`` when the piece has no analytic zero finder; the second
        item flags truncation of an infinite zero set.
        """
        return None

    def monotone(self) -> bool:
        return False

    def monotone_splits(self, lo: float, hi: float) -> "list[float] | None":
        """Interior points splitting [lo, hi] into monotone runs, or None if unknown."""
        return [] if self.monotone() else None


class Poly(Piece):
    name = "poly"

    def __init__(self, coeffs):
        self.p = coeffs if isinstance(coeffs, Polynomial) else Polynomial(np.asarray(coeffs, dtype=float))
        self.p = self.p.trim() if np.any(self.p.coef != 0) else Polynomial([0.0])

    @property
    def coeffs(self):
        return self.p.coef

    def __call__(self, x):
        return self.p(np.asarray(x, dtype=float))

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def deriv(self):
        return Poly(self.p.deriv())

    def antideriv(self):
        return Poly(self.p.integ())

    def limit(self, x):
        return float(self.p(float(x)))

    def is_zero(self):
        return not np.any(self.p.coef)

    def real_roots(self, lo, hi):
        if self.p.degree() < 1:
            return []
        return [z for z in _polished_roots(self.p) if lo <= z <= hi]

    def extrema(self, lo, hi):
        cands = [lo, hi] + self.deriv().real_roots(lo, hi) if self.p.degree() >= 2 else [lo, hi]
        vals = self.p(np.asarray(cands, dtype=float))
        return float(vals.min()), float(vals.max())

    def zeros(self, lo, hi, max_count):
        if self.is_zero():
            return [(lo, hi)], False
        return [(z, z) for z in self.real_roots(lo, hi)], False

    def monotone(self):
        return self.p.degree() <= 1

    def monotone_splits(self, lo, hi):
        if self.p.degree() <= 1:
            return []
        return [z for z in self.deriv().real_roots(lo, hi) if lo < z < hi]


def _polished_roots(p: Polynomial) -> list[float]:
    # negligible leading terms only push roots toward infinity and overflow the companion solve
    c = p.coef
    keep = np.nonzero(np.abs(c) > 1e-14 * np.max(np.abs(c)))[0]
    if keep.size == 0 or keep[-1] == 0:
        return []
    raw = Polynomial(c[:keep[-1] + 1], domain=p.domain, window=p.window).roots()
    scale = 1.0 + np.abs(raw)
    real = np.sort(raw[np.abs(raw.imag) <= 1e-6 * scale].real)
    out = []
    i = 0
    while i < real.size:
        j = i
        while j + 1 < real.size and real[j + 1] - real[i] < 1e-5 * (1 + abs(real[i])):
            j += 1
        z = float(real[i:j + 1].mean())
        # a root of multiplicity m is a simple root of the (m-1)-th derivative
        q = p.deriv(j - i) if j > i else p
        dq = q.deriv()
        for _ in range(40):
            d = dq(z)
            if d == 0:
                break
            step = q(z) / d
            z -= step
            if abs(step) <= 1e-16 * (1 + abs(z)):
                break
        out.append(z)
        i = j + 1
    return out


class Power(Piece):
    """``coef * (side * (x - center)) ** exponent`` on one side of ``center``."""

    name = "power"

    def __init__(self, coef, exponent, center=0.0, side=1):
        self.coef = float(coef)
        self.exponent = float(exponent)
        self.center = float(center)
        self.side = 1 if side >= 0 else -1

    def __repr__(self):
        return f"Power({self.coef}, {self.exponent}, center={self.center}, side={self.side})"

    def _base(self, x):
        return np.maximum(self.side * (np.asarray(x, dtype=float) - self.center), 0.0)

    def __call__(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.exponent == 0:
                return np.full(np.shape(x), self.coef)
            return self.coef * self._base(x) ** self.exponent

    def deriv(self):
        if self.exponent == 0:
            return Poly([0.0])
        return Power(self.coef * self.exponent * self.side, self.exponent - 1, self.center, self.side)

    def antideriv(self):
        if self.exponent == -1:
            return None
        return Power(self.coef * self.side / (self.exponent + 1), self.exponent + 1, self.center, self.side)

    def extrema(self, lo, hi):
        a, b = self.limit(lo), self.limit(hi)
        return min(a, b), max(a, b)

    def zeros(self, lo, hi, max_count):
        if self.coef == 0:
            return [(lo, hi)], False
        if self.exponent > 0 and lo <= self.center <= hi:
            return [(self.center, self.center)], False
        return [], False

    def monotone(self):
        return True


class OnePlusSinInv(Piece):
    """``1 + sin(1/x)`` for x > 0."""

    name = "one_plus_sin_inv"

    def __repr__(self):
        return "OnePlusSinInv()"

    def __call__(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 + np.sin(1.0 / np.asarray(x, dtype=float))

    def deriv(self):
        def d(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return -np.cos(1.0 / x) / x ** 2
        return Expr(d, name="d(1+sin(1/x))")

    def extrema(self, lo, hi):
        if lo <= 0:
            return 0.0, 2.0
        t0, t1 = 1.0 / hi, 1.0 / lo
        if t1 - t0 >= 2 * math.pi:
            return 0.0, 2.0
        k0 = math.ceil((t0 - math.pi / 2) / math.pi)
        k1 = math.floor((t1 - math.pi / 2) / math.pi)
        ts = [t0, t1] + [math.pi / 2 + k * math.pi for k in range(k0, k1 + 1)]
        vals = [1.0 + math.sin(t) for t in ts]
        return min(vals), max(vals)

    def zeros(self, lo, hi, max_count):
        # zeros at 1/x = 3pi/2 + 2 pi i, listed from the right end inwards
        t_lo = 1.0 / hi
        i = max(0, math.ceil((t_lo - 1.5 * math.pi) / (2 * math.pi)))
        out = []
        truncated = False
        while True:
            x = 1.0 / (math.pi * (1.5 + 2 * i))
            if x < lo:
                break
            if len(out) >= max_count:
                truncated = True
                break
            out.append((x, x))
            i += 1
        if lo <= 0:
            truncated = True
            out.append((0.0, 0.0))
        return sorted(out), truncated

    def monotone_splits(self, lo, hi):
        if lo <= 0 or 1.0 / lo - 1.0 / hi > 2e5:
            return None
        k0 = math.ceil((1.0 / hi - math.pi / 2) / math.pi)
        k1 = math.floor((1.0 / lo - math.pi / 2) / math.pi)
        pts = [1.0 / (math.pi / 2 + k * math.pi) for k in range(max(k0, 0), k1 + 1)]
        return sorted(x for x in pts if lo < x < hi)


class Sine(Piece):
    name = "sine"

    def __init__(self, amp, freq, phase=0.0):
        self.amp, self.freq, self.phase = float(amp), float(freq), float(phase)

    def __repr__(self):
        return f"Sine({self.amp}, {self.freq}, {self.phase})"

    def __call__(self, x):
        return self.amp * np.sin(self.freq * np.asarray(x, dtype=float) + self.phase)

    def deriv(self):
        return Sine(self.amp * self.freq, self.freq, self.phase + math.pi / 2)

    def antideriv(self):
        if self.freq == 0:
            return None
        return Sine(self.amp / self.freq, self.freq, self.phase - math.pi / 2)

    def monotone_splits(self, lo, hi):
        if self.freq == 0 or self.amp == 0:
            return []
        f = abs(self.freq)
        sgn = 1 if self.freq > 0 else -1
        ts = sorted((sgn * lo * f + self.phase * sgn, sgn * hi * f + self.phase * sgn))
        k0 = math.ceil((ts[0] - math.pi / 2) / math.pi)
        k1 = math.floor((ts[1] - math.pi / 2) / math.pi)
        pts = [((math.pi / 2 + k * math.pi) * sgn - self.phase) / self.freq for k in range(k0, k1 + 1)]
        return sorted(x for x in pts if lo < x < hi)


class Expr(Piece):
    """Generic vectorized callable with an optional derivative callable."""

    def __init__(self, f: Callable, df: Callable | None = None, name: str = "expr"):
        self.f, self.df, self.name = f, df, name

    def __repr__(self):
        return f"Expr({self.name})"

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    def deriv(self):
        return Expr(self.df, name=f"d({self.name})") if self.df is not None else None


class Sum(Piece):
    name = "sum"

    def __init__(self, a: Piece, b: Piece):
        self.a, self.b = a, b

    def __call__(self, x):
        return self.a(x) + self.b(x)

    def deriv(self):
        da, db = self.a.deriv(), self.b.deriv()
        return None if da is None or db is None else add_pieces(da, db)

    def antideriv(self):
        A, B = self.a.antideriv(), self.b.antideriv()
        return None if A is None or B is None else add_pieces(A, B)


class Product(Piece):
    name = "product"

    def __init__(self, a: Piece, b: Piece):
        self.a, self.b = a, b

    def __call__(self, x):
        with np.errstate(invalid="ignore"):
            return self.a(x) * self.b(x)

    def limit(self, x):
        la, lb = self.a.limit(x), self.b.limit(x)
        if la == 0 or lb == 0:
            # 0 * inf: fall back to approaching the point from inside the cell
            return Piece.limit(self, x)
        return la * lb

    def deriv(self):
        da, db = self.a.deriv(), self.b.deriv()
        if da is None or db is None:
            return None
        return add_pieces(mul_pieces(da, self.b), mul_pieces(self.a, db))


class Abs(Piece):
    name = "abs"

    def __init__(self, a: Piece):
        self.a = a

    def __call__(self, x):
        return np.abs(self.a(x))

    def limit(self, x):
        return abs(self.a.limit(x))

    def extrema(self, lo, hi):
        m, M = self.a.extrema(lo, hi)
        if m >= 0:
            return m, M
        if M <= 0:
            return -M, -m
        return 0.0, max(-m, M)


class Pow(Piece):
    """``|a| ** q``."""

    name = "pow"

    def __init__(self, a: Piece, q: float):
        self.a, self.q = a, float(q)

    def __call__(self, x):
        return np.abs(self.a(x)) ** self.q


def _remap(p: Polynomial, like: Polynomial) -> Polynomial:
    """Rewrite p in the window variable of ``like`` (affine substitution, Horner order)."""
    off, scl = p.mapparms()
    off2, scl2 = like.mapparms()
    A, B = off - scl * off2 / scl2, scl / scl2
    c = p.coef
    out = np.array([c[-1]])
    for ck in c[-2::-1]:
        out = np.convolve(out, [A, B])
        out[0] += ck
    return Polynomial(out, domain=like.domain, window=like.window)


def _localize(piece: Piece, lo: float, hi: float) -> Piece:
    """Express a polynomial piece in the window variable of its own cell.

    Products and sums of pieces built on very different windows otherwise
    carry coefficients that cancel catastrophically on small cells.
    """
    if not isinstance(piece, Poly) or piece.p.degree() < 1:
        return piece
    if piece.p.domain[0] == lo and piece.p.domain[1] == hi and np.array_equal(piece.p.window, Polynomial.window):
        return piece
    return Poly(_remap(piece.p, Polynomial([0.0], domain=[lo, hi])))


def _aligned(p: Polynomial, q: Polynomial):
    """Bring two polynomials onto one domain map, keeping the non-default one."""
    if np.array_equal(p.domain, q.domain) and np.array_equal(p.window, q.window):
        return p, q
    if np.array_equal(q.domain, Polynomial.domain) and np.array_equal(q.window, Polynomial.window):
        return p, _remap(q, p)
    return _remap(p, q), q


def add_pieces(a: Piece, b: Piece) -> Piece:
    if isinstance(a, Poly) and isinstance(b, Poly):
        return Poly(sum(_aligned(a.p, b.p)))
    if isinstance(a, Poly) and a.is_zero():
        return b
    if isinstance(b, Poly) and b.is_zero():
        return a
    return Sum(a, b)


def mul_pieces(a: Piece, b: Piece) -> Piece:
    if isinstance(a, Poly) and isinstance(b, Poly):
        p, q = _aligned(a.p, b.p)
        return Poly(p * q)
    for s, t in ((a, b), (b, a)):
        if isinstance(s, Poly) and s.p.degree() == 0:
            c = float(s.coeffs[0])
            if c == 0:
                return Poly([0.0])
            if c == 1:
                return t
            if isinstance(t, Power):
                return Power(c * t.coef, t.exponent, t.center, t.side)
            if isinstance(t, Sine):
                return Sine(c * t.amp, t.freq, t.phase)
    if (isinstance(a, Power) and isinstance(b, Power) and a.center == b.center and a.side == b.side):
        return Power(a.coef * b.coef, a.exponent + b.exponent, a.center, a.side)
    return Product(a, b)


# ---------------------------------------------------------------------------
# piecewise functions


def _merge_breakpoints(*arrays) -> np.ndarray:
    pts = np.unique(np.concatenate([np.asarray(a, dtype=float) for a in arrays]))
    if pts.size < 2:
        return pts
    scale = max(1.0, float(np.abs(pts).max()))
    keep = np.concatenate([[True], np.diff(pts) > 1e-13 * scale])
    return pts[keep]


class PiecewiseFunction:
    """Function on ``[breakpoints[0], breakpoints[-1]]`` defined cell by cell.

    At an interior breakpoint the value is taken from the cell on its right
    (the last breakpoint belongs to the last cell); use :meth:`limits` for the
    one-sided values.
    """

    def __init__(self, breakpoints: Sequence[float], pieces: Sequence[Piece]):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be a strictly increasing sequence of length >= 2")
        if len(pieces) != bp.size - 1:
            raise ValueError(f"need {bp.size - 1} pieces, got {len(pieces)}")
        self.breakpoints = bp
        self.pieces = list(pieces)

    # construction helpers
    @classmethod
    def single(cls, lo, hi, piece: Piece):
        return cls([lo, hi], [piece])

    @classmethod
    def constant(cls, lo, hi, value):
        return cls([lo, hi], [Poly([float(value)])])

    @classmethod
    def polynomial(cls, lo, hi, coeffs):
        return cls([lo, hi], [Poly(coeffs)])

    @classmethod
    def from_samples(cls, xs, ys):
        """Linear interpolation through ``(xs, ys)``, one affine piece per cell."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.size != ys.size or xs.size < 2:
            raise ValueError("need matching sample arrays with at least two points")
        pieces = [Poly(Polynomial([0.5 * (ys[k] + ys[k + 1]), 0.5 * (ys[k + 1] - ys[k])],
                                  domain=[xs[k], xs[k + 1]])) for k in range(xs.size - 1)]
        f = cls(xs, pieces)
        f.sampled = True
        return f

    sampled = False

    def __repr__(self):
        return f"PiecewiseFunction({self.domain.lo}..{self.domain.hi}, {len(self.pieces)} pieces)"

    @property
    def domain(self) -> Interval:
        return Interval(float(self.breakpoints[0]), float(self.breakpoints[-1]))

    @property
    def cells(self):
        bp = self.breakpoints
        return [(float(bp[k]), float(bp[k + 1]), self.pieces[k]) for k in range(len(self.pieces))]

    def piece_index(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        if np.any((x < lo) | (x > hi)) or np.any(np.isnan(x)):
            raise OutOfDomain(f"point outside [{lo}, {hi}]")
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def piece_at(self, x: float) -> Piece:
        return self.pieces[int(self.piece_index(x))]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x)
        idx = self.piece_index(xs)
        out = np.empty(xs.shape, dtype=float)
        with np.errstate(all="ignore"):
            for k in np.unique(idx):
                m = idx == k
                out[m] = self.pieces[k](xs[m])
        return float(out[0]) if scalar else out

    def limits(self, x: float) -> tuple[float, float]:
        """(left, right) one-sided limits; NaN where a side lies outside the domain."""
        x = float(x)
        bp = self.breakpoints
        if x < bp[0] or x > bp[-1]:
            raise OutOfDomain(f"{x} outside [{bp[0]}, {bp[-1]}]")
        k = int(np.searchsorted(bp, x, side="left"))
        if k < bp.size and bp[k] == x:
            left = self.pieces[k - 1].limit(x) if k > 0 else math.nan
            right = self.pieces[k].limit(x) if k < len(self.pieces) else math.nan
            return left, right
        v = self.pieces[k - 1].limit(x)
        return v, v

    def half(self, x):
        """Precise representative: mean of one-sided limits, 0 where they are -inf/+inf."""
        x = np.asarray(x, dtype=float)
        out = np.atleast_1d(self(x)).astype(float)
        xs = np.atleast_1d(x)
        interior = self.breakpoints[1:-1]
        hit = np.isin(xs, interior)
        for k in np.nonzero(hit)[0]:
            out[k] = half_value(*self.limits(xs[k]))
        return float(out[0]) if x.ndim == 0 else out

    def jumps(self, tol: float = 1e-12) -> list[tuple[float, float, float]]:
        """Interior breakpoints where the one-sided limits differ."""
        out = []
        for x in self.breakpoints[1:-1]:
            left, right = self.limits(x)
            if not (math.isfinite(left) and math.isfinite(right)):
                if not (left == right):
                    out.append((float(x), left, right))
            elif abs(left - right) > tol * (1 + abs(left) + abs(right)):
                out.append((float(x), left, right))
        return out

    # calculus
    def derivative(self) -> "PiecewiseFunction":
        ds = [p.deriv() for p in self.pieces]
        if any(d is None for d in ds):
            raise MissingDerivative("a piece has no closed-form derivative")
        return PiecewiseFunction(self.breakpoints, ds)

    def antiderivative(self) -> "PiecewiseFunction":
        """Continuous primitive; the first piece keeps its natural constant."""
        out = []
        offset = 0.0
        prev_end = None
        for lo, hi, p in self.cells:
            A = p.antideriv()
            if A is None:
                A = _numeric_primitive(p, lo, hi)
            if prev_end is not None:
                start = A.limit(lo)
                if math.isfinite(start) and math.isfinite(prev_end):
                    offset = prev_end - start
                else:
                    offset = 0.0
                A = add_pieces(A, Poly([offset])) if offset else A
            out.append(A)
            prev_end = A.limit(hi)
        return PiecewiseFunction(self.breakpoints, out)

    # algebra
    def _combine(self, other: "PiecewiseFunction", op) -> "PiecewiseFunction":
        d1, d2 = self.domain, other.domain
        lo, hi = max(d1.lo, d2.lo), min(d1.hi, d2.hi)
        if not lo < hi:
            raise OutOfDomain("domains do not overlap")
        bp = _merge_breakpoints(self.breakpoints, other.breakpoints)
        bp = bp[(bp >= lo) & (bp <= hi)]
        mids = 0.5 * (bp[:-1] + bp[1:])
        ia, ib = self.piece_index(mids), other.piece_index(mids)
        pieces = [op(_localize(self.pieces[a], l, r), _localize(other.pieces[b], l, r))
                  for a, b, l, r in zip(ia, ib, bp[:-1], bp[1:])]
        return PiecewiseFunction(bp, pieces)

    def _scalar(self, c):
        return PiecewiseFunction.constant(self.domain.lo, self.domain.hi, c)

    def __add__(self, other):
        if not isinstance(other, PiecewiseFunction):
            other = self._scalar(other)
        return self._combine(other, add_pieces)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, PiecewiseFunction):
            other = self._scalar(other)
        return self._combine(other, mul_pieces)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, PiecewiseFunction) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __abs__(self):
        """|f|, splitting polynomial cells at their sign changes."""
        bps, pieces = [float(self.breakpoints[0])], []
        for lo, hi, p in self.cells:
            cuts = []
            if isinstance(p, Poly) and not p.is_zero():
                cuts = [z for z in p.real_roots(lo, hi) if lo < z < hi]
            for c in cuts + [hi]:
                if c - bps[-1] <= 1e-13 * max(1.0, abs(c)):
                    continue
                bps.append(c)
                pieces.append(_abs_piece(p, 0.5 * (bps[-2] + c)))
        return PiecewiseFunction(bps, pieces)

    def power(self, q: float) -> "PiecewiseFunction":
        return PiecewiseFunction(self.breakpoints, [Pow(p, q) for p in self.pieces])

    def restrict(self, lo: float, hi: float) -> "PiecewiseFunction":
        d = self.domain
        lo, hi = max(lo, d.lo), min(hi, d.hi)
        if not lo < hi:
            raise OutOfDomain("restriction is empty")
        inner = self.breakpoints[(self.breakpoints > lo) & (self.breakpoints < hi)]
        bp = np.concatenate([[lo], inner, [hi]])
        mids = 0.5 * (bp[:-1] + bp[1:])
        return PiecewiseFunction(bp, [self.pieces[k] for k in self.piece_index(mids)])

    def with_breakpoints(self, extra) -> "PiecewiseFunction":
        d = self.domain
        extra = [e for e in extra if d.lo < e < d.hi]
        bp = _merge_breakpoints(self.breakpoints, extra)
        mids = 0.5 * (bp[:-1] + bp[1:])
        return PiecewiseFunction(bp, [self.pieces[k] for k in self.piece_index(mids)])

    def sample(self, n: int = 1001):
        xs = np.linspace(self.domain.lo, self.domain.hi, n)
        return xs, self(xs)


def _abs_piece(p: Piece, probe: float) -> Piece:
    if isinstance(p, Poly):
        s = p.limit(probe)
        return p if s >= 0 else Poly(-p.p)
    if isinstance(p, Power) and p.coef >= 0:
        return p
    return Abs(p)


def _numeric_primitive(p: Piece, lo: float, hi: float, n: int = 16_385) -> Piece:
    xs = np.linspace(lo, hi, n)
    with np.errstate(all="ignore"):
        ys = np.asarray(p(xs), dtype=float)
    if not np.all(np.isfinite(ys)):
        raise NonIntegrable(f"primitive of {p!r} is not available on [{lo}, {hi}]")
    cum = kernels.cumtrapz(ys, xs)
    return Expr(lambda x: np.interp(x, xs, cum), df=p, name=f"int({getattr(p, 'name', 'f')})")


def half_value(left: float, right: float) -> float:
    """Midpoint of the approximate lower/upper limits (0 on the -inf/+inf set)."""
    if math.isnan(left):
        return right
    if math.isnan(right):
        return left
    lo, hi = min(left, right), max(left, right)
    if lo == -math.inf and hi == math.inf:
        return 0.0
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# weights


class Weight:
    """Nonnegative piecewise function with an optional derivative density."""

    def __init__(self, f: PiecewiseFunction, derivative_density: PiecewiseFunction | None = None,
                 *, auto_derivative: bool = True):
        self.f = f
        if derivative_density is None and auto_derivative:
            try:
                derivative_density = f.derivative()
            except MissingDerivative:
                derivative_density = None
        self.derivative_density = derivative_density
        lows = [p.extrema(lo, hi)[0] for lo, hi, p in f.cells]
        finite = [v for v in lows if not math.isnan(v)]
        self.scale = max((abs(p.extrema(lo, hi)[1]) for lo, hi, p in f.cells
                          if math.isfinite(p.extrema(lo, hi)[1])), default=1.0)
        self.nonneg = all(v >= -1e-12 * max(1.0, self.scale) for v in finite)
        if not self.nonneg:
            raise ValueError("weight takes negative values")

    @property
    def domain(self) -> Interval:
        return self.f.domain

    @property
    def zero_floor(self) -> float:
        """Values at or below this count as zeros (sampled weights only)."""
        return ZERO_THRESHOLD * self.scale if self.f.sampled else 0.0

    def __call__(self, x):
        return self.f(x)

    def is_continuous_on(self, lo: float, hi: float) -> bool:
        return not any(lo < x < hi for x, _, _ in self.f.jumps())

    def __repr__(self):
        return f"Weight({self.f!r})"


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "simpson"
    panels: int = 64
    singular_endpoint_padding: tuple = (1e-3, 1e-4, 1e-5)
    growth_factor: float = 1.5
    exact_closed_forms: bool = True

    def __post_init__(self):
        if self.rule not in ("trapezoid", "simpson"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.panels < 2:
            raise ValueError("panels must be >= 2")
        if self.rule == "simpson" and self.panels % 2:
            raise ValueError("simpson needs an even panel count")
        if not all(d > 0 for d in self.singular_endpoint_padding):
            raise ValueError("padding must be positive")

    def refined(self, factor: int = 2) -> "QuadratureConfig":
        return QuadratureConfig(self.rule, self.panels * factor, self.singular_endpoint_padding,
                                self.growth_factor, self.exact_closed_forms)

    def numeric(self) -> "QuadratureConfig":
        """Same settings with closed-form primitives switched off."""
        return QuadratureConfig(self.rule, self.panels, self.singular_endpoint_padding,
                                self.growth_factor, False)


DEFAULT_QUADRATURE = QuadratureConfig()


class Quad(NamedTuple):
    value: float
    error: float


# ---------------------------------------------------------------------------
# operations


def evaluate(f: PiecewiseFunction, x: float) -> float:
    return float(f(float(x)))


def one_sided_limits(f: PiecewiseFunction, x: float) -> tuple[float, float]:
    return f.limits(x)


def essential_inf(w: Weight, I) -> float:
    I = as_interval(I)
    vals = []
    for lo, hi, p in w.f.cells:
        a, b = max(lo, I.lo), min(hi, I.hi)
        if a < b:
            vals.append(p.extrema(a, b)[0])
    if not vals:
        raise OutOfDomain(f"{I} does not meet the weight's domain")
    return min(vals)


def ess_sup_reciprocal(w: Weight, I) -> float:
    """Essential supremum of 1/w over the open interval I (+inf when w degenerates)."""
    m = essential_inf(w, I)
    if math.isnan(m) or m <= w.zero_floor:
        return math.inf
    return 1.0 / m


def _rule_sum(piece: Piece, lo: float, hi: float, panels: int, rule: str) -> float:
    xs = np.linspace(lo, hi, panels + 1)
    with np.errstate(all="ignore"):
        ys = np.asarray(piece(xs), dtype=float)
    # endpoints come from the cell's own expression: exact one-sided limits
    h = (hi - lo) / panels
    if rule == "simpson":
        return kernels.simpson(ys, h)
    return kernels.trapezoid(ys, h)


def _graded_sum(piece, lo, hi, pad_lo, pad_hi, panels, rule) -> float:
    """Rule sum over [lo+pad_lo, hi-pad_hi] on a grid graded geometrically toward padded ends."""
    a, b = lo + pad_lo, hi - pad_hi
    mid = 0.5 * (lo + hi)
    knots = [a]
    if pad_lo:
        t = pad_lo
        while lo + 10 * t < mid:
            t *= 10
            knots.append(lo + t)
    knots.append(mid)
    right = []
    if pad_hi:
        t = pad_hi
        while hi - 10 * t > mid:
            t *= 10
            right.append(hi - t)
    knots += sorted(right) + [b]
    total = 0.0
    for s, e in zip(knots[:-1], knots[1:]):
        if e > s:
            total += _rule_sum(piece, s, e, panels, rule)
    return total


def _exact_primitive(piece: Piece) -> "Piece | None":
    if isinstance(piece, (Poly, Power, Sine)):
        return piece.antideriv()
    if isinstance(piece, Sum):
        a, b = _exact_primitive(piece.a), _exact_primitive(piece.b)
        return None if a is None or b is None else add_pieces(a, b)
    return None


def _cell_integral(piece: Piece, lo: float, hi: float, q: QuadratureConfig) -> Quad:
    if q.exact_closed_forms:
        A = _exact_primitive(piece)
        if A is not None:
            with np.errstate(all="ignore"):
                va, vb = A.limit(lo), A.limit(hi)
            if math.isfinite(va) and math.isfinite(vb):
                v = vb - va
                return Quad(v, float(4 * np.finfo(float).eps * (abs(va) + abs(vb))))
            if not (math.isnan(va) or math.isnan(vb)):
                raise NonIntegrable(f"primitive of {piece!r} is unbounded on [{lo}, {hi}]")
    vl, vr = piece.limit(lo), piece.limit(hi)
    sing_l, sing_r = not math.isfinite(vl), not math.isfinite(vr)
    if not (sing_l or sing_r):
        coarse = _rule_sum(piece, lo, hi, q.panels, q.rule)
        fine = _rule_sum(piece, lo, hi, 2 * q.panels, q.rule)
        if not math.isfinite(fine):
            raise NonIntegrable(f"integrand not finite on [{lo}, {hi}]")
        return Quad(fine, abs(fine - coarse))
    length = hi - lo
    vals = []
    for d in q.singular_endpoint_padding:
        pad = d * min(1.0, length)
        vals.append(_graded_sum(piece, lo, hi, pad if sing_l else 0.0, pad if sing_r else 0.0,
                                q.panels, q.rule))
    if not all(math.isfinite(v) for v in vals):
        raise NonIntegrable(f"padded integrals not finite on [{lo}, {hi}]")
    return _settle(vals, q.growth_factor, (lo, hi))


def _settle(vals, growth, where) -> Quad:
    """Divergence verdict and extrapolation for the padded sequence."""
    i1, i2, i3 = vals[-3:]
    floor = 1e-300
    if abs(i2) > floor and abs(i3) > growth * abs(i2):
        raise NonIntegrable(f"padded integrals grow by more than {growth}x on {where}")
    d1, d2 = i2 - i1, i3 - i2
    tiny = 1e-13 * (1 + abs(i3))
    if abs(d2) <= tiny:
        return Quad(i3, abs(d2) + tiny)
    if abs(d1) <= tiny or abs(d2) >= 0.9 * abs(d1):
        # increments do not contract: logarithmic or slower divergence
        raise NonIntegrable(f"padded integrals do not settle on {where}")
    rho = d2 / d1
    corr = d2 * rho / (1 - rho)
    return Quad(i3 + corr, abs(corr) + abs(d2) * abs(rho))


def integrate_function(h: PiecewiseFunction, I=None, q: QuadratureConfig = DEFAULT_QUADRATURE) -> Quad:
    """Integral of h over I (default: its domain) with an a posteriori error."""
    d = h.domain
    I = d if I is None else as_interval(I)
    if not d.contains(I):
        raise OutOfDomain(f"{I} is not inside {d}")
    total, err = 0.0, 0.0
    for lo, hi, p in h.cells:
        a, b = max(lo, I.lo), min(hi, I.hi)
        if a >= b:
            continue
        if isinstance(p, Poly) and p.is_zero():
            continue
        r = _cell_integral(p, a, b, q)
        total += r.value
        err += r.error
    return Quad(total, err)


def integrate(f: PiecewiseFunction, g: PiecewiseFunction, I=None,
              q: QuadratureConfig = DEFAULT_QUADRATURE) -> Quad:
    """Integral of f*g over I."""
    return integrate_function(f * g, I, q)


def total_variation_measure(w: Weight, I=None, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """|Dw|(I) for the absolutely continuous part of Dw."""
    if w.derivative_density is None:
        raise MissingDerivative("weight has no derivative density")
    return integrate_function(abs(w.derivative_density), I, q).value


# ---------------------------------------------------------------------------
# spec documents


def counterexample_pieces(beta: float, gamma: float, blocks: int):
    """Breakpoints and pieces of the oscillating block weight on (0, 2)."""
    from .relaxation import counterexample_weight  # local import: avoids a cycle
    f = counterexample_weight(beta, gamma, blocks).f
    return f.breakpoints, f.pieces


def _piece_from_spec(kind: str, params, lo: float, hi: float):
    if kind == "poly":
        coeffs = params["coeffs"] if isinstance(params, dict) else params
        return [lo, hi], [Poly(coeffs)]
    if kind == "constant":
        value = params["value"] if isinstance(params, dict) else params
        return [lo, hi], [Poly([float(value)])]
    if kind == "one_plus_sin_inv":
        return [lo, hi], [OnePlusSinInv()]
    if kind == "power":
        center = float(params.get("center", 0.0))
        side = params.get("side", 1 if lo >= center else -1)
        return [lo, hi], [Power(params.get("coef", 1.0), params["exponent"], center, side)]
    if kind == "sine":
        return [lo, hi], [Sine(params.get("amp", 1.0), params.get("freq", 1.0), params.get("phase", 0.0))]
    if kind == "samples":
        f = PiecewiseFunction.from_samples(params["x"], params["y"])
        return list(f.breakpoints), f.pieces
    if kind == "counterexample":
        bp, pieces = counterexample_pieces(float(params.get("beta", 2.0)), float(params.get("gamma", 0.5)),
                                           int(params.get("blocks", 20)))
        return list(bp), pieces
    raise SpecParseError(f"unknown piece kind {kind!r}")


def function_from_spec(doc: dict) -> PiecewiseFunction:
    """Build a function from ``{"domain": [a, b], "pieces": [{"range", "kind", "params"}]}``."""
    try:
        a, b = (float(v) for v in doc["domain"])
        entries = doc["pieces"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"malformed spec document: {exc}") from exc
    bps: list[float] = []
    pieces: list[Piece] = []
    sampled = False
    for e in entries:
        try:
            lo, hi = (float(v) for v in e.get("range", [a, b]))
            kind = e["kind"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecParseError(f"malformed piece entry {e!r}") from exc
        sampled |= kind == "samples"
        bp, ps = _piece_from_spec(kind, e.get("params", {}), lo, hi)
        if bps and abs(bps[-1] - bp[0]) > 1e-12 * max(1.0, abs(bp[0])):
            raise SpecParseError(f"pieces leave a gap at {bps[-1]}..{bp[0]}")
        bps.extend(bp if not bps else bp[1:])
        pieces.extend(ps)
    if not bps or abs(bps[0] - a) > 1e-12 or abs(bps[-1] - b) > 1e-12:
        raise SpecParseError("pieces do not cover the domain")
    try:
        f = PiecewiseFunction(bps, pieces)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from exc
    f.sampled = sampled
    return f


def weight_from_spec(doc: dict) -> Weight:
    try:
        return Weight(function_from_spec(doc))
    except ValueError as exc:
        raise SpecParseError(str(exc)) from exc


def load_spec_file(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{path}: {exc}") from exc
