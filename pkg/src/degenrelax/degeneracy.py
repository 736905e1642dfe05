"""Decomposition of the set where 1/w is locally bounded into open intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import EmptyDecomposition, NotCompactlyContained
from .functions import ZERO_THRESHOLD, Interval, Weight, as_interval, ess_sup_reciprocal

DEFAULT_MAX_INTERVALS = 64
DEFAULT_RESOLUTION = 1e-6


@dataclass(frozen=True)
class DegeneracyDecomposition:
    intervals: tuple
    n_w: int | None
    truncated: bool
    zero_set_points: tuple
    domain: Interval
    resolution: float = DEFAULT_RESOLUTION

    @property
    def finite(self) -> bool:
        return not self.truncated

    def index_of(self, x: float) -> int | None:
        for i, I in enumerate(self.intervals):
            if I.lo < x < I.hi:
                return i
        return None

    def touching_pairs(self) -> list[tuple[int, int]]:
        return [(i, i + 1) for i in range(len(self.intervals) - 1)
                if self.intervals[i].hi == self.intervals[i + 1].lo]

    @property
    def measure(self) -> float:
        return sum(I.length for I in self.intervals)


def _numeric_zeros(p, lo, hi, resolution, scale):
    """Grid scan plus bounded refinement for pieces without an analytic zero finder."""
    n = max(20_001, min(2_000_001, int(math.ceil((hi - lo) / max(resolution, 1e-12))) + 1))
    n = min(n, 200_001)
    xs = np.linspace(lo, hi, n)
    with np.errstate(all="ignore"):
        ys = np.asarray(p(xs), dtype=float)
    ys = np.where(np.isnan(ys), np.inf, ys)
    floor = ZERO_THRESHOLD * scale
    out = []
    low = ys <= floor
    k = 0
    while k < n:
        if low[k]:
            j = k
            while j + 1 < n and low[j + 1]:
                j += 1
            out.append((float(xs[k]), float(xs[j])) if j > k else (float(xs[k]), float(xs[k])))
            k = j + 1
        else:
            k += 1
    # local minima that dip close to zero between grid nodes
    interior = np.nonzero((ys[1:-1] <= ys[:-2]) & (ys[1:-1] <= ys[2:]) & ~low[1:-1])[0] + 1
    for k in interior:
        r = minimize_scalar(lambda t: float(p(np.array([t]))[0]), bounds=(xs[k - 1], xs[k + 1]),
                            method="bounded", options={"xatol": resolution * 0.1})
        if r.fun <= 1e-8 * scale:
            out.append((float(r.x), float(r.x)))
    return out


def _sampled_zeros(f, lo, hi, scale):
    bp = f.breakpoints
    sel = (bp >= lo) & (bp <= hi)
    xs = bp[sel]
    ys = f(xs)
    low = ys <= ZERO_THRESHOLD * scale
    out = []
    k = 0
    while k < xs.size:
        if low[k]:
            j = k
            while j + 1 < xs.size and low[j + 1]:
                j += 1
            out.append((float(xs[k]), float(xs[j])))
            k = j + 1
        else:
            k += 1
    return out


def _merge(segments):
    segs = sorted(segments)
    out = []
    for s, e in segs:
        if out and s <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], e))
        else:
            out.append((s, e))
    return out


def detect_intervals(w: Weight, omega=None, resolution: float = DEFAULT_RESOLUTION,
                     max_intervals: int = DEFAULT_MAX_INTERVALS) -> DegeneracyDecomposition:
    """Locate the maximal open set where 1/w is locally bounded."""
    omega = w.domain if omega is None else as_interval(omega)
    scale = w.scale
    zero_segments = []
    blocked = []  # regions holding infinitely many zeros, excluded without listing them
    truncated = False
    if w.f.sampled:
        zero_segments += _sampled_zeros(w.f, omega.lo, omega.hi, scale)
    else:
        for lo, hi, p in w.f.cells:
            lo, hi = max(lo, omega.lo), min(hi, omega.hi)
            if lo >= hi:
                continue
            found = p.zeros(lo, hi, max_intervals)
            if found is None:
                zero_segments += _numeric_zeros(p, lo, hi, resolution, scale)
                continue
            segs, trunc = found
            if trunc:
                truncated = True
                pts = [s for s, _ in segs if s > lo]
                blocked.append((lo, min(pts) if pts else hi))
                segs = [s for s in segs if s[0] > lo]
            zero_segments += segs
    # a cell whose one-sided limit vanishes makes 1/w unbounded at its end
    for x in w.f.breakpoints:
        if not omega.lo <= x <= omega.hi:
            continue
        left, right = w.f.limits(x)
        if any(v <= w.zero_floor for v in (left, right) if not math.isnan(v)):
            zero_segments.append((float(x), float(x)))
    zero_segments = _merge(zero_segments)
    cuts = _merge(zero_segments + blocked)
    intervals = []
    start = omega.lo
    for s, e in cuts:
        if s > start:
            intervals.append(Interval(start, s))
        start = max(start, e)
    if start < omega.hi:
        intervals.append(Interval(start, omega.hi))
    if not intervals:
        raise EmptyDecomposition("1/w is nowhere locally bounded on the domain")
    points = sorted({p for s, e in zero_segments for p in (s, e)})
    return DegeneracyDecomposition(
        intervals=tuple(intervals),
        n_w=None if truncated else len(intervals),
        truncated=truncated,
        zero_set_points=tuple(points),
        domain=omega,
        resolution=resolution,
    )


def local_bound_constant(w: Weight, dec: DegeneracyDecomposition, K) -> float:
    """c_{i,K} = ess sup of 1/w over a compact K inside one interval."""
    K = as_interval(K)
    for I in dec.intervals:
        if I.lo < K.lo and K.hi < I.hi:
            return ess_sup_reciprocal(w, K)
    raise NotCompactlyContained(f"[{K.lo}, {K.hi}] is not compactly inside any detected interval")
