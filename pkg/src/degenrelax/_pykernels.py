"""Reference implementations of the numeric kernels (numpy only).

These mirror ``_ckernels.pyx`` one for one and are used whenever the compiled
module is unavailable or ``DEGENRELAX_PURE=1`` is set.
"""
import numpy as np


def trapezoid(y, h):
    y = np.asarray(y, dtype=float)
    n = y.shape[0] - 1
    if n < 1:
        return 0.0
    return float(h * (0.5 * y[0] + y[1:n].sum() + 0.5 * y[n]))


def simpson(y, h):
    y = np.asarray(y, dtype=float)
    n = y.shape[0] - 1
    if n < 2 or n % 2:
        raise ValueError("simpson needs an even number of panels")
    return float(h / 3.0 * (y[0] + 4.0 * y[1:n:2].sum() + 2.0 * y[2:n - 1:2].sum() + y[n]))


def cumtrapz(y, x):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(y)
    if y.shape[0] > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def running_min(y):
    return np.minimum.accumulate(np.asarray(y, dtype=float))


def max_growth_ratio(mass, radii, expo):
    """Largest ``mass[i,j] / mass[i,k] * (r_k / r_j)**expo`` over ``j <= k``.

    Returns ``(ratio, i, j, k)``; pairs with zero outer mass are skipped.
    """
    mass = np.asarray(mass, dtype=float)
    radii = np.asarray(radii, dtype=float)
    scale = (radii[None, :] / radii[:, None]) ** expo  # [j, k] = (r_k / r_j)**expo
    best = (-np.inf, -1, -1, -1)
    upper = np.triu(np.ones((radii.size, radii.size), dtype=bool))
    for i in range(mass.shape[0]):
        inner = mass[i][:, None]
        outer = mass[i][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(upper & (outer > 0), inner / outer * scale, -np.inf)
        j, k = np.unravel_index(np.argmax(r), r.shape)
        if r[j, k] > best[0]:
            best = (float(r[j, k]), i, int(j), int(k))
    return best


def isolated_dips(y, rel):
    """Indices whose value sits below both neighbours by more than ``rel``."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 3:
        return np.zeros(0, dtype=np.int64)
    mid = y[1:-1]
    nb = np.minimum(y[:-2], y[2:])
    return (np.nonzero(mid < nb - rel * np.abs(nb))[0] + 1).astype(np.int64)
