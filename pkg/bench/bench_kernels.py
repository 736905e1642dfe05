"""Compare compiled and pure-Python kernels on representative array sizes.

Run: python3 bench/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from degenrelax import _pykernels as py

try:
    from degenrelax import _ckernels as cy
except ImportError:  # extension not built
    cy = None


def cases(rng):
    y = rng.normal(size=2049)
    x = np.cumsum(rng.uniform(0.1, 1.0, 2049))
    mass = np.sort(rng.uniform(0.1, 10.0, (21, 60)), axis=1)
    radii = np.logspace(-3, -0.3, 60)
    return {
        "trapezoid(2049)": lambda k: k.trapezoid(y, 1e-3),
        "simpson(2049)": lambda k: k.simpson(y, 1e-3),
        "cumtrapz(2049)": lambda k: k.cumtrapz(y, x),
        "running_min(4097)": lambda k: k.running_min(np.concatenate([y, y])),
        "max_growth_ratio(21x60)": lambda k: k.max_growth_ratio(mass, radii, 2.0),
        "isolated_dips(2049)": lambda k: k.isolated_dips(y, 1e-9),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':26s} {'python us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        tp = min(timeit.repeat(lambda: fn(py), number=args.repeat, repeat=3)) / args.repeat * 1e6
        if cy is None:
            print(f"{name:26s} {tp:10.1f} {'n/a':>10s} {'n/a':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=args.repeat, repeat=3)) / args.repeat * 1e6
        print(f"{name:26s} {tp:10.1f} {tc:10.1f} {tp / tc:8.2f}")


if __name__ == "__main__":
    main()
