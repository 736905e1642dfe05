import numpy as np
import pytest

from degenrelax.degeneracy import detect_intervals
from degenrelax.functions import PiecewiseFunction, Poly, Weight
from degenrelax.hat import build_hat
from degenrelax.relaxation import counterexample_weight


def quartic() -> Weight:
    return Weight(PiecewiseFunction.polynomial(-2.0, 2.0, [1, 0, -2, 0, 1]))


@pytest.fixture(scope="session")
def quartic_setup():
    w = quartic()
    dec = detect_intervals(w)
    return w, dec, build_hat(w, dec)


@pytest.fixture(scope="session")
def block_setup():
    w = counterexample_weight(2.0, 0.5, 20)
    dec = detect_intervals(w)
    return w, dec, build_hat(w, dec)


@pytest.fixture(scope="session")
def identity():
    return PiecewiseFunction.polynomial(-2.0, 2.0, [0, 1])


def bump(c: float, r: float, lo: float = -2.0, hi: float = 2.0) -> PiecewiseFunction:
    """(1 - ((x - c)/r)^2)^2 on (c - r, c + r), zero elsewhere."""
    s = np.polynomial.Polynomial([-c / r, 1 / r])
    core = Poly((1 - s**2) ** 2)
    return PiecewiseFunction([lo, c - r, c + r, hi], [Poly([0.0]), core, Poly([0.0])])


ACCEPTANCE = {}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
