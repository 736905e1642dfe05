import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from degenrelax import _pykernels as py
from degenrelax import kernels

try:
    from degenrelax import _ckernels as cy
except ImportError:  # extension not built
    cy = None

needs_cy = pytest.mark.skipif(cy is None, reason="compiled kernels not built")
finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_pure_env_forces_fallback():
    env = dict(os.environ, DEGENRELAX_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from degenrelax.kernels import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_rules_on_polynomials():
    x = np.linspace(0, 1, 65)
    assert kernels.simpson(x**3, x[1] - x[0]) == pytest.approx(0.25, abs=1e-15)
    assert kernels.trapezoid(x, x[1] - x[0]) == pytest.approx(0.5, abs=1e-15)
    c = kernels.cumtrapz(2 * x, x)
    assert c[0] == 0.0 and np.allclose(c, x**2, atol=1e-3)


def test_running_min_and_dips():
    assert list(kernels.running_min(np.array([3.0, 4.0, 1.0, 2.0]))) == [3.0, 3.0, 1.0, 1.0]
    assert list(kernels.isolated_dips(np.array([1.0, 1.0, 0.0, 1.0, 1.0]), 1e-9)) == [2]


@needs_cy
@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.integers(3, 60).map(lambda n: 2 * n + 1), elements=finite), st.floats(1e-3, 1.0))
def test_backends_agree_on_rules(y, h):
    assert cy.trapezoid(y, h) == pytest.approx(py.trapezoid(y, h), rel=1e-12, abs=1e-9)
    assert cy.simpson(y, h) == pytest.approx(py.simpson(y, h), rel=1e-12, abs=1e-9)
    x = np.cumsum(np.full(y.size, h))
    assert np.allclose(cy.cumtrapz(y, x), py.cumtrapz(y, x), rtol=1e-12, atol=1e-9)


@needs_cy
@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.integers(1, 80), elements=finite))
def test_backends_agree_on_scans(y):
    assert np.array_equal(cy.running_min(y), py.running_min(y))
    assert list(cy.isolated_dips(y, 1e-9)) == list(py.isolated_dips(y, 1e-9))


@needs_cy
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 8)), elements=st.floats(1e-3, 10.0)),
       st.floats(1.1, 4.0))
def test_backends_agree_on_growth(mass, expo):
    radii = np.linspace(0.1, 1.0, mass.shape[1])
    mass = np.sort(mass, axis=1)
    a = cy.max_growth_ratio(mass, radii, expo)
    b = py.max_growth_ratio(mass, radii, expo)
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert tuple(a[1:]) == tuple(b[1:])
