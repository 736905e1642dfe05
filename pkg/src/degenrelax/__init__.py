"""Degenerate-weight variational toolkit on intervals."""
from .degeneracy import DegeneracyDecomposition, detect_intervals, local_bound_constant
from .errors import *  # noqa: F401,F403
from .functions import (DEFAULT_QUADRATURE, Interval, PiecewiseFunction, QuadratureConfig, Weight,
                        function_from_spec, integrate, weight_from_spec)
from .hat import HatWeight, build_hat, check_hat_properties
from .kernels import BACKEND
from .muckenhoupt import a1_constant, baldi_poincare_check, baldi_tv, local_growth_check, lsc_envelope
from .pairing import dom_w_membership, dom_w_norm, pairing_apply, pairing_report, pairing_total_variation
from .poincare import batch_verify, pointwise_bounds, poincare_gap, random_piecewise_cubics
from .relaxation import (build_recovery, counterexample_diagnostics, counterexample_weight, lsc_probe,
                         relaxed_functional)

__version__ = "0.1.0"
