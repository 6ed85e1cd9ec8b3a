"""Fractional free convolution and the differentiation flow of polynomial roots.

Rotationally invariant measures are stored by their radial quantile
(:class:`RadialQuantile`); free powers, products, commutators and the
differentiation flow act on that representation directly.
"""

from .catalog import FAMILY_NAMES, FamilyTag, make
from .diffflow import FlowParams, bridge_measure, bridge_residual, clt_error, flow
from .errors import (
    CflError,
    ConfigError,
    ConvergenceError,
    DegreeDropError,
    DomainError,
    InsufficientDataError,
    InvalidTransformError,
    SingularityError,
    UnsupportedInputError,
)
from .freeops import commutator, oplus_power, product
from .kz import CoefProfile, legendre_fenchel, measure_to_profile, profile_to_measure
from .measure import RadialQuantile, RootSample, cdf_at, default_grid, dilate, quantile_at, sq, sq_inv
from .pde import PdeState
from .polylab import LogCoeffPoly, aberth_roots
from .report import ExperimentReport, MetricRow
from .transforms import STransform, quantile_from_s, s_from_quantile

__version__ = "0.1.0"
