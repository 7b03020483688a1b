"""Calculus on time scales: delta, nabla and diamond-alpha derivatives and
integrals, Grüss/Jensen-type inequality checkers and a property fuzzer."""

from .calculus import (
    IntegralParts,
    QuadratureConfig,
    delta_derivative,
    delta_integral,
    diamond_derivative,
    diamond_integral,
    ftc_defect,
    integral_parts,
    nabla_derivative,
    nabla_integral,
)
from .cli import parse_scale_spec
from .errors import *  # noqa: F401,F403
from .expr import parse_expression, to_text
from .functions import CallableFunction, ExprFunction, ScaleFunction, TableFunction, as_function
from .fuzz import FuzzConfig, FuzzOutcome, run_property_suite, shrink
from .inequalities import (
    BoundsBox,
    InequalityReport,
    check_gruss,
    check_jensen,
    check_mean_square_bound,
    discrete_gruss,
    quantum_gruss,
)
from .kernels import BACKEND
from .timescale import PointClass, TimeScale

__version__ = "0.1.0"
