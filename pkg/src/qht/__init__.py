"""Finite-dimensional quantum hypothesis testing, entropic large deviations and
full counting statistics of entropy flow, with quasi-free fermion models."""

__version__ = "0.1.0"

from .operators import HermitianOperator, as_operator
from .qstate import PositiveFunctional, SpectralMeasure, renyi_relative_entropy
from .testing import optimal_test, report
from .ldp import EntropicFunction, legendre

__all__ = [
    "__version__",
    "HermitianOperator",
    "as_operator",
    "PositiveFunctional",
    "SpectralMeasure",
    "renyi_relative_entropy",
    "optimal_test",
    "report",
    "EntropicFunction",
    "legendre",
]
