"""
Killing-Poisson toolkit - numerical checks for Poisson tensors on Riemannian charts
"""

__version__ = "1.0.0"
__author__ = "Killing-Poisson Toolkit Team"
__license__ = "MIT"

from .checks import CheckReport, SampleGrid, run_check
from .config import ChartConfig, LieAlgebraConfig
from .expr import ScalarExpr, parse
from .fields import ChartModel, PointFrame
from .liealg import LieAlgebraModel, lie_pipeline

__all__ = [
    "ChartConfig",
    "ChartModel",
    "CheckReport",
    "LieAlgebraConfig",
    "LieAlgebraModel",
    "PointFrame",
    "SampleGrid",
    "ScalarExpr",
    "lie_pipeline",
    "parse",
    "run_check",
]
