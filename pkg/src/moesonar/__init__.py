"""Measures of effectiveness for tracking and identification, with a two-sensor sonar test-bed."""
from moesonar.kernels import BACKEND
from moesonar.moe_core import Moe, MoeError, moe_integrate

__version__ = "0.1.0"
__all__ = ["BACKEND", "Moe", "MoeError", "moe_integrate", "__version__"]
