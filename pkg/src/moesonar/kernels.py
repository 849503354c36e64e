"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is used. Set ``MOESONAR_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from moesonar import _kernels_py
from moesonar._kernels_py import (  # noqa: F401
    GAUSS_EXP,
    RATIONAL_HALF,
    TABULATED,
    UNIFORM_WINDOW,
    QuadratureBudgetError,
)

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("MOESONAR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from moesonar import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

simpson_gauss = _impl.simpson_gauss
simpson_callable = _impl.simpson_callable
kalman_cv = _impl.kalman_cv

__all__ = [
    "BACKEND",
    "GAUSS_EXP",
    "RATIONAL_HALF",
    "TABULATED",
    "UNIFORM_WINDOW",
    "QuadratureBudgetError",
    "kalman_cv",
    "simpson_callable",
    "simpson_gauss",
]
