"""JIT-compiled recursion kernels with a pure-NumPy fallback.

Set ``BELLGARCH_NO_NUMBA=1`` (or any truthy value) before import to force
the pure-NumPy implementations from :mod:`bellgarch.recursions_python`;
``benchmarks/bench_recursions.py`` times one path against the other.
"""

import os

from . import recursions_python as _py
from .recursions_python import FAMILY_BELL, FAMILY_POISSON, LAMBDA_CAP

__all__ = [
    "FAMILY_BELL",
    "FAMILY_POISSON",
    "LAMBDA_CAP",
    "HAS_NUMBA",
    "USING_NUMBA",
    "lambda_path_linear",
    "lambda_path_nonlinear",
    "loglik_from_path",
    "cml_parts_linear11",
    "cml_parts_nonlinear11",
]

_DISABLED = os.environ.get("BELLGARCH_NO_NUMBA", "").strip().lower() not in (
    "",
    "0",
    "false",
)

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and not _DISABLED

if USING_NUMBA:
    _jit = njit(cache=True)
    lambda_path_linear = _jit(_py.lambda_path_linear)
    lambda_path_nonlinear = _jit(_py.lambda_path_nonlinear)
    loglik_from_path = _jit(_py.loglik_from_path)
    cml_parts_linear11 = _jit(_py.cml_parts_linear11)
    cml_parts_nonlinear11 = _jit(_py.cml_parts_nonlinear11)
else:
    lambda_path_linear = _py.lambda_path_linear
    lambda_path_nonlinear = _py.lambda_path_nonlinear
    loglik_from_path = _py.loglik_from_path
    cml_parts_linear11 = _py.cml_parts_linear11
    cml_parts_nonlinear11 = _py.cml_parts_nonlinear11
