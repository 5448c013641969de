"""Backend selection for the Gram-matrix scans.

The compiled extension ``dtcs._kernels`` is used when it was built;
otherwise (or when ``DTCS_PURE_PYTHON`` is set to a non-empty value) the numpy
implementation in ``dtcs._kernels_py`` is used. Both expose the same three
functions and must agree exactly.
"""
import os

import numpy as np

from . import _kernels_py as python_backend

try:
    from . import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("DTCS_PURE_PYTHON"):
    _impl = compiled_backend
    BACKEND = "compiled"
else:
    _impl = python_backend
    BACKEND = "python"


def _prepare(G):
    return np.ascontiguousarray(G, dtype=np.float64)


def cumulative_topk(G, d, k):
    return _impl.cumulative_topk(_prepare(G), int(d), int(k))


def separation_maxima(G):
    return _impl.separation_maxima(_prepare(G))


def diagonal_spread(G):
    return float(_impl.diagonal_spread(_prepare(G)))
