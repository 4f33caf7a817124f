"""Kernel lane selection: compiled extension if available, numpy otherwise.

The hot collocation-space products (advection dot products, cross products,
and the fused right-hand-side assembly) are the only non-FFT work in the
stepping loop.  ``HALLMHD_PURE_PYTHON=1`` forces the numpy lane.  Both lanes
produce bitwise identical arrays.
"""

import os

import numpy as np

from . import _kernels_fallback

if os.environ.get("HALLMHD_PURE_PYTHON"):
    _impl = _kernels_fallback
    HAVE_EXT = False
else:
    try:
        from . import _kernels_ext as _impl

        HAVE_EXT = True
    except ImportError:
        _impl = _kernels_fallback
        HAVE_EXT = False


def active_lane() -> str:
    return "cython" if _impl is not _kernels_fallback else "numpy"


def _flat2(a):
    return a.reshape(a.shape[0], -1)


def _flat3(a):
    return a.reshape(a.shape[0], a.shape[1], -1)


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise cross product of two (3, ...) collocation arrays."""
    out = np.empty_like(a)
    _impl.cross3(_flat2(a), _flat2(b), _flat2(out))
    return out


def dot_grad(v: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """v . grad f from v (dim, ...) and grad (dim, ncomp, ...) arrays."""
    out = np.empty(grad.shape[1:], dtype=grad.dtype)
    _impl.dot_grad(_flat2(v), _flat3(grad), _flat2(out))
    return out


def rhs_products(u, b, gu, gb, curlb):
    """Fused quadratic products of the Hall-MHD right-hand side.

    Returns (du, db, hall) collocation arrays:
    du = -u.grad u + b.grad b, db = -u.grad b + b.grad u, hall = (curl b) x b.
    """
    du = np.empty_like(u)
    db = np.empty_like(u)
    hall = np.empty_like(u)
    _impl.rhs_products(_flat2(u), _flat2(b), _flat3(gu), _flat3(gb),
                       _flat2(curlb), _flat2(du), _flat2(db), _flat2(hall))
    return du, db, hall
