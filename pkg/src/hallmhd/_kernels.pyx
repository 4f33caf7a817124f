# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused pointwise product kernels (compiled lane).

Each function mirrors its numpy twin in ``_kernels_fallback`` down to the
order of floating-point operations, so both lanes produce bitwise identical
output (the extension is built with -ffp-contract=off for this reason).
"""

import numpy as np

cimport cython


@cython.boundscheck(False)
@cython.wraparound(False)
def cross3(double[:, ::1] a, double[:, ::1] b, double[:, ::1] out):
    """out = a x b for (3, m) arrays of collocation values."""
    cdef Py_ssize_t m = a.shape[1]
    cdef Py_ssize_t i
    for i in range(m):
        out[0, i] = a[1, i] * b[2, i] - a[2, i] * b[1, i]
        out[1, i] = a[2, i] * b[0, i] - a[0, i] * b[2, i]
        out[2, i] = a[0, i] * b[1, i] - a[1, i] * b[0, i]


@cython.boundscheck(False)
@cython.wraparound(False)
def dot_grad(double[:, ::1] v, double[:, :, ::1] grad, double[:, ::1] out):
    """out[c] = sum_d v[d] * grad[d, c] (directional derivative v . grad f)."""
    cdef Py_ssize_t dim = grad.shape[0]
    cdef Py_ssize_t ncomp = grad.shape[1]
    cdef Py_ssize_t m = grad.shape[2]
    cdef Py_ssize_t c, i
    if dim == 2:
        for c in range(ncomp):
            for i in range(m):
                out[c, i] = v[0, i] * grad[0, c, i] + v[1, i] * grad[1, c, i]
    else:
        for c in range(ncomp):
            for i in range(m):
                out[c, i] = (v[0, i] * grad[0, c, i] + v[1, i] * grad[1, c, i]) \
                    + v[2, i] * grad[2, c, i]


@cython.boundscheck(False)
@cython.wraparound(False)
def rhs_products(double[:, ::1] u, double[:, ::1] b,
                 double[:, :, ::1] gu, double[:, :, ::1] gb,
                 double[:, ::1] curlb,
                 double[:, ::1] du, double[:, ::1] db, double[:, ::1] hall):
    """All quadratic collocation products of one Hall-MHD right-hand side.

    du[c]   = sum_d (b[d]*gb[d,c] - u[d]*gu[d,c])   (-u.grad u + b.grad b)
    db[c]   = sum_d (b[d]*gu[d,c] - u[d]*gb[d,c])   (-u.grad b + b.grad u)
    hall    = curlb x b
    """
    cdef Py_ssize_t dim = gu.shape[0]
    cdef Py_ssize_t m = u.shape[1]
    cdef Py_ssize_t c, i
    cdef double t0, t1
    if dim == 2:
        for c in range(3):
            for i in range(m):
                t0 = b[0, i] * gb[0, c, i] - u[0, i] * gu[0, c, i]
                t1 = b[1, i] * gb[1, c, i] - u[1, i] * gu[1, c, i]
                du[c, i] = t0 + t1
                t0 = b[0, i] * gu[0, c, i] - u[0, i] * gb[0, c, i]
                t1 = b[1, i] * gu[1, c, i] - u[1, i] * gb[1, c, i]
                db[c, i] = t0 + t1
    else:
        for c in range(3):
            for i in range(m):
                t0 = b[0, i] * gb[0, c, i] - u[0, i] * gu[0, c, i]
                t1 = b[1, i] * gb[1, c, i] - u[1, i] * gu[1, c, i]
                du[c, i] = (t0 + t1) + (b[2, i] * gb[2, c, i] - u[2, i] * gu[2, c, i])
                t0 = b[0, i] * gu[0, c, i] - u[0, i] * gb[0, c, i]
                t1 = b[1, i] * gu[1, c, i] - u[1, i] * gb[1, c, i]
                db[c, i] = (t0 + t1) + (b[2, i] * gu[2, c, i] - u[2, i] * gb[2, c, i])
    for i in range(m):
        hall[0, i] = curlb[1, i] * b[2, i] - curlb[2, i] * b[1, i]
        hall[1, i] = curlb[2, i] * b[0, i] - curlb[0, i] * b[2, i]
        hall[2, i] = curlb[0, i] * b[1, i] - curlb[1, i] * b[0, i]
