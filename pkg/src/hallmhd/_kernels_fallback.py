"""Pure-numpy twin of the compiled kernels in ``_kernels.pyx``.

Expression trees match the compiled lane operation-for-operation so the two
lanes agree bitwise.
"""


def cross3(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


def dot_grad(v, grad, out):
    dim = grad.shape[0]
    if dim == 2:
        out[:] = v[0] * grad[0] + v[1] * grad[1]
    else:
        out[:] = (v[0] * grad[0] + v[1] * grad[1]) + v[2] * grad[2]


def rhs_products(u, b, gu, gb, curlb, du, db, hall):
    dim = gu.shape[0]
    if dim == 2:
        du[:] = (b[0] * gb[0] - u[0] * gu[0]) + (b[1] * gb[1] - u[1] * gu[1])
        db[:] = (b[0] * gu[0] - u[0] * gb[0]) + (b[1] * gu[1] - u[1] * gb[1])
    else:
        du[:] = ((b[0] * gb[0] - u[0] * gu[0]) + (b[1] * gb[1] - u[1] * gu[1])) \
            + (b[2] * gb[2] - u[2] * gu[2])
        db[:] = ((b[0] * gu[0] - u[0] * gb[0]) + (b[1] * gu[1] - u[1] * gb[1])) \
            + (b[2] * gu[2] - u[2] * gb[2])
    cross3(curlb, b, hall)
