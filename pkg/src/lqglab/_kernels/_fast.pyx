# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the reference kernels (see _reference.py).

Same arithmetic, same random-number consumption order per walker, so
trajectories match the pure-Python backend.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def srw_advance(cnp.uint8_t[::1] dirs, long long x0, long long y0, long long max_r2):
    cdef Py_ssize_t m = dirs.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] xs = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ys = np.empty(m, dtype=np.int64)
    cdef long long x = x0, y = y0
    cdef Py_ssize_t k
    cdef int code
    for k in range(m):
        code = dirs[k]
        if code == 0:
            x += 1
        elif code == 1:
            x -= 1
        elif code == 2:
            y += 1
        else:
            y -= 1
        xs[k] = x
        ys[k] = y
        if x * x + y * y >= max_r2:
            return xs[: k + 1], ys[: k + 1], True
    return xs, ys, False


cdef inline double _bilin(double[:, ::1] a, double fx, double fy) nogil:
    cdef Py_ssize_t nx = a.shape[0], ny = a.shape[1]
    cdef Py_ssize_t i0, j0
    cdef double tx, ty
    if fx < 0:
        fx = 0
    elif fx > nx - 1:
        fx = nx - 1
    if fy < 0:
        fy = 0
    elif fy > ny - 1:
        fy = ny - 1
    i0 = <Py_ssize_t>floor(fx)
    if i0 > nx - 2:
        i0 = nx - 2
    j0 = <Py_ssize_t>floor(fy)
    if j0 > ny - 2:
        j0 = ny - 2
    tx = fx - i0
    ty = fy - j0
    return (
        a[i0, j0] * (1 - tx) * (1 - ty)
        + a[i0 + 1, j0] * tx * (1 - ty)
        + a[i0, j0 + 1] * (1 - tx) * ty
        + a[i0 + 1, j0 + 1] * tx * ty
    )


def wos_advance(
    double[::1] px,
    double[::1] py,
    cnp.int8_t[::1] status,
    double[:, ::1] dist,
    double origin,
    double pixel,
    double safety,
    double capture,
    double boundary_band,
    double[:, ::1] cos_t,
    double[:, ::1] sin_t,
):
    cdef Py_ssize_t w, k, nw = px.shape[0], nk = cos_t.shape[1]
    cdef double x, y, d, rb, jump
    with nogil:
        for w in range(nw):
            if status[w] != 0:
                continue
            x = px[w]
            y = py[w]
            for k in range(nk):
                d = _bilin(dist, (x - origin) / pixel - 0.5, (y - origin) / pixel - 0.5) - safety
                rb = 1.0 - sqrt(x * x + y * y)
                if rb <= boundary_band:
                    status[w] = 2
                    break
                if d <= capture:
                    status[w] = 1
                    break
                jump = d if d < rb else rb
                x = x + jump * cos_t[w, k]
                y = y + jump * sin_t[w, k]
            px[w] = x
            py[w] = y
    return
