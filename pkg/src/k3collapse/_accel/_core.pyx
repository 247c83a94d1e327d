# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Carlson R_F batches and correspondence-search loops.

Contracts match _fallback.py exactly; tests compare the two backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "complex.h":
    double complex csqrt(double complex) nogil
    double cabs(double complex) nogil


cdef inline double complex _rf_one(double complex x, double complex y,
                                   double complex z, int max_iter) nogil:
    cdef double complex a0 = (x + y + z) / 3.0
    cdef double q = cabs(a0 - x)
    cdef double tmp = cabs(a0 - y)
    if tmp > q:
        q = tmp
    tmp = cabs(a0 - z)
    if tmp > q:
        q = tmp
    q *= 404.0
    cdef double complex a = a0
    cdef double pow4 = 1.0
    cdef double complex sx, sy, sz, lam
    cdef int it
    for it in range(max_iter):
        if pow4 * q < cabs(a):
            break
        sx = csqrt(x)
        sy = csqrt(y)
        sz = csqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = (x + lam) * 0.25
        y = (y + lam) * 0.25
        z = (z + lam) * 0.25
        a = (a + lam) * 0.25
        pow4 *= 0.25
    cdef double complex X = (a - x) / a
    cdef double complex Y = (a - y) / a
    cdef double complex Z = -X - Y
    cdef double complex e2 = X * Y - Z * Z
    cdef double complex e3 = X * Y * Z
    cdef double complex s = (9240.0 - 924.0 * e2 + 385.0 * e2 * e2
                             + 660.0 * e3 - 630.0 * e2 * e3)
    return s / (9240.0 * csqrt(a))


def carlson_rf(x, y, z, int max_iter=80):
    """Elementwise Carlson symmetric integral R_F over complex arrays."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] xa, ya, za, out
    xb, yb, zb = np.broadcast_arrays(
        np.asarray(x, dtype=np.complex128),
        np.asarray(y, dtype=np.complex128),
        np.asarray(z, dtype=np.complex128),
    )
    shape = xb.shape
    xa = np.ascontiguousarray(xb).ravel()
    ya = np.ascontiguousarray(yb).ravel()
    za = np.ascontiguousarray(zb).ravel()
    out = np.empty(xa.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i, n = xa.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _rf_one(xa[i], ya[i], za[i], max_iter)
    return out.reshape(shape)


def pair_distortion(cnp.ndarray[cnp.float64_t, ndim=2] d1,
                    cnp.ndarray[cnp.float64_t, ndim=2] d2,
                    cnp.ndarray[cnp.int64_t, ndim=1] xs,
                    cnp.ndarray[cnp.int64_t, ndim=1] ys):
    """Max |d1[xs_i, xs_j] - d2[ys_i, ys_j]| over all index pairs."""
    cdef Py_ssize_t k = xs.shape[0]
    cdef Py_ssize_t i, j
    cdef double best = 0.0, dev
    with nogil:
        for i in range(k):
            for j in range(k):
                dev = d1[xs[i], xs[j]] - d2[ys[i], ys[j]]
                if dev < 0:
                    dev = -dev
                if dev > best:
                    best = dev
    return best


def best_reassignment(cnp.ndarray[cnp.float64_t, ndim=2] d1,
                      cnp.ndarray[cnp.float64_t, ndim=2] d2,
                      cnp.ndarray[cnp.int64_t, ndim=1] xs,
                      cnp.ndarray[cnp.int64_t, ndim=1] ys,
                      Py_ssize_t r,
                      cnp.ndarray[cnp.int64_t, ndim=1] candidates):
    """Best replacement of ys[r] among candidates by row distortion."""
    cdef Py_ssize_t k = xs.shape[0]
    cdef Py_ssize_t nc = candidates.shape[0]
    cdef Py_ssize_t c, s
    cdef double best = -1.0, rowmax, dev
    cdef Py_ssize_t best_c = 0
    cdef cnp.int64_t xr = xs[r]
    with nogil:
        for c in range(nc):
            rowmax = 0.0
            for s in range(k):
                if s == r:
                    continue
                dev = d1[xr, xs[s]] - d2[candidates[c], ys[s]]
                if dev < 0:
                    dev = -dev
                if dev > rowmax:
                    rowmax = dev
                    if best >= 0.0 and rowmax >= best:
                        break
            if best < 0.0 or rowmax < best:
                best = rowmax
                best_c = c
    return int(candidates[best_c]), float(best)


def min_torus_distance(cnp.ndarray[cnp.float64_t, ndim=2] delta,
                       cnp.ndarray[cnp.float64_t, ndim=2] gram,
                       cnp.ndarray[cnp.float64_t, ndim=2] shifts):
    """Min over shifts of sqrt((delta+s)^T gram (delta+s)), per delta row."""
    cdef Py_ssize_t n = delta.shape[0]
    cdef Py_ssize_t k = delta.shape[1]
    cdef Py_ssize_t m = shifts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, s, p, q
    cdef double bestq, acc, vi
    cdef double v[8]
    with nogil:
        for i in range(n):
            bestq = -1.0
            for s in range(m):
                for p in range(k):
                    v[p] = delta[i, p] + shifts[s, p]
                acc = 0.0
                for p in range(k):
                    vi = 0.0
                    for q in range(k):
                        vi += gram[p, q] * v[q]
                    acc += v[p] * vi
                if bestq < 0.0 or acc < bestq:
                    bestq = acc
            if bestq < 0.0:
                bestq = 0.0
            out[i] = bestq ** 0.5
    return out
