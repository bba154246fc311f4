# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmin, fmax, pow

from ._gk21 import GAUSS_WEIGHTS, KRONROD_WEIGHTS

cnp.import_array()

cdef double _EPS = np.finfo(float).eps
cdef double _TINY = np.finfo(float).tiny
cdef double[::1] _WK = np.ascontiguousarray(KRONROD_WEIGHTS)
cdef double[::1] _WG = np.ascontiguousarray(GAUSS_WEIGHTS)


def gk21_reduce(fvals, half_widths):
    cdef const double[:, ::1] f = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(half_widths, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], i, j
    out_res = np.empty(n)
    out_err = np.empty(n)
    cdef double[::1] res = out_res
    cdef double[::1] err = out_err
    cdef double resk, resg, resabs, resasc, mean, habs, e, v
    for i in range(n):
        resk = 0.0
        resg = 0.0
        resabs = 0.0
        for j in range(21):
            v = f[i, j]
            resk += _WK[j] * v
            resg += _WG[j] * v
            resabs += _WK[j] * fabs(v)
        mean = 0.5 * resk
        resasc = 0.0
        for j in range(21):
            resasc += _WK[j] * fabs(f[i, j] - mean)
        habs = fabs(h[i])
        res[i] = resk * h[i]
        resabs *= habs
        resasc *= habs
        e = fabs((resk - resg) * h[i])
        if resasc != 0.0 and e != 0.0:
            e = resasc * fmin(1.0, pow(200.0 * e / resasc, 1.5))
        if resabs > _TINY / (50.0 * _EPS):
            e = fmax(50.0 * _EPS * resabs, e)
        err[i] = e
    return out_res, out_err


cdef inline double _sign(double v) nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


cdef double _edge_slope(double h0, double h1, double m0, double m1) nogil:
    cdef double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
    if _sign(d) != _sign(m0):
        return 0.0
    if _sign(m0) != _sign(m1) and fabs(d) > fabs(3.0 * m0):
        return 3.0 * m0
    return d


def pchip_slopes(x, y):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    out = np.zeros(n)
    cdef double[::1] d = out
    cdef double h0, h1, m0, m1, w1, w2
    if n == 2:
        d[0] = (yv[1] - yv[0]) / (xv[1] - xv[0])
        d[1] = d[0]
        return out
    for k in range(1, n - 1):
        h0 = xv[k] - xv[k - 1]
        h1 = xv[k + 1] - xv[k]
        m0 = (yv[k] - yv[k - 1]) / h0
        m1 = (yv[k + 1] - yv[k]) / h1
        if m0 * m1 > 0.0:
            w1 = 2.0 * h1 + h0
            w2 = h1 + 2.0 * h0
            d[k] = (w1 + w2) / (w1 / m0 + w2 / m1)
        else:
            d[k] = 0.0
    h0 = xv[1] - xv[0]
    h1 = xv[2] - xv[1]
    d[0] = _edge_slope(h0, h1, (yv[1] - yv[0]) / h0, (yv[2] - yv[1]) / h1)
    h0 = xv[n - 1] - xv[n - 2]
    h1 = xv[n - 2] - xv[n - 3]
    d[n - 1] = _edge_slope(h0, h1, (yv[n - 1] - yv[n - 2]) / h0,
                           (yv[n - 2] - yv[n - 3]) / h1)
    return out


def pchip_eval(x, y, d, t):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    tarr = np.asarray(t, dtype=np.float64)
    shape = tarr.shape
    cdef const double[::1] tv = np.ascontiguousarray(tarr.ravel())
    cdef Py_ssize_t m = tv.shape[0], n = xv.shape[0], i, lo, hi, mid
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double ti, h, s, s2, s3
    with nogil:
        for i in range(m):
            ti = fmin(fmax(tv[i], xv[0]), xv[n - 1])
            lo = 0
            hi = n - 1
            while hi - lo > 1:
                mid = (lo + hi) >> 1
                if xv[mid] <= ti:
                    lo = mid
                else:
                    hi = mid
            h = xv[lo + 1] - xv[lo]
            s = (ti - xv[lo]) / h
            s2 = s * s
            s3 = s2 * s
            o[i] = ((2.0 * s3 - 3.0 * s2 + 1.0) * yv[lo]
                    + (s3 - 2.0 * s2 + s) * h * dv[lo]
                    + (-2.0 * s3 + 3.0 * s2) * yv[lo + 1]
                    + (s3 - s2) * h * dv[lo + 1])
    return out.reshape(shape)
