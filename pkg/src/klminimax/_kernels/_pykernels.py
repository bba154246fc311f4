"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``;
the two must agree to rounding.
"""

import numpy as np

from ._gk21 import GAUSS_WEIGHTS, KRONROD_WEIGHTS

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


def gk21_reduce(fvals, half_widths):
    """Apply the 21-point Gauss-Kronrod pair to a batch of panels.

    Parameters
    ----------
    fvals : ndarray, shape (n, 21)
        Integrand values at ``center + half_width * NODES`` for each panel.
    half_widths : ndarray, shape (n,)

    Returns
    -------
    result, error : ndarray, shape (n,)
        Kronrod estimate and the QUADPACK-style error estimate.
    """
    fvals = np.ascontiguousarray(fvals, dtype=float)
    h = np.ascontiguousarray(half_widths, dtype=float)
    resk = fvals @ KRONROD_WEIGHTS
    resg = fvals @ GAUSS_WEIGHTS
    resabs = np.abs(fvals) @ KRONROD_WEIGHTS
    mean = 0.5 * resk
    resasc = np.abs(fvals - mean[:, None]) @ KRONROD_WEIGHTS
    habs = np.abs(h)
    result = resk * h
    resabs = resabs * habs
    resasc = resasc * habs
    err = np.abs((resk - resg) * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0.0) & (err != 0.0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(floor, err), err)
    return result, err


def pchip_slopes(x, y):
    """Fritsch-Carlson derivative estimates for monotone cubic interpolation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = np.diff(x)
    delta = np.diff(y) / h
    d = np.zeros(n)
    if n == 2:
        d[:] = delta[0]
        return d
    h0, h1 = h[:-1], h[1:]
    d0, d1 = delta[:-1], delta[1:]
    w1 = 2.0 * h1 + h0
    w2 = h1 + 2.0 * h0
    same_sign = d0 * d1 > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inner = (w1 + w2) / (w1 / d0 + w2 / d1)
    d[1:-1] = np.where(same_sign, inner, 0.0)
    d[0] = _edge_slope(h[0], h[1], delta[0], delta[1])
    d[-1] = _edge_slope(h[-1], h[-2], delta[-1], delta[-2])
    return d


def _edge_slope(h0, h1, m0, m1):
    d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
    if np.sign(d) != np.sign(m0):
        return 0.0
    if np.sign(m0) != np.sign(m1) and abs(d) > abs(3.0 * m0):
        return 3.0 * m0
    return d


def pchip_eval(x, y, d, t):
    """Evaluate the cubic Hermite interpolant; ``t`` outside ``x`` is clamped."""
    x = np.asarray(x, dtype=float)
    t = np.clip(np.asarray(t, dtype=float), x[0], x[-1])
    k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
    h = x[k + 1] - x[k]
    s = (t - x[k]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1]
