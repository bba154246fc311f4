"""Scalar quadrature and bracketed root finding.

Integrands are called with numpy arrays of abscissae (any shape) and must
return values of the same shape. All routines are deterministic pure
functions of their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import _kernels
from ._kernels._gk21 import NODES
from .errors import InvalidParameter, NoSignChange, NonConvergence, TruncationFailure

Integrand = Callable[[np.ndarray], np.ndarray]
Envelope = Callable[[float], "Interval"]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerance bundle threaded through every computation.

    ``max_intervals`` caps the number of panels the adaptive quadrature may
    create before giving up with :class:`NonConvergence`.
    """

    quad_rel_err: float = 1e-10
    quad_abs_err: float = 1e-12
    root_abs_err: float = 1e-9
    support_mass_cutoff: float = 1e-14
    mc_seed: int = 0
    max_intervals: int = 4000

    def __post_init__(self):
        for name in ("quad_rel_err", "quad_abs_err", "root_abs_err", "support_mass_cutoff"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidParameter(f"{name} must be positive and finite, got {value!r}")
        if self.quad_rel_err >= 1e-3:
            raise InvalidParameter("quad_rel_err must be below 1e-3")
        if not 0 <= self.mc_seed < 2**64:
            raise InvalidParameter("mc_seed must be a 64-bit unsigned integer")
        if self.max_intervals < 1:
            raise InvalidParameter("max_intervals must be at least 1")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidParameter(f"interval endpoints must be finite: [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise InvalidParameter(f"interval requires lo < hi: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))


def _evaluate(f: Integrand, x: np.ndarray) -> np.ndarray:
    values = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    if not np.all(np.isfinite(values)):
        bad = x[~np.isfinite(values)][0]
        raise InvalidParameter(f"integrand is not finite at y={bad!r}")
    return values


def integrate(
    f: Integrand,
    iv: Interval,
    tol: Tolerances = DEFAULT_TOLERANCES,
    breakpoints: Iterable[float] = (),
) -> float:
    """Globally adaptive 21-point Gauss-Kronrod quadrature of ``f`` over ``iv``.

    Panels are initially split at every breakpoint strictly inside ``iv``.
    Each round evaluates all freshly created panels in one vectorized call and
    bisects every panel whose error exceeds its share of the target.

    Raises
    ------
    NonConvergence
        If ``tol.max_intervals`` panels are not enough to meet
        ``max(quad_abs_err, quad_rel_err * |result|)``.
    """
    edges = sorted({iv.lo, iv.hi, *(float(b) for b in breakpoints if iv.lo < b < iv.hi)})
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    res = np.empty(0)
    err = np.empty(0)
    new_lo, new_hi = lo, hi
    lo = hi = np.empty(0)
    while True:
        center = 0.5 * (new_lo + new_hi)
        half = 0.5 * (new_hi - new_lo)
        fv = _evaluate(f, center[:, None] + half[:, None] * NODES)
        r, e = _kernels.gk21_reduce(fv, half)
        lo = np.concatenate([lo, new_lo])
        hi = np.concatenate([hi, new_hi])
        res = np.concatenate([res, r])
        err = np.concatenate([err, e])

        result = float(math.fsum(res))
        total_err = float(err.sum())
        target = max(tol.quad_abs_err, tol.quad_rel_err * abs(result))
        if total_err <= target:
            return result

        split = err > target / err.size
        split[np.argmax(err)] = True
        mid = 0.5 * (lo + hi)
        # panels at floating-point resolution cannot be bisected further
        splittable = split & (mid > lo) & (mid < hi)
        if not splittable.any() or lo.size + splittable.sum() > tol.max_intervals:
            raise NonConvergence(
                f"quadrature over [{iv.lo}, {iv.hi}] stalled at error {total_err:.3e} "
                f"(target {target:.3e}, {lo.size} panels)"
            )
        keep = ~splittable
        new_lo = np.concatenate([lo[splittable], mid[splittable]])
        new_hi = np.concatenate([mid[splittable], hi[splittable]])
        lo, hi, res, err = lo[keep], hi[keep], res[keep], err[keep]


def _search_truncation(f: Integrand, center: float, cutoff: float) -> Interval:
    # no envelope: widen until the integrand is negligible on both outer shells
    width = 1.0
    while width < 2.0**40:
        shell = np.linspace(width, 2.0 * width, 64)
        outer = np.concatenate([center - shell, center + shell])
        if np.max(np.abs(_evaluate(f, outer))) * width <= cutoff:
            return Interval(center - width, center + width)
        width *= 2.0
    raise TruncationFailure(f"integrand does not decay around {center}")


def integrate_real_line(
    f: Integrand,
    center: float = 0.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
    envelope: Optional[Envelope] = None,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over the whole real line by truncation.

    ``envelope(mass)`` must return an :class:`Interval` outside of which a
    dominating density carries at most ``mass`` probability; it is queried
    with ``tol.support_mass_cutoff``. Without an envelope the interval is
    grown around ``center`` until ``f`` is negligible on its outer shells.
    """
    if envelope is None:
        iv = _search_truncation(f, center, tol.support_mass_cutoff)
    else:
        try:
            iv = envelope(tol.support_mass_cutoff)
        except (InvalidParameter, OverflowError) as exc:
            raise TruncationFailure(str(exc)) from exc
        if not (math.isfinite(iv.lo) and math.isfinite(iv.hi)):
            raise TruncationFailure("envelope returned an unbounded interval")
    return integrate(f, iv, tol, breakpoints)


def find_root(
    f: Callable[[float], float],
    bracket: Interval,
    tol: Tolerances = DEFAULT_TOLERANCES,
    max_iter: int = 200,
) -> float:
    """Brent's method: inverse quadratic / secant steps guarded by bisection.

    Iterates never leave the bracket. On return the root is enclosed in an
    interval of width at most ``tol.root_abs_err`` (plus a few ulps)
    containing the returned point.
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChange(f"f({a})={fa:.6g} and f({b})={fb:.6g} have the same sign")

    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.25 * tol.root_abs_err
        m = 0.5 * (c - b)
        if abs(m) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, m)
        fb = float(f(b))
    raise NonConvergence(f"root finding did not converge in {max_iter} iterations")


def gaussian_tail_q(x: float) -> float:
    """Standard normal upper tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))
