"""Least-favorable densities, robust rule and worst-case error.

Everything is parametrized by the breakpoint ``y_U > 0``. Over
``(-inf, -y_U)`` the H0 least-favorable density is ``f0 / Z``, over
``[-y_U, y_U]`` it is ``sqrt(ell_U f0 f1) / Z`` and over ``(y_U, inf)`` it is
``ell_U f0 / Z``, with ``ell_U = L(y_U)``. The H1 density is its mirror image.
``y_U`` is the unique root of ``D(y_U) = epsilon``.

Internally all three segment masses are scaled by ``ell_U ** -1/2`` so that
large breakpoints do not overflow ``ell_U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .densities import (
    Density,
    NominalPair,
    dominated_support,
    log_likelihood_ratio,
    merged_breakpoints,
    midway_divergence,
)
from .errors import (
    DegenerateRule,
    InfeasibleTolerance,
    InvalidParameter,
    UnvalidatedPair,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    Interval,
    Tolerances,
    find_root,
    integrate,
    integrate_real_line,
)

FEASIBILITY_MARGIN = 1e-6
DEGENERATE_EPSILON = 1e-10
DEGENERATE_LOG_ELL = math.log1p(1e-12)
MAX_BRACKET_DOUBLINGS = 60


# -- rules --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RandomizedRule:
    """Decision rule: ``evaluate(y)`` is the probability of deciding H1."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    y_U: float = 0.0
    breakpoints: tuple = ()
    name: str = "rule"

    def __call__(self, y):
        values = self.evaluate(np.asarray(y, dtype=float))
        return float(values) if np.ndim(y) == 0 else values


def threshold_rule(tau: float = 0.0) -> RandomizedRule:
    """Deterministic test ``1{y > tau}``, with a fair coin exactly at ``tau``."""

    def evaluate(y):
        return np.where(y > tau, 1.0, np.where(y < tau, 0.0, 0.5))

    return RandomizedRule(evaluate, 0.0, (float(tau),), f"threshold({tau:g})")


def constant_rule(value: float) -> RandomizedRule:
    if not 0.0 <= value <= 1.0:
        raise InvalidParameter(f"rule value must lie in [0, 1], got {value!r}")
    return RandomizedRule(lambda y: np.full(np.shape(y), float(value)), 0.0, (), f"constant({value:g})")


def _robust_rule(pair: NominalPair, y_U: float, log_ell: float) -> RandomizedRule:
    def evaluate(y):
        with np.errstate(invalid="ignore"):
            mid = np.clip(0.5 * (1.0 + log_likelihood_ratio(pair, y) / log_ell), 0.0, 1.0)
        return np.where(y > y_U, 1.0, np.where(y < -y_U, 0.0, mid))

    return RandomizedRule(evaluate, y_U, (-y_U, y_U), f"robust(y_U={y_U:.6g})")


# -- the saddle point -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SaddlePoint:
    y_U: float
    log_ell_U: float
    log_Z: float
    epsilon: float
    pair: NominalPair
    g0L: Density
    g1L: Density
    rule: RandomizedRule

    @property
    def ell_U(self) -> float:
        return math.exp(self.log_ell_U)

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z)

    @property
    def degenerate(self) -> bool:
        return self.log_ell_U <= DEGENERATE_LOG_ELL


class _Segments(NamedTuple):
    log_ell: float
    lower: float          # int_{-inf}^{-y_U} f0
    upper: float          # int_{y_U}^{inf} f0
    half_middle: float    # int_0^{y_U} sqrt(f0 f1)

    @property
    def scaled_upper(self) -> float:
        # ell^(1/2) * upper, zero when the tail mass underflowed
        if self.upper <= 0.0:
            return 0.0
        return math.exp(0.5 * self.log_ell + math.log(self.upper))

    @property
    def scaled_Z(self) -> float:
        """``Z(y_U) / sqrt(ell_U)``."""
        return (math.exp(-0.5 * self.log_ell) * self.lower + 2.0 * self.half_middle
                + self.scaled_upper)

    @property
    def log_Z(self) -> float:
        return 0.5 * self.log_ell + math.log(self.scaled_Z)

    @property
    def error(self) -> float:
        return (self.scaled_upper + self.half_middle) / self.scaled_Z

    @property
    def divergence(self) -> float:
        return -math.log(self.scaled_Z) + self.log_ell * (self.error - 0.5)


def _check_breakpoint(y_U: float) -> float:
    y_U = float(y_U)
    if not (y_U >= 0.0 and math.isfinite(y_U)):
        raise InvalidParameter(f"y_U must be a finite non-negative number, got {y_U!r}")
    return y_U


def _segments(pair: NominalPair, y_U: float, tol: Tolerances) -> _Segments:
    log_ell = log_likelihood_ratio(pair, y_U)
    f0 = pair.f0
    iv = f0.support(tol.support_mass_cutoff)
    bps = pair.breakpoints
    lower = integrate(f0.pdf, Interval(iv.lo, -y_U), tol, bps) if -y_U > iv.lo else 0.0
    upper = integrate(f0.pdf, Interval(y_U, iv.hi), tol, bps) if y_U < iv.hi else 0.0
    reach = min(y_U, pair.support(tol.support_mass_cutoff).hi)
    if reach > 0.0:
        def root_product(y):
            return np.exp(0.5 * (pair.f0.log_pdf(y) + pair.f1.log_pdf(y)))
        half_middle = integrate(root_product, Interval(0.0, reach), tol, bps)
    else:
        half_middle = 0.0
    return _Segments(log_ell, lower, upper, half_middle)


def normalizer(pair: NominalPair, y_U: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Normalizing constant ``Z(y_U)`` shared by both least-favorable densities."""
    return math.exp(_segments(pair, _check_breakpoint(y_U), tol).log_Z)


def divergence_at(pair: NominalPair, y_U: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``D(y_U)``: KL divergence of the H0 least-favorable density from ``f0``.

    Uses the closed form in terms of the three segment masses; the middle
    contribution reduces to ``int_0^{y_U} sqrt(f0 f1)`` because ``ln L`` is odd
    and ``sqrt(f0 f1)`` is even for a symmetric pair.
    """
    y_U = _check_breakpoint(y_U)
    if y_U == 0.0:
        return 0.0
    return _segments(pair, y_U, tol).divergence


def _lf_density(pair: NominalPair, y_U: float, log_ell: float, log_z: float, hypothesis: int) -> Density:
    f0, f1 = pair.f0, pair.f1
    nominal = f0 if hypothesis == 0 else f1

    def log_pdf(y):
        y = np.asarray(y, dtype=float)
        l0 = f0.log_pdf(y)
        l1 = f1.log_pdf(y)
        middle = 0.5 * (log_ell + l0 + l1)
        if hypothesis == 0:
            outer = np.where(y > y_U, log_ell + l0, l0)
        else:
            outer = np.where(y < -y_U, log_ell + l1, l1)
        return np.where(np.abs(y) <= y_U, middle, outer) - log_z

    scale = math.exp(max(log_ell, 0.0) - log_z)
    core = Interval(-y_U, y_U) if y_U > 0.0 else None
    return Density(
        log_pdf,
        dominated_support((nominal, scale), core=core),
        merged_breakpoints(pair.breakpoints, (-y_U, y_U) if y_U > 0.0 else ()),
        f"g{hypothesis}L(y_U={y_U:.6g})",
    )


def construct(pair: NominalPair, y_U: float, tol: Tolerances = DEFAULT_TOLERANCES,
              epsilon: float | None = None) -> SaddlePoint:
    """Least-favorable pair and robust rule for a given breakpoint ``y_U``.

    ``epsilon`` defaults to ``divergence_at(pair, y_U)``; ``solve`` passes the
    target tolerance instead.
    """
    y_U = _check_breakpoint(y_U)
    seg = _segments(pair, y_U, tol)
    log_z = seg.log_Z
    if epsilon is None:
        epsilon = 0.0 if y_U == 0.0 else seg.divergence
    if seg.log_ell <= DEGENERATE_LOG_ELL:
        rule = threshold_rule(0.0)
    else:
        rule = _robust_rule(pair, y_U, seg.log_ell)
    return SaddlePoint(
        y_U=y_U,
        log_ell_U=seg.log_ell,
        log_Z=log_z,
        epsilon=epsilon,
        pair=pair,
        g0L=_lf_density(pair, y_U, seg.log_ell, log_z, 0),
        g1L=_lf_density(pair, y_U, seg.log_ell, log_z, 1),
        rule=rule,
    )


def solve(pair: NominalPair, epsilon: float, tol: Tolerances = DEFAULT_TOLERANCES) -> SaddlePoint:
    """Find the saddle point for KL tolerance ``epsilon`` (in nats).

    Raises
    ------
    UnvalidatedPair
        If the pair failed the symmetry or monotone likelihood-ratio check.
    InfeasibleTolerance
        If ``epsilon >= D(f_1/2 | f0) - FEASIBILITY_MARGIN``.
    """
    if not pair.validated_symmetric:
        raise UnvalidatedPair(f"{pair.family} pair is not symmetric: f1(y) != f0(-y)")
    if not pair.validated_monotone_lr:
        raise UnvalidatedPair(f"{pair.family} pair has a non-monotone likelihood ratio")
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise InvalidParameter(f"epsilon must be positive, got {epsilon!r}")
    bound = midway_divergence(pair, tol)
    if epsilon >= bound - FEASIBILITY_MARGIN:
        raise InfeasibleTolerance(
            f"epsilon={epsilon:g} is not below D(f_1/2|f0)={bound:.10g} "
            f"(margin {FEASIBILITY_MARGIN:g}); the KL balls would intersect")
    if epsilon < DEGENERATE_EPSILON:
        return construct(pair, 0.0, tol, epsilon=epsilon)

    below, above = 0.0, 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if divergence_at(pair, above, tol) > epsilon:
            break
        below, above = above, 2.0 * above
    else:
        raise InfeasibleTolerance(f"no breakpoint below {above:g} reaches epsilon={epsilon:g}")

    y_U = find_root(lambda y: divergence_at(pair, y, tol) - epsilon, Interval(below, above), tol)
    return construct(pair, y_U, tol, epsilon=epsilon)


def lf_density_0(sp: SaddlePoint) -> Density:
    return sp.g0L


def lf_density_1(sp: SaddlePoint) -> Density:
    return sp.g1L


def robust_rule(sp: SaddlePoint) -> RandomizedRule:
    """The robust test: 0 below ``-y_U``, 1 above ``y_U``, log-LR interpolation between.

    Raises :class:`DegenerateRule` when ``ell_U`` is numerically 1, where the
    interpolation would divide by zero; ``sp.rule`` then holds the nominal
    threshold test.
    """
    if sp.degenerate:
        raise DegenerateRule(f"ell_U = exp({sp.log_ell_U:.3g}) is too close to 1")
    return _robust_rule(sp.pair, sp.y_U, sp.log_ell_U)


def q_transform(ell, ell_U: float):
    """Likelihood-ratio flattening: ``ell / ell_U`` above ``ell_U``, 1 in the
    band ``[1/ell_U, ell_U]``, ``ell_U * ell`` below it."""
    if not ell_U > 1.0:
        raise InvalidParameter(f"ell_U must exceed 1, got {ell_U!r}")
    arr = np.asarray(ell, dtype=float)
    if np.any(arr <= 0.0):
        raise InvalidParameter("likelihood ratios must be positive")
    out = np.where(arr > ell_U, arr / ell_U, np.where(arr < 1.0 / ell_U, ell_U * arr, 1.0))
    return float(out) if np.ndim(ell) == 0 else out


def lf_likelihood_ratio(sp: SaddlePoint, y):
    """``g1L(y) / g0L(y)``, exactly 1 on ``[-y_U, y_U]``."""
    log_l = np.asarray(log_likelihood_ratio(sp.pair, y), dtype=float)
    c = sp.log_ell_U
    log_q = np.where(log_l > c, log_l - c, np.where(log_l < -c, log_l + c, 0.0))
    y_arr = np.asarray(y, dtype=float)
    log_q = np.where(np.abs(y_arr) <= sp.y_U, 0.0, log_q)
    out = np.exp(log_q)
    return float(out) if np.ndim(y) == 0 else out


def worst_case_error(sp: SaddlePoint, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Worst-case error ``P_F = P_M = P_E`` of the robust rule, from segment masses."""
    return _segments(sp.pair, sp.y_U, tol).error


class ErrorProbabilities(NamedTuple):
    pf: float
    pm: float
    pe: float


def error_prob(delta, g0: Density, g1: Density, tol: Tolerances = DEFAULT_TOLERANCES,
               breakpoints=()) -> ErrorProbabilities:
    """False-alarm, miss and equal-prior error probabilities of ``delta``.

    ``delta`` is a :class:`RandomizedRule` or any vectorized callable into
    [0, 1]; its ``breakpoints`` attribute (if any) and ``breakpoints`` are
    used to split the quadrature.
    """
    bps = merged_breakpoints(getattr(delta, "breakpoints", ()), breakpoints)

    def false_alarm(y):
        return delta(y) * g0.pdf(y)

    def miss(y):
        return (1.0 - delta(y)) * g1.pdf(y)

    pf = integrate_real_line(false_alarm, tol=tol, envelope=g0.support,
                             breakpoints=merged_breakpoints(bps, g0.breakpoints))
    pm = integrate_real_line(miss, tol=tol, envelope=g1.support,
                             breakpoints=merged_breakpoints(bps, g1.breakpoints))
    return ErrorProbabilities(pf, pm, 0.5 * (pf + pm))
