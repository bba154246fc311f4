"""Densities on the real line, nominal pairs, KL divergence and geodesics.

A :class:`Density` is defined through its log-pdf (vectorized) plus a
``support`` callable: ``support(mass)`` returns an interval outside of which
the density carries at most ``mass`` probability. Families compute this from
analytic tail bounds, derived densities from the densities that dominate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameter, SupportMismatch
from .numerics import (
    DEFAULT_TOLERANCES,
    Interval,
    Tolerances,
    integrate,
    integrate_real_line,
)

VALIDATION_MASS = 1e-12
SYMMETRY_ATOL = 1e-10
TIE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Density:
    """Probability density given by a vectorized log-pdf.

    Attributes
    ----------
    log_pdf : callable
        ``log_pdf(y)`` for array ``y``; ``-inf`` where the density vanishes.
    support : callable
        Tail bound: ``support(mass)`` is an :class:`Interval` outside of which
        at most ``mass`` probability lies.
    breakpoints : tuple of float
        Abscissae where the pdf is not smooth; quadrature splits there.
    """

    log_pdf: Callable[[np.ndarray], np.ndarray]
    support: Callable[[float], Interval]
    breakpoints: tuple = ()
    name: str = "density"

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    __call__ = pdf

    def mass(self, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        return integrate_real_line(self.pdf, tol=tol, envelope=self.support,
                                   breakpoints=self.breakpoints)


def _as_array(y):
    return np.asarray(y, dtype=float)


def _result(y, values):
    return float(values) if np.ndim(y) == 0 else values


def shifted(d: Density, shift: float, name: str | None = None) -> Density:
    """Location shift: ``y -> d(y - shift)``."""

    def support(mass):
        iv = d.support(mass)
        return Interval(iv.lo + shift, iv.hi + shift)

    return Density(
        log_pdf=lambda y: d.log_pdf(_as_array(y) - shift),
        support=support,
        breakpoints=tuple(b + shift for b in d.breakpoints),
        name=name or f"{d.name} shifted by {shift:g}",
    )


def reflected(d: Density, name: str | None = None) -> Density:
    """Mirror image ``y -> d(-y)``."""

    def support(mass):
        iv = d.support(mass)
        return Interval(-iv.hi, -iv.lo)

    return Density(
        log_pdf=lambda y: d.log_pdf(-_as_array(y)),
        support=support,
        breakpoints=tuple(sorted(-b for b in d.breakpoints)),
        name=name or f"reflected {d.name}",
    )


def dominated_support(*parts: tuple[Density, float], core: Interval | None = None):
    """Support bound for a density ``g <= sum_k scale_k * d_k`` pointwise.

    Each part gets an equal share of the mass budget. ``core`` is a bounded
    region always included (e.g. where ``g`` is not dominated by the parts).
    """

    def support(mass):
        iv = core
        for d, scale in parts:
            part = d.support(mass / (len(parts) * max(scale, 1e-300)))
            iv = part if iv is None else iv.hull(part)
        return iv

    return support


def merged_breakpoints(*groups: Sequence[float]) -> tuple:
    return tuple(sorted({float(b) for group in groups for b in group}))


# -- families -----------------------------------------------------------------

def normal(mean: float, sigma: float) -> Density:
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma!r}")
    log_norm = math.log(sigma * math.sqrt(2.0 * math.pi))

    def log_pdf(y):
        z = (_as_array(y) - mean) / sigma
        return -0.5 * z * z - log_norm

    def support(mass):
        # two-sided Chernoff bound: P(|Z| > z) <= exp(-z^2 / 2)
        z = max(1.0, math.sqrt(2.0 * math.log(1.0 / min(mass, 0.5))))
        return Interval(mean - z * sigma, mean + z * sigma)

    return Density(log_pdf, support, (), f"N({mean:g}, {sigma:g}^2)")


def generalized_gaussian_constants(alpha: float, sigma: float) -> tuple[float, float]:
    """Return ``(a, b)`` so that ``a * exp(-|n/b|**alpha)`` has unit mass and variance sigma**2.

    The two moments of ``exp(-|t|**alpha)`` are obtained by quadrature.
    """
    tight = Tolerances(quad_rel_err=1e-12, quad_abs_err=1e-15)
    reach = (math.log(1e18)) ** (1.0 / alpha) + 1.0
    iv = Interval(-reach, reach)
    m0 = integrate(lambda t: np.exp(-np.abs(t) ** alpha), iv, tight, (0.0,))
    m2 = integrate(lambda t: t * t * np.exp(-np.abs(t) ** alpha), iv, tight, (0.0,))
    b = sigma * math.sqrt(m0 / m2)
    a = 1.0 / (b * m0)
    return a, b


def generalized_gaussian(alpha: float, sigma: float) -> Density:
    """Zero-mean generalized Gaussian noise density with variance sigma**2."""
    if not alpha > 0:
        raise InvalidParameter(f"alpha must be positive, got {alpha!r}")
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma!r}")
    a, b = generalized_gaussian_constants(alpha, sigma)
    log_a = math.log(a)

    def log_pdf(n):
        return log_a - np.abs(_as_array(n) / b) ** alpha

    def support(mass):
        # for t >= 1: int_t^inf exp(-s^alpha) ds <= exp(-t^alpha) / alpha <= exp(-t^alpha)
        t = max(1.0, math.log(max(2.0 * a * b / mass, 1.0)) ** (1.0 / alpha))
        return Interval(-t * b, t * b)

    return Density(log_pdf, support, (0.0,), f"GG(alpha={alpha:g}, sigma={sigma:g})")


def asymmetric_laplace(a: float, b: float) -> Density:
    """``c exp(-a n)`` for n >= 0 and ``c exp(b n)`` for n <= 0, ``c = 1/(1/a + 1/b)``."""
    if not (a > 0 and b > 0):
        raise InvalidParameter(f"Laplace rates must be positive, got a={a!r}, b={b!r}")
    c = 1.0 / (1.0 / a + 1.0 / b)
    log_c = math.log(c)

    def log_pdf(n):
        n = _as_array(n)
        return log_c + np.where(n >= 0.0, -a * n, b * n)

    def support(mass):
        hi = math.log(max(2.0 * c / (a * mass), 1.0)) / a
        lo = math.log(max(2.0 * c / (b * mass), 1.0)) / b
        return Interval(-max(lo, 1.0), max(hi, 1.0))

    return Density(log_pdf, support, (0.0,), f"AL(a={a:g}, b={b:g})")


def cauchy(loc: float, scale: float) -> Density:
    if not scale > 0:
        raise InvalidParameter(f"scale must be positive, got {scale!r}")
    log_norm = math.log(math.pi * scale)

    def log_pdf(y):
        z = (_as_array(y) - loc) / scale
        return -np.log1p(z * z) - log_norm

    def support(mass):
        # P(|Y - loc| > t * scale) <= 2 / (pi t)
        t = max(1.0, 2.0 / (math.pi * mass))
        return Interval(loc - t * scale, loc + t * scale)

    return Density(log_pdf, support, (), f"Cauchy({loc:g}, {scale:g})")


# -- nominal pairs --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NominalPair:
    """Nominal densities ``f0`` (under H0) and ``f1`` (under H1)."""

    f0: Density
    f1: Density
    validated_symmetric: bool
    validated_monotone_lr: bool
    family: str = "custom"
    params: dict = field(default_factory=dict)

    @classmethod
    def build(cls, f0: Density, f1: Density, family: str = "custom",
              params: dict | None = None, grid_size: int = 2001) -> "NominalPair":
        """Assemble a pair and run both validation checks on it."""
        raw = cls(f0, f1, False, False, family, dict(params or {}))
        return cls(
            f0, f1,
            validated_symmetric=check_symmetry(raw, grid_size),
            validated_monotone_lr=check_monotone_lr(raw, max(grid_size, 1000)),
            family=family,
            params=dict(params or {}),
        )

    @property
    def validated(self) -> bool:
        return self.validated_symmetric and self.validated_monotone_lr

    @property
    def breakpoints(self) -> tuple:
        return merged_breakpoints(self.f0.breakpoints, self.f1.breakpoints)

    def support(self, mass: float) -> Interval:
        return self.f0.support(mass / 2).hull(self.f1.support(mass / 2))

    def log_lr(self, y):
        return log_likelihood_ratio(self, y)


def gaussian_pair(sigma: float) -> NominalPair:
    """N(-1, sigma^2) under H0 against N(+1, sigma^2) under H1."""
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma!r}")
    return NominalPair.build(normal(-1.0, sigma), normal(1.0, sigma),
                             "gaussian", {"sigma": sigma})


def generalized_gaussian_pair(alpha: float, sigma: float) -> NominalPair:
    """Antipodal signals +-1 in generalized Gaussian noise; requires alpha > 1."""
    if not alpha > 1:
        raise InvalidParameter(
            f"alpha must exceed 1 for a strictly monotone likelihood ratio, got {alpha!r}")
    noise = generalized_gaussian(alpha, sigma)
    return NominalPair.build(shifted(noise, -1.0), shifted(noise, 1.0),
                             "gen-gaussian", {"alpha": alpha, "sigma": sigma})


def asymmetric_laplace_pair(a: float, b: float) -> NominalPair:
    """``f1(y) = f_L(y - 1)`` and ``f0(y) = f_L(-(y + 1))``; requires b > a > 0."""
    if not a > 0:
        raise InvalidParameter(f"a must be positive, got {a!r}")
    if not b > a:
        raise InvalidParameter(f"b must exceed a for a monotone likelihood ratio, got a={a!r}, b={b!r}")
    noise = asymmetric_laplace(a, b)
    return NominalPair.build(shifted(reflected(noise), -1.0), shifted(noise, 1.0),
                             "asym-laplace", {"a": a, "b": b})


def cauchy_pair(scale: float) -> NominalPair:
    """Shifted Cauchy pair. Builds fine but fails the monotone-LR check."""
    return NominalPair.build(cauchy(-1.0, scale), cauchy(1.0, scale),
                             "cauchy", {"scale": scale})


def laplace_c(a: float, b: float) -> float:
    return 1.0 / (1.0 / a + 1.0 / b)


# -- pointwise quantities -------------------------------------------------------

def log_likelihood_ratio(pair: NominalPair, y):
    """``log f1(y) - log f0(y)``."""
    l0 = pair.f0.log_pdf(y)
    if np.any(np.isneginf(l0)):
        raise SupportMismatch("f0 vanishes where the likelihood ratio was requested")
    return _result(y, pair.f1.log_pdf(y) - l0)


def validation_grid(pair: NominalPair, grid_size: int) -> np.ndarray:
    iv = pair.support(VALIDATION_MASS)
    return np.linspace(iv.lo, iv.hi, grid_size)


def check_symmetry(pair: NominalPair, grid_size: int = 2001) -> bool:
    """True iff ``log f1(y) == log f0(-y)`` within 1e-10 over the validation grid."""
    if grid_size < 100:
        raise InvalidParameter("symmetry check needs grid_size >= 100")
    y = validation_grid(pair, grid_size)
    l1 = pair.f1.log_pdf(y)
    l0 = pair.f0.log_pdf(-y)
    both_zero = np.isneginf(l1) & np.isneginf(l0)
    with np.errstate(invalid="ignore"):
        gap = np.where(both_zero, 0.0, np.abs(l1 - l0))
    return bool(np.all(gap <= SYMMETRY_ATOL))


def check_monotone_lr(pair: NominalPair, grid_size: int = 2001) -> bool:
    """True iff the log likelihood ratio strictly increases over the validation grid.

    A step within ``TIE_ATOL`` of zero is accepted as rounding noise, but two
    consecutive such steps mean a flat stretch and fail the check.
    """
    if grid_size < 1000:
        raise InvalidParameter("monotone-LR check needs grid_size >= 1000")
    y = validation_grid(pair, grid_size)
    l0 = pair.f0.log_pdf(y)
    l1 = pair.f1.log_pdf(y)
    if np.any(np.isneginf(l0) | np.isneginf(l1)):
        return False
    steps = np.diff(l1 - l0)
    if np.any(steps < -TIE_ATOL):
        return False
    ties = np.abs(steps) <= TIE_ATOL
    return not bool(np.any(ties[1:] & ties[:-1]))


# -- divergences and geodesics ----------------------------------------------------

def kl_divergence(g: Density, f: Density, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Relative entropy ``D(g | f) = int g ln(g / f)`` in nats, with ``0 ln 0 = 0``."""

    def integrand(y):
        lg = g.log_pdf(y)
        lf = f.log_pdf(y)
        pg = np.exp(lg)
        live = pg > 0.0
        if np.any(live & np.isneginf(lf)):
            raise SupportMismatch(f"{g.name} is positive where {f.name} vanishes")
        with np.errstate(invalid="ignore"):
            return np.where(live, pg * (lg - lf), 0.0)

    return integrate_real_line(integrand, tol=tol, envelope=g.support,
                               breakpoints=merged_breakpoints(g.breakpoints, f.breakpoints))


def geodesic_normalizer(pair: NominalPair, u: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``Z(u) = int f1^u f0^(1-u)``."""
    if not 0.0 <= u <= 1.0:
        raise InvalidParameter(f"geodesic parameter must lie in [0, 1], got {u!r}")
    if u in (0.0, 1.0):
        return 1.0

    def integrand(y):
        return np.exp(u * pair.f1.log_pdf(y) + (1.0 - u) * pair.f0.log_pdf(y))

    return integrate_real_line(integrand, tol=tol, envelope=pair.support,
                               breakpoints=pair.breakpoints)


def geodesic_density(pair: NominalPair, u: float, tol: Tolerances = DEFAULT_TOLERANCES) -> Density:
    """Normalized ``f_u = f1^u f0^(1-u) / Z(u)``; ``u = 1/2`` is the mid-way density."""
    z = geodesic_normalizer(pair, u, tol)
    if u == 0.0:
        return pair.f0
    if u == 1.0:
        return pair.f1
    log_z = math.log(z)
    f0, f1 = pair.f0, pair.f1

    def log_pdf(y):
        return u * f1.log_pdf(y) + (1.0 - u) * f0.log_pdf(y) - log_z

    # weighted AM-GM: f_u <= (u f1 + (1 - u) f0) / Z(u)
    return Density(
        log_pdf,
        dominated_support((f0, 1.0 / z), (f1, 1.0 / z)),
        pair.breakpoints,
        f"geodesic(u={u:g})",
    )


def midway_divergence(pair: NominalPair, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``D(f_1/2 | f0)``: the supremum of feasible KL tolerances."""
    return kl_divergence(geodesic_density(pair, 0.5, tol), pair.f0, tol)
