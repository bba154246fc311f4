"""Numerical certification of a saddle point.

The right-hand saddle inequality is probed with densities drawn from several
one-parameter families inside the KL balls; each family has a scalar knob that
moves the divergence monotonically, so hitting a divergence budget is a 1-D
root find. The left-hand inequality is probed with alternative decision rules.
A Monte Carlo estimate cross-checks the quadrature error probabilities.

Randomness is derived from ``(seed, hypothesis, probe index)`` so every probe
is reproducible on its own.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from ._kernels._gk21 import NODES
from .densities import (
    Density,
    NominalPair,
    dominated_support,
    geodesic_density,
    kl_divergence,
    log_likelihood_ratio,
    merged_breakpoints,
    shifted,
)
from .errors import InvalidParameter, TabulationFailure
from .numerics import (
    DEFAULT_TOLERANCES,
    Interval,
    Tolerances,
    find_root,
    integrate_real_line,
)
from .saddle import RandomizedRule, SaddlePoint, error_prob, solve, threshold_rule

KKT_TOL = 1e-6
RHS_TOL = 1e-6
LHS_TOL = 1e-6
BALL_SLACK = 1e-8
# budgets slightly inside the ball so root-finding error cannot push a probe out
_BUDGET_SHRINK = 1.0 - 1e-7
# a step tilt's divergence saturates at -ln P(top level) as theta grows, so the
# budget search stops here and keeps the (interior) probe
STEP_TILT_CAP = 64.0

PROBE_KINDS = ("least-favorable", "geodesic", "shift", "mixture", "step-tilt")


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *stream]))


# -- density probes ------------------------------------------------------------------

def _hit_budget(make, budget: float, nominal: Density, tol: Tolerances, upper: float = 1.0,
                cap: float | None = None):
    """Find parameter ``t >= 0`` with ``D(make(t) | nominal) = budget``."""

    def gap(t):
        return kl_divergence(make(t), nominal, tol) - budget

    lo = 0.0
    hi = upper
    while gap(hi) < 0.0:
        if cap is not None and hi >= cap:
            return make(cap)
        lo, hi = hi, 2.0 * hi if cap is None else min(2.0 * hi, cap)
    return make(find_root(gap, Interval(lo, hi), tol))


def _mixture(f: Density, g: Density, t: float) -> Density:
    if t == 1.0:
        return g
    log_a, log_b = math.log1p(-t), math.log(t)

    def log_pdf(y):
        return np.logaddexp(log_a + f.log_pdf(y), log_b + g.log_pdf(y))

    return Density(log_pdf, dominated_support((f, 1.0), (g, 1.0)),
                   merged_breakpoints(f.breakpoints, g.breakpoints), f"mixture(t={t:.4g})")


def _step_tilt(f: Density, knots: np.ndarray, levels: np.ndarray, theta: float,
               tol: Tolerances) -> Density:
    """``f exp(theta h) / Z`` with ``h`` piecewise constant, |h| <= 1."""
    top = theta * float(np.max(levels)) if theta >= 0.0 else theta * float(np.min(levels))

    def h(y):
        return levels[np.searchsorted(knots, y)]

    def unnormalized(y):
        # shifted by the largest exponent so large theta cannot overflow
        return np.exp(f.log_pdf(y) + theta * h(y) - top)

    bps = merged_breakpoints(f.breakpoints, knots)
    z = integrate_real_line(unnormalized, tol=tol, envelope=f.support, breakpoints=bps)
    log_z = math.log(z) + top

    def log_pdf(y):
        y = np.asarray(y, dtype=float)
        return f.log_pdf(y) + theta * h(y) - log_z

    scale = math.exp(abs(theta) - log_z)
    return Density(log_pdf, dominated_support((f, scale)), bps, f"step-tilt(theta={theta:.4g})")


def probe_density_ball(pair: NominalPair, hypothesis: int, epsilon: float, n: int, seed: int,
                       tol: Tolerances = DEFAULT_TOLERANCES,
                       saddle: SaddlePoint | None = None) -> list[Density]:
    """Draw ``n`` densities ``g`` with ``D(g | f_hypothesis) <= epsilon``.

    Probes cycle through the least-favorable density itself, geodesic tilts
    toward the competing nominal, location shifts, mixtures with the
    least-favorable density and random step-function exponential tilts.
    The first probe of each kind sits on the ball boundary (a step tilt whose
    divergence saturates below the budget stays inside); later ones use a
    random fraction of the budget.
    """
    if hypothesis not in (0, 1):
        raise InvalidParameter(f"hypothesis must be 0 or 1, got {hypothesis!r}")
    if n < 1:
        raise InvalidParameter("need at least one probe")
    sp = saddle if saddle is not None else solve(pair, epsilon, tol)
    nominal = pair.f0 if hypothesis == 0 else pair.f1
    lf = sp.g0L if hypothesis == 0 else sp.g1L
    bulk = nominal.support(1e-3)

    probes = []
    for i in range(n):
        kind = PROBE_KINDS[i % len(PROBE_KINDS)]
        rng = _rng(seed, hypothesis, i)
        fraction = 1.0 if i < len(PROBE_KINDS) else rng.uniform(0.25, 1.0)
        budget = fraction * epsilon * _BUDGET_SHRINK

        if kind == "least-favorable":
            g = lf
        elif kind == "geodesic":
            def make(u):
                return geodesic_density(pair, u if hypothesis == 0 else 1.0 - u, tol)
            g = _hit_budget(make, budget, nominal, tol, upper=1.0, cap=1.0)
        elif kind == "shift":
            direction = 1.0 if rng.random() < 0.5 else -1.0
            g = _hit_budget(lambda s: shifted(nominal, direction * s), budget, nominal, tol)
        elif kind == "mixture":
            g = _mixture(nominal, lf, float(rng.uniform(1e-3, 1.0)) if i >= len(PROBE_KINDS) else 1.0)
        else:
            k = int(rng.integers(3, 9))
            knots = np.sort(rng.uniform(bulk.lo, bulk.hi, size=k))
            levels = rng.uniform(-1.0, 1.0, size=k + 1)
            g = _hit_budget(lambda th: _step_tilt(nominal, knots, levels, th, tol),
                            budget, nominal, tol, cap=STEP_TILT_CAP)
        probes.append(g)
    return probes


# -- rule probes ------------------------------------------------------------------------

def _clipped_rule(pair: NominalPair, width: float) -> RandomizedRule:
    def evaluate(y):
        return np.clip(0.5 + 0.5 * log_likelihood_ratio(pair, y) / width, 0.0, 1.0)

    return RandomizedRule(evaluate, 0.0, (), f"clipped(width={width:.4g})")


def _step_rule(knots: np.ndarray, values: np.ndarray) -> RandomizedRule:
    def evaluate(y):
        return values[np.searchsorted(knots, y)]

    return RandomizedRule(evaluate, 0.0, tuple(float(k) for k in knots), "random-step")


def probe_rules(sp: SaddlePoint, n: int, seed: int) -> list[RandomizedRule]:
    """Alternative decision rules: threshold shifts, clipped log-LR rules, random steps."""
    reach = 2.0 * sp.y_U + 1.0
    n_threshold = max(1, n // 3)
    n_clipped = max(1, n // 3)
    n_random = max(1, n - n_threshold - n_clipped)
    rules = [threshold_rule(t) for t in np.linspace(-reach, reach, n_threshold)]
    base = sp.log_ell_U if sp.log_ell_U > 0.0 else 1.0
    rules += [_clipped_rule(sp.pair, base * w) for w in np.geomspace(0.1, 10.0, n_clipped)]
    bulk = sp.pair.support(1e-3)
    for i in range(n_random):
        rng = _rng(seed, 2, i)
        k = int(rng.integers(2, 10))
        knots = np.sort(rng.uniform(bulk.lo, bulk.hi, size=k))
        rules.append(_step_rule(knots, rng.uniform(0.0, 1.0, size=k + 1)))
    return rules


# -- certificate ------------------------------------------------------------------------

@dataclass(frozen=True)
class SaddleCertificate:
    kkt_gap0: float
    kkt_gap1: float
    max_rhs_violation: float
    min_lhs_gap: float
    n_probes: int
    n_rule_probes: int
    seed: int
    worst_case_pe: float
    max_probe_divergence_excess: float

    @property
    def passed(self) -> bool:
        return (self.kkt_gap0 <= KKT_TOL and self.kkt_gap1 <= KKT_TOL
                and self.max_rhs_violation <= RHS_TOL and self.min_lhs_gap >= -LHS_TOL
                and self.max_probe_divergence_excess <= BALL_SLACK)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def check_saddle(sp: SaddlePoint, n_probes: int = 50, seed: int = 0,
                 tol: Tolerances = DEFAULT_TOLERANCES, n_rule_probes: int = 30,
                 density_probes: Sequence[Sequence[Density]] | None = None,
                 rules: Sequence[RandomizedRule] | None = None) -> SaddleCertificate:
    """Probe both saddle inequalities around ``sp``.

    ``density_probes`` (a pair of lists, H0 then H1) and ``rules`` override
    the generated probes.
    """
    pair = sp.pair
    kkt0 = abs(kl_divergence(sp.g0L, pair.f0, tol) - sp.epsilon)
    kkt1 = abs(kl_divergence(sp.g1L, pair.f1, tol) - sp.epsilon)

    reference = error_prob(sp.rule, sp.g0L, sp.g1L, tol)
    if density_probes is None:
        density_probes = [probe_density_ball(pair, j, sp.epsilon, n_probes, seed, tol, sp)
                          for j in (0, 1)]
    excess = -math.inf
    for nominal, group in zip((pair.f0, pair.f1), density_probes):
        for g in group:
            excess = max(excess, kl_divergence(g, nominal, tol) - sp.epsilon)

    pf = max(error_prob(sp.rule, g, sp.g1L, tol).pf for g in density_probes[0])
    pm = max(error_prob(sp.rule, sp.g0L, g, tol).pm for g in density_probes[1])
    rhs_violation = 0.5 * (pf - reference.pf) + 0.5 * (pm - reference.pm)

    if rules is None:
        rules = probe_rules(sp, n_rule_probes, seed)
    lhs_gap = min(error_prob(r, sp.g0L, sp.g1L, tol).pe - reference.pe for r in rules)

    return SaddleCertificate(
        kkt_gap0=kkt0,
        kkt_gap1=kkt1,
        max_rhs_violation=rhs_violation,
        min_lhs_gap=lhs_gap,
        n_probes=min(len(g) for g in density_probes),
        n_rule_probes=len(rules),
        seed=int(seed),
        worst_case_pe=reference.pe,
        max_probe_divergence_excess=excess,
    )


# -- sampling and Monte Carlo -----------------------------------------------------------------

TABULATION_CELLS = 4000
TABULATION_MASS_TOL = 1e-6


class TabulatedCDF:
    """CDF of a density tabulated by Gauss-Kronrod cell masses, inverted by
    monotone cubic interpolation."""

    def __init__(self, d: Density, tol: Tolerances = DEFAULT_TOLERANCES,
                 cells: int = TABULATION_CELLS):
        iv = d.support(tol.support_mass_cutoff)
        edges = sorted({iv.lo, iv.hi, *(b for b in d.breakpoints if iv.lo < b < iv.hi)})
        pieces = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            k = max(16, int(math.ceil(cells * (hi - lo) / iv.width)))
            pieces.append(np.linspace(lo, hi, k + 1)[:-1])
        x = np.append(np.concatenate(pieces), iv.hi)
        center = 0.5 * (x[1:] + x[:-1])
        half = 0.5 * (x[1:] - x[:-1])
        masses, _ = _kernels.gk21_reduce(d.pdf(center[:, None] + half[:, None] * NODES), half)
        cdf = np.concatenate([[0.0], np.cumsum(np.maximum(masses, 0.0))])
        total = cdf[-1]
        if not abs(total - 1.0) <= TABULATION_MASS_TOL:
            raise TabulationFailure(
                f"tabulated mass of {d.name} over [{iv.lo:g}, {iv.hi:g}] is {total!r}")
        cdf /= total
        cdf, first = np.unique(cdf, return_index=True)
        self.x = x[first]
        self.cdf = cdf
        self._ppf_slopes = _kernels.pchip_slopes(self.cdf, self.x)
        self._cdf_slopes = _kernels.pchip_slopes(self.x, self.cdf)

    def __call__(self, y):
        return _kernels.pchip_eval(self.x, self.cdf, self._cdf_slopes, y)

    def ppf(self, u):
        return _kernels.pchip_eval(self.cdf, self.x, self._ppf_slopes, u)


def sample_density(d: Density, n: int, seed, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """``n`` i.i.d. draws from ``d`` by inverse-CDF sampling."""
    if n < 1:
        raise InvalidParameter("sample size must be at least 1")
    table = TabulatedCDF(d, tol)
    return table.ppf(np.random.default_rng(seed).random(n))


def monte_carlo_error(rule, g0: Density, g1: Density, n: int, seed: int,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Monte Carlo estimate of the equal-prior error probability and its standard error.

    The randomized rule enters through its expectation ``delta(y)`` rather than
    a simulated coin flip.
    """
    if n < 10_000:
        raise InvalidParameter("Monte Carlo error needs at least 10^4 samples")
    y0 = sample_density(g0, n, np.random.SeedSequence([int(seed), 0]), tol)
    y1 = sample_density(g1, n, np.random.SeedSequence([int(seed), 1]), tol)
    false_alarm = np.asarray(rule(y0), dtype=float)
    miss = 1.0 - np.asarray(rule(y1), dtype=float)
    pe = 0.5 * (false_alarm.mean() + miss.mean())
    stderr = 0.5 * math.sqrt(false_alarm.var() / n + miss.var() / n)
    return float(pe), stderr
