import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy import stats

from klminimax import densities as dn
from klminimax import saddle
from klminimax.errors import DegenerateRule, InfeasibleTolerance, InvalidParameter, UnvalidatedPair
from klminimax.numerics import gaussian_tail_q

# frozen values from an independent scipy implementation (quad + brentq)
GAUSS_Y_U = 0.6083526177881715
GAUSS_Z = 1.3435896086249168
GAUSS_PE = 0.3249306678286402
GAUSS_Z_AT_0608 = 1.3432817983743686
GAUSS_D_AT_0608 = 0.09989312383579552
LAPLACE_Y_U = 0.36342260242015006
LAPLACE_Z = 1.0759508191070801
LAPLACE_PE = 0.05957415430135853
GEN_GAUSS_Y_U = 0.5034606507782213
GEN_GAUSS_PE = 0.3088231822523614


def trapezoid_normalizer(y_U, n=1_000_000, half_width=40.0):
    # brute force on the raw three-segment formula, Gaussian sigma=1
    y = np.linspace(-half_width, half_width, n)
    f0 = stats.norm.pdf(y, loc=-1.0)
    f1 = stats.norm.pdf(y, loc=1.0)
    ell = math.exp(2 * y_U)
    g = np.where(y < -y_U, f0, np.where(y > y_U, ell * f0, math.sqrt(ell) * np.sqrt(f0 * f1)))
    return np.trapezoid(g, y) if hasattr(np, "trapezoid") else np.trapz(g, y)


class TestDivergenceAt:
    def test_zero(self, families):
        for pair in families.values():
            assert saddle.divergence_at(pair, 0.0) == pytest.approx(0.0, abs=1e-10)

    def test_large_breakpoint_reaches_midway(self, gauss):
        assert saddle.divergence_at(gauss, 50.0) == pytest.approx(0.5, abs=1e-6)

    def test_published_breakpoint(self, gauss):
        assert saddle.divergence_at(gauss, 0.6080) == pytest.approx(0.1, abs=1e-3)
        assert saddle.divergence_at(gauss, 0.6080) == pytest.approx(GAUSS_D_AT_0608, abs=1e-9)

    def test_large_breakpoint_laplace(self, laplace):
        assert saddle.divergence_at(laplace, 40.0) == pytest.approx(
            dn.midway_divergence(laplace), abs=1e-6)

    def test_rejects_negative(self, gauss):
        with pytest.raises(InvalidParameter):
            saddle.divergence_at(gauss, -0.1)

    def test_strictly_increasing(self, families):
        grid = np.linspace(0.0, 5.0, 200)
        for pair in families.values():
            d = np.array([saddle.divergence_at(pair, y) for y in grid])
            assert np.all(np.diff(d) > 0)

    def test_matches_direct_kl(self, families):
        rng = np.random.default_rng(20261019)
        names = list(families)
        for _ in range(20):
            pair = families[names[rng.integers(len(names))]]
            y_U = float(rng.uniform(0.05, 3.0))
            sp = saddle.construct(pair, y_U)
            direct = dn.kl_divergence(sp.g0L, pair.f0)
            assert saddle.divergence_at(pair, y_U) == pytest.approx(direct, abs=1e-8)


class TestNormalizer:
    def test_zero(self, families):
        for pair in families.values():
            assert saddle.normalizer(pair, 0.0) == pytest.approx(1.0, abs=1e-10)

    def test_trapezoid_oracle(self, gauss):
        assert saddle.normalizer(gauss, 0.6080) == pytest.approx(trapezoid_normalizer(0.6080), abs=1e-6)
        assert saddle.normalizer(gauss, 0.6080) == pytest.approx(GAUSS_Z_AT_0608, abs=1e-9)

    def test_exceeds_one(self, families):
        for pair in families.values():
            for y_U in np.linspace(0.01, 4.0, 25):
                assert saddle.normalizer(pair, y_U) > 1.0

    def test_huge_breakpoint_does_not_overflow(self, gauss):
        # ell_U = exp(2 y_U) overflows a double well before y_U = 400
        assert math.isfinite(saddle.divergence_at(gauss, 400.0))


class TestSolve:
    def test_gaussian_published(self, gauss_sp):
        assert gauss_sp.y_U == pytest.approx(0.6080, abs=5e-3)

    def test_gaussian_oracle(self, gauss_sp):
        assert gauss_sp.y_U == pytest.approx(GAUSS_Y_U, abs=1e-8)
        assert gauss_sp.Z == pytest.approx(GAUSS_Z, rel=1e-9)

    def test_laplace_published(self, laplace_sp):
        assert laplace_sp.y_U == pytest.approx(0.3640, abs=5e-3)
        assert laplace_sp.y_U == pytest.approx(LAPLACE_Y_U, abs=1e-8)
        assert laplace_sp.Z == pytest.approx(LAPLACE_Z, rel=1e-9)

    def test_generalized_gaussian_oracle(self, gen_gauss):
        sp = saddle.solve(gen_gauss, 0.1)
        assert sp.y_U == pytest.approx(GEN_GAUSS_Y_U, abs=1e-8)
        assert saddle.worst_case_error(sp) == pytest.approx(GEN_GAUSS_PE, abs=1e-9)

    def test_infeasible(self, gauss):
        with pytest.raises(InfeasibleTolerance):
            saddle.solve(gauss, 0.6)
        with pytest.raises(InfeasibleTolerance):
            saddle.solve(gauss, 0.5 - 1e-7)

    def test_near_bound_is_feasible(self, gauss):
        sp = saddle.solve(gauss, 0.49)
        assert saddle.divergence_at(gauss, sp.y_U) == pytest.approx(0.49, abs=1e-6)

    def test_unvalidated(self):
        with pytest.raises(UnvalidatedPair):
            saddle.solve(dn.cauchy_pair(1.0), 0.1)
        lopsided = dn.NominalPair.build(dn.normal(-1.0, 2.0), dn.normal(1.0, 1.0))
        with pytest.raises(UnvalidatedPair):
            saddle.solve(lopsided, 0.1)

    @pytest.mark.parametrize("eps", [0.0, -0.1, math.nan])
    def test_rejects_bad_epsilon(self, gauss, eps):
        with pytest.raises(InvalidParameter):
            saddle.solve(gauss, eps)

    @pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
    def test_kkt_boundary(self, families, eps):
        for pair in families.values():
            sp = saddle.solve(pair, eps)
            assert dn.kl_divergence(sp.g0L, pair.f0) == pytest.approx(eps, abs=1e-6)
            assert dn.kl_divergence(sp.g1L, pair.f1) == pytest.approx(eps, abs=1e-6)

    def test_saddle_point_invariants(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            assert sp.ell_U > 1
            assert sp.ell_U == pytest.approx(math.exp(dn.log_likelihood_ratio(pair, sp.y_U)), rel=1e-10)
            assert sp.g0L.mass() == pytest.approx(1.0, abs=1e-8)
            assert sp.g1L.mass() == pytest.approx(1.0, abs=1e-8)
            y = dn.validation_grid(pair, 1001)
            assert np.max(np.abs(sp.g1L.pdf(y) - sp.g0L.pdf(-y))) <= 1e-10

    def test_degenerate_epsilon(self, gauss):
        sp = saddle.solve(gauss, 1e-12)
        assert sp.y_U == 0.0 and sp.degenerate
        assert sp.rule(0.3) == 1.0 and sp.rule(-0.3) == 0.0
        with pytest.raises(DegenerateRule):
            saddle.robust_rule(sp)
        y = np.linspace(-4, 4, 41)
        assert np.allclose(sp.g0L.pdf(y), gauss.f0.pdf(y), atol=1e-14)


class TestLeastFavorableDensities:
    def test_continuity_at_breakpoint(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            h = 1e-6
            for d in (sp.g0L, sp.g1L):
                for edge in (-sp.y_U, sp.y_U):
                    assert abs(d.pdf(edge - h) - d.pdf(edge + h)) <= 1e-5

    def test_segments(self, gauss_sp, gauss):
        z, ell = gauss_sp.Z, gauss_sp.ell_U
        assert gauss_sp.g0L.pdf(-2.0) == pytest.approx(gauss.f0.pdf(-2.0) / z, rel=1e-12)
        assert gauss_sp.g0L.pdf(2.0) == pytest.approx(ell * gauss.f0.pdf(2.0) / z, rel=1e-12)
        mid = math.sqrt(ell * gauss.f0.pdf(0.2) * gauss.f1.pdf(0.2)) / z
        assert gauss_sp.g0L.pdf(0.2) == pytest.approx(mid, rel=1e-12)
        assert saddle.lf_density_0(gauss_sp) is gauss_sp.g0L
        assert saddle.lf_density_1(gauss_sp) is gauss_sp.g1L

    def test_laplace_constant_middle(self, laplace_sp):
        y = np.linspace(-laplace_sp.y_U, laplace_sp.y_U, 101)
        g = laplace_sp.g0L.pdf(y)
        assert np.max(g) - np.min(g) <= 1e-10

    def test_exponential_tilt(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            y = dn.validation_grid(pair, 1000)
            delta = sp.rule(y)
            log_z = math.log(sp.Z)
            tilt0 = sp.g0L.log_pdf(y) - pair.f0.log_pdf(y)
            tilt1 = sp.g1L.log_pdf(y) - pair.f1.log_pdf(y)
            assert np.max(np.abs(tilt0 - (sp.log_ell_U * delta - log_z))) <= 1e-8
            assert np.max(np.abs(tilt1 - (sp.log_ell_U * (1 - delta) - log_z))) <= 1e-8


class TestRobustRule:
    def test_values(self, gauss_sp):
        rule = saddle.robust_rule(gauss_sp)
        assert rule(0.0) == 0.5
        assert rule(gauss_sp.y_U) == pytest.approx(1.0, abs=1e-12)
        assert rule(gauss_sp.y_U / 2) == pytest.approx(0.75, abs=1e-12)
        assert rule(-gauss_sp.y_U / 2) == pytest.approx(0.25, abs=1e-12)
        assert rule(3.0) == 1.0 and rule(-3.0) == 0.0

    def test_range_and_symmetry(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            rule = saddle.robust_rule(sp)
            y = dn.validation_grid(pair, 2001)
            v = rule(y)
            assert np.all((v >= 0) & (v <= 1))
            assert np.max(np.abs(1 - v - rule(-y))) <= 1e-10
            assert np.all(v[y > sp.y_U] == 1.0) and np.all(v[y < -sp.y_U] == 0.0)

    def test_threshold_rule(self):
        rule = saddle.threshold_rule(0.3)
        assert rule(0.3) == 0.5 and rule(0.31) == 1.0 and rule(0.29) == 0.0


class TestQTransform:
    def test_examples(self):
        assert saddle.q_transform(1.0, 3.0) == 1.0
        assert saddle.q_transform(6.0, 3.0) == pytest.approx(2.0, abs=1e-15)
        assert saddle.q_transform(0.1, 3.0) == pytest.approx(0.3, abs=1e-15)

    def test_branches_and_reciprocity(self):
        ell = np.logspace(-6, 6, 1201)
        for ell_U in (1.01, 2.0, 40.0):
            q = saddle.q_transform(ell, ell_U)
            assert np.all(np.diff(q) >= 0)
            assert np.allclose(saddle.q_transform(1 / ell, ell_U), 1 / q, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("ell,ell_U", [(1.0, 1.0), (1.0, 0.5), (0.0, 2.0), (-1.0, 2.0)])
    def test_preconditions(self, ell, ell_U):
        with pytest.raises(InvalidParameter):
            saddle.q_transform(ell, ell_U)


class TestLeastFavorableRatio:
    def test_middle_band(self, gauss_sp):
        assert saddle.lf_likelihood_ratio(gauss_sp, 0.0) == 1.0
        y = np.random.default_rng(3).uniform(-gauss_sp.y_U, gauss_sp.y_U, 500)
        assert np.max(np.abs(saddle.lf_likelihood_ratio(gauss_sp, y) - 1.0)) <= 1e-12

    def test_upper_branch(self, gauss_sp):
        assert saddle.lf_likelihood_ratio(gauss_sp, 2.0) == pytest.approx(
            math.exp(4.0) / gauss_sp.ell_U, abs=1e-8)

    def test_matches_density_ratio_and_q(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            y = dn.validation_grid(pair, 1000)
            lr = saddle.lf_likelihood_ratio(sp, y)
            ratio = np.exp(sp.g1L.log_pdf(y) - sp.g0L.log_pdf(y))
            q = saddle.q_transform(np.exp(pair.log_lr(y)), sp.ell_U)
            assert np.max(np.abs(lr - q) / np.maximum(1.0, q)) <= 1e-10
            assert np.max(np.abs(lr - ratio) / np.maximum(1.0, ratio)) <= 1e-10


class TestErrors:
    def test_gaussian_oracle(self, gauss_sp, laplace_sp):
        assert saddle.worst_case_error(gauss_sp) == pytest.approx(GAUSS_PE, abs=1e-9)
        assert saddle.worst_case_error(laplace_sp) == pytest.approx(LAPLACE_PE, abs=1e-9)

    def test_small_epsilon_limit(self, gauss):
        sp = saddle.solve(gauss, 1e-6)
        assert saddle.worst_case_error(sp) == pytest.approx(gaussian_tail_q(1.0), abs=1e-3)

    def test_matches_error_prob(self, families):
        for pair in families.values():
            sp = saddle.solve(pair, 0.1)
            pe = saddle.worst_case_error(sp)
            probs = saddle.error_prob(sp.rule, sp.g0L, sp.g1L)
            assert probs.pf == pytest.approx(pe, abs=1e-6)
            assert probs.pm == pytest.approx(pe, abs=1e-6)
            assert probs.pe == pytest.approx(pe, abs=1e-6)

    def test_constant_rules(self, gauss):
        assert tuple(saddle.error_prob(saddle.constant_rule(1.0), gauss.f0, gauss.f1)) == \
            pytest.approx((1.0, 0.0, 0.5), abs=1e-10)
        assert tuple(saddle.error_prob(saddle.constant_rule(0.0), gauss.f0, gauss.f1)) == \
            pytest.approx((0.0, 1.0, 0.5), abs=1e-10)

    def test_ml_rule(self, gauss):
        pe = saddle.error_prob(saddle.threshold_rule(0.0), gauss.f0, gauss.f1).pe
        assert pe == pytest.approx(gaussian_tail_q(1.0), abs=1e-6)

    def test_plain_callable(self, gauss):
        probs = saddle.error_prob(lambda y: (np.asarray(y) > 0).astype(float), gauss.f0, gauss.f1,
                                  breakpoints=(0.0,))
        assert probs.pf == pytest.approx(gaussian_tail_q(1.0), abs=1e-9)

    def test_monotone_in_epsilon(self, families):
        for pair in families.values():
            pe = [saddle.worst_case_error(saddle.solve(pair, e)) for e in (0.001, 0.01, 0.05, 0.1, 0.2)]
            assert all(b >= a for a, b in zip(pe, pe[1:]))

    def test_scipy_error_oracle(self, laplace_sp):
        # false alarm of the robust rule against the LF density by scipy quad
        sp = laplace_sp
        pts = [-1.0, -sp.y_U, sp.y_U, 1.0]
        pf = sp_integrate.quad(lambda t: float(sp.rule(t) * sp.g0L.pdf(t)), -40, 40,
                               points=pts, limit=400, epsabs=1e-13)[0]
        assert pf == pytest.approx(saddle.worst_case_error(sp), abs=1e-9)
