import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import bvn_cdf_quad, fd_density, fd_du, fd_dv, tau_quad
from vinestress.bicop import (
    ALL_FAMILIES,
    DEFAULT_FAMILIES,
    INDEPENDENCE,
    BivariateCopula,
    CopulaFamily,
    fit_mle,
    param_to_tau,
    select_family,
    tau_range,
    tau_to_param,
)
from vinestress.bicop import _bvn_cdf
from vinestress.dvine import DVineModel, simulate
from vinestress.exceptions import InputError, TauDomainError

# one representative parameterization per family, all rotations where valid
CASES = [
    BivariateCopula(CopulaFamily.GAUSSIAN, 0, 0.5),
    BivariateCopula(CopulaFamily.GAUSSIAN, 0, -0.7),
    BivariateCopula(CopulaFamily.CLAYTON, 0, 2.0),
    BivariateCopula(CopulaFamily.CLAYTON, 90, 2.0),
    BivariateCopula(CopulaFamily.CLAYTON, 180, 2.0),
    BivariateCopula(CopulaFamily.CLAYTON, 270, 2.0),
    BivariateCopula(CopulaFamily.GUMBEL, 0, 2.0),
    BivariateCopula(CopulaFamily.GUMBEL, 90, 1.7),
    BivariateCopula(CopulaFamily.GUMBEL, 180, 2.4),
    BivariateCopula(CopulaFamily.GUMBEL, 270, 1.5),
    BivariateCopula(CopulaFamily.FRANK, 0, 5.0),
    BivariateCopula(CopulaFamily.FRANK, 0, -4.0),
    BivariateCopula(CopulaFamily.JOE, 0, 2.5),
    BivariateCopula(CopulaFamily.JOE, 90, 2.0),
    BivariateCopula(CopulaFamily.JOE, 180, 3.0),
    BivariateCopula(CopulaFamily.JOE, 270, 2.0),
]

GRID = np.linspace(0.05, 0.95, 10)
U_GRID, V_GRID = np.meshgrid(GRID, GRID)


def sample_pair(cop, n, seed):
    u = simulate(DVineModel(order=("u", "v"), pairs=((cop,),)), n, seed=seed)
    return u[:, 0], u[:, 1]


class TestCdf:
    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_margins(self, cop):
        # C(u, 1) = u and C(1, v) = v pin the CDF independently of densities
        u = np.linspace(0.05, 0.95, 9)
        assert_allclose(cop.cdf(u, np.ones_like(u)), u, atol=1e-9)
        assert_allclose(cop.cdf(np.ones_like(u), u), u, atol=1e-9)
        assert np.all(cop.cdf(u, np.full_like(u, 1e-10)) < 1e-8)

    def test_gaussian_cdf_against_quadrature(self):
        from scipy.special import ndtri

        cop = BivariateCopula(CopulaFamily.GAUSSIAN, 0, 0.55)
        for u, v in [(0.3, 0.7), (0.5, 0.5), (0.9, 0.1), (0.05, 0.95), (0.6, 0.6)]:
            assert cop.cdf(u, v) == pytest.approx(
                bvn_cdf_quad(ndtri(u), ndtri(v), 0.55), abs=1e-9
            )

    def test_bvn_cdf_negative_orthant(self):
        assert _bvn_cdf(-0.5, -1.2, -0.4) == pytest.approx(
            bvn_cdf_quad(-0.5, -1.2, -0.4), abs=1e-9
        )


class TestDensity:
    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_matches_fd_mixed_partial(self, cop):
        assert_allclose(
            cop.density(U_GRID, V_GRID), fd_density(cop, U_GRID, V_GRID), atol=5e-6
        )

    def test_clayton_spec_point(self):
        cop = BivariateCopula(CopulaFamily.CLAYTON, 0, 2.0)
        assert cop.density(0.3, 0.7) == pytest.approx(fd_density(cop, 0.3, 0.7), abs=1e-6)

    def test_independence_is_one(self):
        assert_allclose(INDEPENDENCE.density(U_GRID, V_GRID), 1.0)

    def test_gaussian_zero_rho_is_one(self):
        cop = BivariateCopula(CopulaFamily.GAUSSIAN, 0, 0.0)
        assert_allclose(cop.density(U_GRID, V_GRID), 1.0, atol=1e-12)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_integrates_to_one(self, cop):
        # integrate in normal space where the transformed density is bounded
        from scipy.special import ndtr

        nodes, weights = np.polynomial.legendre.leggauss(160)
        half = 8.0
        x = half * nodes
        w = half * weights
        X, Y = np.meshgrid(x, x)
        phi = np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)
        dens = cop.density(ndtr(X), ndtr(Y))
        total = np.einsum("i,j,ij->", w * phi, w * phi, dens)
        assert total == pytest.approx(1.0, abs=1e-4)

    def test_180_rotation_reflects_density(self):
        base = BivariateCopula(CopulaFamily.GUMBEL, 0, 2.0)
        rot = BivariateCopula(CopulaFamily.GUMBEL, 180, 2.0)
        assert_allclose(rot.density(U_GRID, V_GRID), base.density(1 - U_GRID, 1 - V_GRID))


class TestHFunctions:
    def test_independence_identity(self):
        u = np.linspace(0.1, 0.9, 5)
        assert_allclose(INDEPENDENCE.hfunc(1, u, np.full_like(u, 0.3)), u)
        assert_allclose(INDEPENDENCE.hinv(1, u, np.full_like(u, 0.3)), u)

    def test_gaussian_center(self):
        cop = BivariateCopula(CopulaFamily.GAUSSIAN, 0, 0.8)
        assert cop.hfunc(1, 0.5, 0.5) == pytest.approx(0.5)

    def test_gumbel_spec_point(self):
        cop = BivariateCopula(CopulaFamily.GUMBEL, 0, 2.0)
        assert cop.hfunc(1, 0.3, 0.7) == pytest.approx(fd_dv(cop, 0.3, 0.7), abs=1e-6)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_matches_fd_of_cdf(self, cop):
        assert_allclose(cop.hfunc(1, U_GRID, V_GRID), fd_dv(cop, U_GRID, V_GRID), atol=1e-5)
        assert_allclose(cop.hfunc(2, U_GRID, V_GRID), fd_du(cop, U_GRID, V_GRID), atol=1e-5)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_boundary_limits(self, cop):
        v = np.linspace(0.2, 0.8, 5)
        assert np.all(cop.hfunc(1, np.full_like(v, 1e-8), v) < 0.05)
        assert np.all(cop.hfunc(1, np.full_like(v, 1 - 1e-8), v) > 0.95)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_monotone_in_free_argument(self, cop):
        u = np.linspace(0.02, 0.98, 60)
        for v in (0.2, 0.5, 0.8):
            h = cop.hfunc(1, u, np.full_like(u, v))
            assert np.all(np.diff(h) >= -1e-12)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    @pytest.mark.parametrize("which", [1, 2])
    def test_hinv_round_trip_on_grid(self, cop, which):
        p, w = U_GRID.ravel(), V_GRID.ravel()
        x = cop.hinv(which, p, w)
        if which == 1:
            back = cop.hfunc(which, x, w)
        else:
            back = cop.hfunc(which, w, x)
        assert_allclose(back, p, atol=1e-8)

    def test_frank_hinv_matches_bisection(self):
        cop = BivariateCopula(CopulaFamily.FRANK, 0, 5.0)
        p, v = 0.9, 0.2
        lo, hi = 1e-12, 1 - 1e-12
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if cop.hfunc(1, mid, v) < p:
                lo = mid
            else:
                hi = mid
        assert cop.hinv(1, p, v) == pytest.approx(0.5 * (lo + hi), abs=1e-12)


class TestTauMaps:
    def test_gaussian_zero(self):
        assert tau_to_param(CopulaFamily.GAUSSIAN, 0, 0.0) == pytest.approx(0.0)

    def test_clayton_half_against_quadrature(self):
        theta = tau_to_param(CopulaFamily.CLAYTON, 0, 0.5)
        assert theta == pytest.approx(2.0)
        cop = BivariateCopula(CopulaFamily.CLAYTON, 0, 2.0)
        assert tau_quad(cop) == pytest.approx(0.5, abs=1e-3)

    def test_gumbel_half_against_quadrature(self):
        cop = BivariateCopula(CopulaFamily.GUMBEL, 0, 2.0)
        assert param_to_tau(cop) == pytest.approx(0.5)
        assert tau_quad(cop) == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("cop", CASES, ids=repr)
    def test_param_to_tau_matches_quadrature(self, cop):
        assert param_to_tau(cop) == pytest.approx(tau_quad(cop), abs=1e-3)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_round_trip_identity(self, family):
        lo, hi = tau_range(family, 0)
        for tau in np.linspace(max(lo, -0.85) + 0.1, min(hi, 0.85) - 0.05, 5):
            if family is CopulaFamily.FRANK and abs(tau) < 1e-6:
                continue
            if tau <= lo:
                continue
            theta = tau_to_param(family, 0, float(tau))
            cop = BivariateCopula(family, 0, theta)
            assert param_to_tau(cop) == pytest.approx(tau, abs=1e-8)

    @pytest.mark.parametrize("family", [CopulaFamily.CLAYTON, CopulaFamily.GUMBEL, CopulaFamily.JOE])
    @pytest.mark.parametrize("rotation", [90, 270])
    def test_negative_rotations_flip_tau(self, family, rotation):
        theta = tau_to_param(family, rotation, -0.4)
        rotated = BivariateCopula(family, rotation, theta)
        upright = BivariateCopula(family, 0, theta)
        assert param_to_tau(rotated) == pytest.approx(-param_to_tau(upright))
        assert param_to_tau(rotated) == pytest.approx(-0.4, abs=1e-8)

    def test_unattainable_tau_names_range(self):
        with pytest.raises(TauDomainError, match="range"):
            tau_to_param(CopulaFamily.CLAYTON, 0, -0.3)
        with pytest.raises(TauDomainError):
            tau_to_param(CopulaFamily.FRANK, 0, 0.0)


class TestFit:
    def test_gaussian_recovery_within_sampling_error(self):
        u, v = sample_pair(BivariateCopula(CopulaFamily.GAUSSIAN, 0, 0.6), 2000, seed=42)
        fit = fit_mle(CopulaFamily.GAUSSIAN, 0, u, v)
        assert abs(fit.parameter - 0.6) <= 3 * (1 - 0.6**2) / np.sqrt(2000)
        assert fit.nobs == 2000
        assert fit.loglik > 0

    def test_loglik_not_below_tau_initializer(self):
        from vinestress.marginals import kendall_tau

        u, v = sample_pair(BivariateCopula(CopulaFamily.GUMBEL, 0, 2.2), 500, seed=3)
        fit = fit_mle(CopulaFamily.GUMBEL, 0, u, v)
        theta0 = tau_to_param(CopulaFamily.GUMBEL, 0, kendall_tau(u, v))
        init = BivariateCopula(CopulaFamily.GUMBEL, 0, theta0)
        assert fit.loglik >= init.loglik_at(u, v) - 1e-9

    def test_independence_data_small_rho(self):
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            fit = fit_mle(
                CopulaFamily.GAUSSIAN, 0, rng.uniform(size=2000), rng.uniform(size=2000)
            )
            hits += abs(fit.parameter) < 0.1
        assert hits >= 19  # >= 95 percent of seeds

    def test_too_few_pairs(self):
        with pytest.raises(InputError):
            fit_mle(CopulaFamily.GAUSSIAN, 0, np.full(5, 0.5), np.full(5, 0.5))

    def test_tau_outside_family_range_signals(self):
        u, v = sample_pair(BivariateCopula(CopulaFamily.GAUSSIAN, 0, -0.6), 400, seed=1)
        with pytest.raises(TauDomainError):
            fit_mle(CopulaFamily.CLAYTON, 0, u, v)


class TestSelectFamily:
    def test_clayton_recovered(self):
        hits = 0
        for seed in range(20):
            u, v = sample_pair(BivariateCopula(CopulaFamily.CLAYTON, 0, 3.0), 2000, seed=seed)
            sel = select_family(u, v)
            hits += sel.family is CopulaFamily.CLAYTON and sel.rotation == 0
        assert hits >= 18  # >= 90 percent of seeds

    def test_independence_recovered(self):
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            sel = select_family(rng.uniform(size=2000), rng.uniform(size=2000))
            hits += sel.family is CopulaFamily.INDEPENDENCE
        assert hits >= 16  # >= 80 percent of seeds

    def test_negative_dependence_gets_negative_rotation(self):
        theta = tau_to_param(CopulaFamily.CLAYTON, 90, -0.4)
        hits = 0
        for seed in range(10):
            u, v = sample_pair(BivariateCopula(CopulaFamily.CLAYTON, 90, theta), 2000, seed=seed)
            sel = select_family(u, v)
            hits += (sel.rotation in (90, 270)) or (
                sel.family in (CopulaFamily.GAUSSIAN, CopulaFamily.FRANK)
                and param_to_tau(sel) < 0
            )
        assert hits == 10
        # and at least the modal choice should be a rotated asymmetric family
        sel = select_family(*sample_pair(BivariateCopula(CopulaFamily.CLAYTON, 90, theta), 4000, seed=0))
        assert sel.rotation in (90, 270)

    def test_candidate_subset_respected(self):
        u, v = sample_pair(BivariateCopula(CopulaFamily.CLAYTON, 0, 3.0), 1000, seed=0)
        sel = select_family(u, v, families=(CopulaFamily.GAUSSIAN,))
        assert sel.family in (CopulaFamily.GAUSSIAN, CopulaFamily.INDEPENDENCE)


class TestValidation:
    def test_rotation_only_for_asymmetric_families(self):
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.GAUSSIAN, 90, 0.5)
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.FRANK, 180, 2.0)

    def test_parameter_domains(self):
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.GAUSSIAN, 0, 1.0)
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.CLAYTON, 0, 0.0)
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.GUMBEL, 0, 0.9)
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.FRANK, 0, 0.0)
        with pytest.raises(InputError):
            BivariateCopula(CopulaFamily.INDEPENDENCE, 0, 1.0)
        BivariateCopula(CopulaFamily.GUMBEL, 0, 1.0)  # boundary allowed

    def test_json_round_trip(self):
        cop = BivariateCopula(CopulaFamily.GUMBEL, 180, 2.25, loglik=12.5, nobs=400)
        d = cop.to_dict()
        assert set(d) == {"family", "rotation", "parameter", "loglik", "n"}
        assert BivariateCopula.from_dict(d) == cop
