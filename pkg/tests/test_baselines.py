import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import pinball_exact_min, pinball_objective
from vinestress.baselines import (
    detect_crossings,
    expectile_loss,
    fit_expectile,
    fit_linear_quantile,
    pinball_loss,
)
from vinestress.exceptions import InputError


class TestLinearQuantile:
    def test_median_intercept_only(self):
        fit = fit_linear_quantile(None, [1, 2, 3, 4, 5], 0.5)
        assert fit.coef[0] == pytest.approx(3.0)
        assert fit.objective == pytest.approx(3.0)

    def test_low_level_matches_grid_oracle(self):
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        fit = fit_linear_quantile(None, y, 0.2)
        oracle = min(pinball_objective(y, np.full(5, q), 0.2) for q in y)
        assert fit.objective == pytest.approx(oracle, abs=1e-8)
        # the minimizing set is [1, 2]; any point of it is acceptable
        assert 1.0 - 1e-9 <= fit.coef[0] <= 2.0 + 1e-9

    def test_exact_linear_data_recovered(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=40)
        y = 2.0 + 3.0 * x
        for level in (0.05, 0.3, 0.5, 0.7, 0.95):
            fit = fit_linear_quantile(x, y, level)
            assert_allclose(fit.coef, [2.0, 3.0], atol=1e-6)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_enumeration_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 36))
        d = int(rng.integers(0, 4))
        X = rng.normal(size=(n, d)) if d else None
        y = rng.normal(size=n) + (X @ rng.normal(size=d) if d else 0.0)
        level = float(rng.uniform(0.1, 0.9))
        fit = fit_linear_quantile(X, y, level)
        oracle = pinball_exact_min(X, y, level)
        assert fit.objective <= oracle * (1 + 1e-6) + 1e-12

    def test_rank_deficient_names_columns(self):
        # either member of the collinear pair may be reported
        x = np.linspace(0, 1, 30)
        X = np.column_stack([x, 2 * x])
        with pytest.raises(InputError, match="dependent: column [01]"):
            fit_linear_quantile(X, x, 0.5)

    def test_level_domain(self):
        with pytest.raises(InputError):
            fit_linear_quantile(None, [1.0, 2.0, 3.0], 1.0)

    def test_monotone_in_level_intercept_only(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=60)
        fits = [fit_linear_quantile(None, y, a).coef[0] for a in np.linspace(0.1, 0.9, 9)]
        assert np.all(np.diff(fits) >= -1e-9)


class TestExpectile:
    def test_half_is_mean(self):
        fit = fit_expectile(None, [1.0, 2.0, 6.0], 0.5)
        assert fit.coef[0] == pytest.approx(3.0)

    def test_half_equals_ols_with_covariates(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(80, 2))
        y = 1.0 + X @ np.array([2.0, -1.0]) + rng.normal(size=80)
        fit = fit_expectile(X, y, 0.5)
        design = np.column_stack([np.ones(80), X])
        ols, *_ = np.linalg.lstsq(design, y, rcond=None)
        assert_allclose(fit.coef, ols, atol=1e-8)

    def test_zero_ten_at_ninety(self):
        # solves 0.9 (10 - e) = 0.1 e
        fit = fit_expectile(None, [0.0, 10.0], 0.9)
        assert fit.coef[0] == pytest.approx(9.0, abs=1e-9)

    def test_first_order_condition(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(100, 2))
        y = X @ np.array([1.0, 2.0]) + rng.standard_t(df=4, size=100)
        for level in (0.1, 0.5, 0.9):
            fit = fit_expectile(X, y, level)
            design = np.column_stack([np.ones(100), X])
            r = y - design @ fit.coef
            w = np.where(r >= 0, level, 1 - level)
            assert np.max(np.abs(design.T @ (w * r))) < 1e-8

    def test_monotone_in_level_intercept_only(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=60)
        fits = [fit_expectile(None, y, a).coef[0] for a in np.linspace(0.1, 0.9, 9)]
        assert np.all(np.diff(fits) >= -1e-12)


class TestOptimalitySanity:
    def test_pinball_at_quantile_fit_beats_alternatives(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=120)
        y = 0.5 * x + rng.standard_t(df=3, size=120)
        design = np.column_stack([np.ones(120), x])
        ols, *_ = np.linalg.lstsq(design, y, rcond=None)
        for level in (0.2, 0.5, 0.8):
            qfit = fit_linear_quantile(x, y, level)
            efit = fit_expectile(x, y, level)
            obj_q = pinball_loss(y, design @ qfit.coef, level)
            assert obj_q <= pinball_loss(y, design @ efit.coef, level) + 1e-9
            assert obj_q <= pinball_loss(y, design @ ols, level) + 1e-9


class TestCrossings:
    def test_intercept_only_never_crosses(self):
        rng = np.random.default_rng(6)
        y = rng.normal(size=80)
        fits = [fit_linear_quantile(None, y, a) for a in (0.1, 0.25, 0.5, 0.75, 0.9)]
        report = detect_crossings(fits, np.zeros((7, 0)))
        assert report.total == 0

    def test_heteroscedastic_fan_crosses_beyond_data(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0.1, 1.1, 150)
        y = x * rng.normal(size=150)
        fits = [fit_linear_quantile(x, y, a) for a in (0.05, 0.25, 0.5, 0.75, 0.95)]
        grid = np.linspace(x.min() - 0.25 * np.ptp(x), x.max() + 0.25 * np.ptp(x), 101)
        report = detect_crossings(fits, grid)
        assert report.total >= 1

    def test_dvine_quantiles_never_cross(self):
        from vinestress.bicop import select_family
        from vinestress.dvine import DVineModel, conditional_quantile
        from vinestress.marginals import MarginalEcdf

        rng = np.random.default_rng(8)
        x = rng.uniform(0.1, 1.1, 150)
        y = x * rng.normal(size=150)
        ex, ey = MarginalEcdf(x), MarginalEcdf(y)
        pair = select_family(ey.evaluate(y), ex.evaluate(x))
        model = DVineModel(order=("y", "x"), pairs=((pair,),))
        grid = np.linspace(x.min() - 0.25 * np.ptp(x), x.max() + 0.25 * np.ptp(x), 101)
        ug = np.clip(ex.evaluate(grid), 1e-10, 1 - 1e-10)[:, None]
        preds = np.stack(
            [ey.quantile(conditional_quantile(model, a, ug)) for a in (0.05, 0.25, 0.5, 0.75, 0.95)]
        )
        assert np.all(preds[:-1] - preds[1:] <= 1e-12)

    def test_unsorted_levels_rejected(self):
        rng = np.random.default_rng(9)
        y = rng.normal(size=50)
        fits = [fit_linear_quantile(None, y, a) for a in (0.5, 0.1)]
        with pytest.raises(InputError, match="increasing"):
            detect_crossings(fits, np.zeros((3, 0)))

    def test_needs_two_fits(self):
        fit = fit_linear_quantile(None, [1.0, 2.0, 3.0], 0.5)
        with pytest.raises(InputError):
            detect_crossings([fit], np.zeros((3, 0)))


class TestLosses:
    def test_pinball_symmetry_at_half(self):
        y = np.array([1.0, -2.0, 0.5])
        assert pinball_loss(y, np.zeros(3), 0.5) == pytest.approx(0.5 * np.sum(np.abs(y)))

    def test_expectile_loss_weights(self):
        assert expectile_loss([1.0], [0.0], 0.9) == pytest.approx(0.9)
        assert expectile_loss([-1.0], [0.0], 0.9) == pytest.approx(0.1)
