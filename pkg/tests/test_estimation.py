import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bellgarch import bell_dist
from bellgarch.estimation import (
    FitError,
    FitOptions,
    LikelihoodError,
    central_difference,
    finite_diff_gradient,
    fit_cml,
    hessian,
    log_likelihood,
    score,
)
from bellgarch.ingarch import IngarchSpec, simulate

A1 = IngarchSpec.linear11(0.6, 0.06, 0.10)
B2 = IngarchSpec.nonlinear11(0.5, 0.05, 0.2, 0.8)


@pytest.fixture(scope="module")
def a1_series():
    return simulate(A1, 400, seed=42)[0]


@pytest.fixture(scope="module")
def b2_series():
    return simulate(B2, 400, seed=7)[0]


class TestLogLikelihood:
    def test_iid_reduction(self, a1_series):
        # alphas = betas = 0 collapses to the i.i.d. Bell likelihood
        spec = IngarchSpec(alpha0=0.9, alphas=(0.0,), betas=(0.0,))
        ll, path = log_likelihood(spec, a1_series)
        ref = bell_dist.log_pmf(a1_series.values, bell_dist.BellParams(0.9)).sum()
        assert_allclose(ll, ref, rtol=1e-12)
        assert_allclose(path.lambdas, 0.9)

    def test_poisson_iid_reduction(self, a1_series):
        from scipy import stats

        spec = IngarchSpec(alpha0=1.3, alphas=(0.0,), betas=(0.0,))
        ll, _ = log_likelihood(spec, a1_series, family="poisson")
        ref = stats.poisson.logpmf(a1_series.values, 1.3).sum()
        assert_allclose(ll, ref, rtol=1e-12)

    def test_lambda0_override(self, a1_series):
        ll_default, _ = log_likelihood(A1, a1_series)
        ll_override, _ = log_likelihood(A1, a1_series, lambda0_override=2.0)
        assert ll_default != ll_override
        with pytest.raises(ValueError):
            log_likelihood(A1, a1_series, lambda0_override=-1.0)

    def test_infeasible_spec_rejected(self, a1_series):
        with pytest.raises(ValueError):
            log_likelihood(IngarchSpec.linear11(0.5, 0.6, 0.5), a1_series)


class TestDerivativeOracles:
    def test_central_difference_on_quadratic(self):
        # calibration hook: exact gradient of a known quadratic
        A = np.array([[2.0, 0.5], [0.5, 3.0]])
        b = np.array([1.0, -2.0])
        f = lambda x: 0.5 * x @ A @ x + b @ x
        x0 = np.array([0.3, -0.7])
        g = central_difference(f, x0, 1e-6)
        assert_allclose(g, A @ x0 + b, atol=1e-8)

    def test_fd_convergence_order(self, a1_series):
        spec = IngarchSpec.linear11(0.5, 0.1, 0.2)
        exact = score(spec, a1_series)
        e1 = np.abs(finite_diff_gradient(spec, a1_series, h=1e-3) - exact)
        e2 = np.abs(finite_diff_gradient(spec, a1_series, h=5e-4) - exact)
        # halving h shrinks the error about fourfold (second order)
        assert np.all(e2 <= e1 / 3.0 + 1e-10)

    def test_fd_boundary_margin(self, a1_series):
        near_boundary = IngarchSpec.linear11(0.5, 1e-8, 0.2)
        with pytest.raises(ValueError):
            finite_diff_gradient(near_boundary, a1_series, h=1e-6)


class TestScoreHessian:
    @pytest.mark.parametrize("family", ["bell", "poisson"])
    def test_score_matches_fd_linear(self, a1_series, family):
        for spec in (IngarchSpec.linear11(0.5, 0.1, 0.2),
                     IngarchSpec.linear11(0.8, 0.04, 0.5)):
            s = score(spec, a1_series, family=family)
            fd = finite_diff_gradient(spec, a1_series, h=1e-6, family=family)
            assert_allclose(s, fd, rtol=1e-5, atol=1e-8)

    def test_score_matches_fd_nonlinear(self, b2_series):
        for spec in (B2, IngarchSpec.nonlinear11(0.4, 0.07, 0.4, 2.0)):
            s = score(spec, b2_series)
            fd = finite_diff_gradient(spec, b2_series, h=1e-6)
            assert_allclose(s, fd, rtol=1e-5, atol=1e-8)

    def test_score_random_interior_points(self):
        # broad sweep: random feasible interior points on several series
        rng = np.random.default_rng(12345)
        for i in range(10):
            series = simulate(A1, 200, seed=500 + i)[0]
            for _ in range(5):
                a0 = rng.uniform(0.2, 1.5)
                a1 = rng.uniform(0.01, 0.3)
                b1 = rng.uniform(0.01, 0.6)
                if a1 + b1 > 0.9:
                    continue
                spec = IngarchSpec.linear11(a0, a1, b1)
                s = score(spec, series)
                fd = finite_diff_gradient(spec, series, h=1e-6)
                assert_allclose(s, fd, rtol=1e-5, atol=1e-8)

    def test_hessian_matches_fd_of_score(self, a1_series):
        spec = IngarchSpec.linear11(0.5, 0.1, 0.2)
        nh = hessian(spec, a1_series)
        assert_allclose(nh, nh.T)
        h = 1e-5
        fd = np.empty((3, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            sp = score(IngarchSpec.from_theta(spec.theta + e, "linear"), a1_series)
            sm = score(IngarchSpec.from_theta(spec.theta - e, "linear"), a1_series)
            fd[:, i] = (sp - sm) / (2 * h)
        assert_allclose(-nh, fd, rtol=1e-4, atol=1e-6)

    def test_iid_reduction_score(self, a1_series):
        # d/d alpha0 of the i.i.d. Bell likelihood is sum(x/a0 - exp(a0))
        spec = IngarchSpec.linear11(0.9, 1e-7, 1e-7)
        s = score(spec, a1_series)
        x = a1_series.values.astype(float)
        ref = np.sum(x / 0.9 - math.exp(0.9))
        assert_allclose(s[0], ref, rtol=1e-5)


class TestFit:
    def test_recovers_simulated_parameters(self):
        series = simulate(A1, 3000, seed=1)[0]
        fit = fit_cml(series)
        assert fit.converged
        assert_allclose(fit.coefficients, A1.theta, atol=0.12)

    def test_gradient_small_at_optimum(self, a1_series):
        fit = fit_cml(a1_series)
        g = score(fit.spec_hat, a1_series)
        # transformed-space convergence maps back through the Jacobian;
        # interior optima keep the raw gradient modest
        assert np.linalg.norm(g) < 0.5

    def test_loglik_recomputes(self, a1_series):
        fit = fit_cml(a1_series)
        ll, _ = log_likelihood(fit.spec_hat, a1_series)
        assert_allclose(fit.loglik, ll, atol=1e-8)

    def test_aic_bic_identities(self, a1_series):
        fit = fit_cml(a1_series)
        assert_allclose(fit.aic, 2 * fit.k - 2 * fit.loglik)
        assert_allclose(fit.bic, fit.k * math.log(fit.n_eff) - 2 * fit.loglik)
        assert fit.n_eff == len(a1_series)  # n - max(p,q) + 1 at order (1,1)

    def test_feasibility_at_return(self, a1_series):
        fit = fit_cml(a1_series)
        th = fit.coefficients
        assert th[0] > 0 and th[1] >= 0 and th[2] >= 0
        assert th[1] + th[2] < 1

    def test_reparameterization_invariance(self, a1_series):
        t = fit_cml(a1_series, options=FitOptions(method="transformed"))
        p = fit_cml(a1_series, options=FitOptions(method="penalized"))
        assert abs(t.loglik - p.loglik) < 1e-4

    def test_ascent_trace(self, a1_series):
        fit = fit_cml(a1_series, options=FitOptions(track_path=True))
        trace = np.array(fit.loglik_trace)
        assert len(trace) > 1
        assert np.all(np.diff(trace) >= -1e-12)

    def test_multi_start_deterministic(self, a1_series):
        f1 = fit_cml(a1_series, options=FitOptions(multi_start=True, seed=3))
        f2 = fit_cml(a1_series, options=FitOptions(multi_start=True, seed=3))
        assert np.array_equal(f1.coefficients, f2.coefficients)

    def test_too_short_series_rejected(self):
        with pytest.raises(ValueError):
            fit_cml(np.ones(20, dtype=np.int64), link="nonlinear")

    def test_all_zero_series_rejected(self):
        with pytest.raises(FitError):
            fit_cml(np.zeros(100, dtype=np.int64))

    def test_std_errors_present(self, a1_series):
        fit = fit_cml(a1_series)
        assert fit.std_errors.shape == (3,)
        assert np.all(np.isnan(fit.std_errors) | (fit.std_errors > 0))

    def test_nonlinear_fit_runs(self, b2_series):
        fit = fit_cml(b2_series, link="nonlinear")
        assert fit.k == 4
        assert np.isfinite(fit.loglik)
