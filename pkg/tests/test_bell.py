import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bellgarch import bell_dist
from bellgarch.bell_dist import (
    BellNumberTable,
    BellParams,
    dispersion_index,
    log_bell_number,
    log_pmf,
    mean,
    pgf,
    sample,
    sample_zt_poisson,
    variance,
)

THETA_GRID = [0.05, 0.1, 0.5, 1.0, 1.5, 2.0]


def truncation_index(theta):
    """Index beyond which the pmf tail is below 1e-12."""
    z = 10
    while math.exp(log_pmf(z, BellParams(theta))) > 1e-14:
        z += 5
    return z + 10


class TestBellNumbers:
    def test_first_values(self):
        # B_0..B_10 from the Bell-triangle recurrence
        exact = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]
        for n, b in enumerate(exact):
            assert_allclose(log_bell_number(n), math.log(b), rtol=1e-12)

    def test_triangle_vs_exact_small(self):
        bells = bell_dist._bell_triangle(25)
        for n in range(26):
            assert_allclose(log_bell_number(n), math.log(bells[n]), rtol=1e-12)

    def test_series_matches_triangle_on_overlap(self):
        # log-sum-exp series against exact integers on n in [20, 64]
        bells = bell_dist._bell_triangle(64)
        for n in range(20, 65):
            ref = math.log(bells[n])
            assert_allclose(bell_dist._log_bell_series(n), ref, rtol=1e-10)

    def test_monotone_increasing(self):
        vals = [log_bell_number(n) for n in range(2, 120)]
        assert np.all(np.diff(vals) > 0)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            log_bell_number(-1)

    def test_table_extension(self):
        table = BellNumberTable(10)
        assert table.max_index == 10
        assert table.log_values[0] == 0.0
        vals = table.extend_to(80)
        assert table.max_index == 80
        assert_allclose(vals[80], log_bell_number(80), rtol=1e-12)
        # extending backwards is a no-op
        table.extend_to(5)
        assert table.max_index == 80


class TestPmf:
    def test_z0_closed_form(self):
        for theta in THETA_GRID:
            assert_allclose(log_pmf(0, BellParams(theta)), 1.0 - math.exp(theta))

    def test_z1_theta1(self):
        assert_allclose(log_pmf(1, BellParams(1.0)), 1.0 - math.e, rtol=1e-12)

    @pytest.mark.parametrize("theta", THETA_GRID)
    def test_normalization(self, theta):
        z = np.arange(truncation_index(theta) + 1)
        total = np.exp(log_pmf(z, BellParams(theta))).sum()
        assert abs(total - 1.0) < 1e-10

    @pytest.mark.parametrize("theta", THETA_GRID)
    def test_truncated_moments(self, theta):
        p = BellParams(theta)
        z = np.arange(truncation_index(theta) + 1)
        w = np.exp(log_pmf(z, p))
        m1 = np.dot(z, w)
        m2 = np.dot(z**2, w)
        assert_allclose(m1, mean(p), rtol=1e-8)
        assert_allclose(m2 - m1**2, variance(p), rtol=1e-8)

    def test_rejects_negative_z(self):
        with pytest.raises(ValueError):
            log_pmf(-1, BellParams(1.0))

    def test_invalid_theta(self):
        for bad in (0.0, -1.0, math.nan, 31.0):
            with pytest.raises(ValueError):
                BellParams(bad)


class TestPgfMoments:
    def test_pgf_at_one(self):
        assert pgf(1.0, BellParams(0.7)) == pytest.approx(1.0, abs=1e-14)

    def test_pgf_at_zero_is_p0(self):
        p = BellParams(1.0)
        assert_allclose(pgf(0.0, p), math.exp(log_pmf(0, p)), rtol=1e-12)

    def test_pgf_midpoint_value(self):
        # direct evaluation, cross-checked against the truncated series
        p = BellParams(1.0)
        assert_allclose(pgf(0.5, p), 0.34315928297426229, rtol=1e-12)
        z = np.arange(60)
        series = np.dot(0.5**z, np.exp(log_pmf(z, p)))
        assert_allclose(pgf(0.5, p), series, rtol=1e-12)

    def test_pgf_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError):
            pgf(1.01, BellParams(1.0))

    def test_pgf_derivative_is_mean(self):
        h = 1e-5
        for theta in (0.5, 1.0, 2.0):
            p = BellParams(theta)
            approx = (pgf(1.0, p) - pgf(1.0 - h, p)) / h
            # one-sided at the boundary; O(h) accuracy scaled by curvature
            assert_allclose(approx, mean(p), rtol=5e-4)

    def test_moment_formulas(self):
        p = BellParams(1.0)
        assert_allclose(mean(p), math.e, rtol=1e-12)
        assert_allclose(variance(p), 2.0 * math.e, rtol=1e-12)
        assert_allclose(mean(BellParams(0.5)), 0.5 * math.exp(0.5), rtol=1e-12)

    def test_dispersion_always_above_one(self):
        for theta in THETA_GRID:
            p = BellParams(theta)
            assert dispersion_index(p) == 1.0 + theta
            assert variance(p) / mean(p) == pytest.approx(1.0 + theta, rel=1e-12)


class TestZtpSampler:
    def test_always_at_least_one(self):
        rng = np.random.default_rng(0)
        draws = sample_zt_poisson(0.3, rng, size=10000)
        assert draws.min() >= 1

    def test_p1_theta1(self):
        rng = np.random.default_rng(1)
        draws = sample_zt_poisson(1.0, rng, size=10**6)
        p1 = np.mean(draws == 1)
        ref = 1.0 / (math.e - 1.0)
        se = math.sqrt(ref * (1 - ref) / len(draws))
        assert abs(p1 - ref) < 3 * se

    def test_mean_small_theta(self):
        rng = np.random.default_rng(2)
        draws = sample_zt_poisson(0.1, rng, size=10**6)
        ref = 0.1 / (1.0 - math.exp(-0.1))
        se = draws.std(ddof=1) / math.sqrt(len(draws))
        assert abs(draws.mean() - ref) < 3 * se

    def test_scalar_path(self):
        rng = np.random.default_rng(3)
        assert sample_zt_poisson(0.5, rng) >= 1

    def test_rejects_nonpositive_theta(self):
        with pytest.raises(ValueError):
            sample_zt_poisson(0.0, np.random.default_rng(0))


class TestBellSampler:
    def test_deterministic_under_seed(self):
        p = BellParams(1.0)
        a = sample(p, np.random.default_rng(42), size=1000)
        b = sample(p, np.random.default_rng(42), size=1000)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_sample_moments(self, theta):
        p = BellParams(theta)
        draws = sample(p, np.random.default_rng(7), size=10**6)
        se_mean = draws.std(ddof=1) / math.sqrt(len(draws))
        assert abs(draws.mean() - mean(p)) < 3 * se_mean
        # se of the sample variance via the fourth central moment
        dev = draws - draws.mean()
        m4 = np.mean(dev**4)
        v = draws.var(ddof=1)
        se_var = math.sqrt((m4 - v**2) / len(draws))
        assert abs(v - variance(p)) < 3 * se_var

    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_chi_square_against_pmf(self, theta):
        from scipy import stats

        p = BellParams(theta)
        draws = sample(p, np.random.default_rng(99), size=10**5)
        kmax = int(draws.max())
        expected = np.exp(log_pmf(np.arange(kmax + 1), p)) * len(draws)
        observed = np.bincount(draws, minlength=kmax + 1)
        # merge the tail so every cell has expected count >= 5
        cut = kmax - np.searchsorted(np.cumsum(expected[::-1]), 5.0)
        obs = np.append(observed[:cut], observed[cut:].sum())
        exp = np.append(expected[:cut], expected[cut:].sum())
        exp *= obs.sum() / exp.sum()
        chi2 = ((obs - exp) ** 2 / exp).sum()
        pval = stats.chi2.sf(chi2, len(obs) - 1)
        assert pval > 0.001

    def test_scalar_draw(self):
        assert sample(BellParams(0.5), np.random.default_rng(0)) >= 0
