"""Post-fit diagnostics: Pearson residuals, ACF/PACF, cumulative
periodogram with a Kolmogorov-Smirnov band, information criteria and
one-step-ahead predictions."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class CumulativePeriodogram:
    frequencies: np.ndarray  # Fourier frequencies in cycles per step
    ordinates: np.ndarray  # normalized cumulative spectral mass, ends at 1
    reference: np.ndarray  # uniform reference line
    band_half_width: float  # 5% KS half-width around the reference
    inside_band: bool


@dataclass
class DiagnosticsReport:
    residuals: np.ndarray
    residual_mean: float
    residual_sd: float
    acf: np.ndarray
    pacf: np.ndarray
    cum_periodogram: CumulativePeriodogram
    predictions: np.ndarray


def pearson_residuals_from_path(x, cond_means, cond_variances):
    """(x_t - E[X_t | F_{t-1}]) / sqrt(Var(X_t | F_{t-1}))."""
    x = np.asarray(x, dtype=float)
    if np.any(cond_variances <= 0.0):
        raise ValueError("conditional variances must be strictly positive")
    return (x - cond_means) / np.sqrt(cond_variances)


def pearson_residuals(fit, series):
    """Pearson residuals of a fitted model, using its conditional moments."""
    if len(series) != len(fit.lambda_path.lambdas):
        raise ValueError("fit and series are not aligned")
    return pearson_residuals_from_path(
        series.values, fit.lambda_path.cond_means, fit.lambda_path.cond_variances
    )


def acf(x, max_lag):
    """Sample autocorrelations at lags 1..max_lag."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if max_lag >= n:
        raise ValueError("max_lag must be smaller than the series length")
    xm = x - x.mean()
    denom = float(np.dot(xm, xm))
    if denom == 0.0:
        raise ValueError("zero-variance input")
    out = np.empty(max_lag)
    for k in range(1, max_lag + 1):
        out[k - 1] = np.dot(xm[k:], xm[: n - k]) / denom
    return out


def pacf(x, max_lag):
    """Partial autocorrelations at lags 1..max_lag via Durbin-Levinson."""
    rho = acf(x, max_lag)
    out = np.empty(max_lag)
    phi_prev = np.zeros(0)
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_kk = rho[0]
            phi = np.array([phi_kk])
        else:
            num = rho[k - 1] - np.dot(phi_prev, rho[: k - 1][::-1])
            den = 1.0 - np.dot(phi_prev, rho[: k - 1])
            phi_kk = num / den
            phi = np.empty(k)
            phi[: k - 1] = phi_prev - phi_kk * phi_prev[::-1]
            phi[k - 1] = phi_kk
        out[k - 1] = phi_kk
        phi_prev = phi
    return out


def cumulative_periodogram(residuals, alpha_level=0.05):
    """Normalized cumulative periodogram with the 5% KS band.

    The periodogram is evaluated at the Fourier frequencies j/n,
    j = 1..floor((n-1)/2); the reference line uses the midpoint
    convention (j - 1/2)/m and the band half-width is
    1.358 / (sqrt(m) + 0.12 + 0.11/sqrt(m)) with m ordinates.
    """
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if n < 16:
        raise ValueError("need at least 16 residuals")
    if np.allclose(e, e[0]):
        raise ValueError("constant residual sequence")
    if alpha_level != 0.05:
        raise ValueError("only the 5% band constant is implemented")
    e = e - e.mean()
    spec = np.abs(np.fft.rfft(e)) ** 2 / n
    m = (n - 1) // 2
    pgram = spec[1 : m + 1]
    ordinates = np.cumsum(pgram) / np.sum(pgram)
    freqs = np.arange(1, m + 1) / n
    reference = (np.arange(1, m + 1) - 0.5) / m
    sq = math.sqrt(m)
    half = 1.358 / (sq + 0.12 + 0.11 / sq)
    inside = bool(np.all(np.abs(ordinates - reference) <= half))
    return CumulativePeriodogram(
        frequencies=freqs,
        ordinates=ordinates,
        reference=reference,
        band_half_width=half,
        inside_band=inside,
    )


def information_criteria(loglik, k, n_eff):
    """AIC = 2k - 2 ln(L), BIC = k ln(n) - 2 ln(L)."""
    if n_eff < 1 or k < 1:
        raise ValueError("need n_eff >= 1 and k >= 1")
    return 2.0 * k - 2.0 * loglik, k * math.log(n_eff) - 2.0 * loglik


def default_max_lag(n):
    return min(40, n // 4)


def build_report(fit, series, max_lag=None):
    """Full diagnostics bundle for a fitted model."""
    if max_lag is None:
        max_lag = default_max_lag(len(series))
    e = pearson_residuals(fit, series)
    return DiagnosticsReport(
        residuals=e,
        residual_mean=float(e.mean()),
        residual_sd=float(e.std(ddof=1)),
        acf=acf(e, max_lag),
        pacf=pacf(e, max_lag),
        cum_periodogram=cumulative_periodogram(e),
        predictions=fit.lambda_path.cond_means,
    )
