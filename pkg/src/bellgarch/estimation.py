"""Conditional maximum-likelihood estimation for (non)linear INGARCH models.

The conditional log-likelihood, given initial values, is

    l(theta) = sum_{t=p*}^{n} { x_t log(lam_t) + (1 - exp(lam_t))
                                + log B_{x_t} - log x_t! }

for the Bell family (p* = max(p, q)), and the usual Poisson form for the
Poisson baseline.  Derivatives use

    dl_t/dlam_t  = x_t / lam_t - exp(lam_t)
    d2l_t/dlam^2 = -x_t / lam_t**2 - exp(lam_t)

i.e. the derivatives of the log-likelihood as written above; the
finite-difference oracle in the test-suite arbitrates their correctness.

Maximization runs quasi-Newton (BFGS) on an unconstrained
reparameterization -- log for alpha0 and gamma, a softmax-interior map
for (alpha1, beta1) enforcing alpha1 + beta1 < 1 -- with a Nelder-Mead
polish when the quasi-Newton path stalls.  A penalized bounded L-BFGS-B
route in the original parameter space is available for cross-checking.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from . import recursions
from .bell_dist import log_bell_table
from .ingarch import (
    LINEAR,
    NONLINEAR,
    CountSeries,
    IngarchSpec,
    IntensityPath,
    stationary_lambda0,
)

FAMILY_CODES = {"bell": recursions.FAMILY_BELL, "poisson": recursions.FAMILY_POISSON}

GRAD_TOL = 1e-6
_BIG = 1e12


class LikelihoodError(ValueError):
    """Likelihood evaluation failed; ``t`` is the offending time index."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class FitError(RuntimeError):
    pass


@dataclass
class FitOptions:
    method: str = "transformed"  # or "penalized"
    multi_start: bool = False
    n_starts: int = 8
    seed: int = 0
    max_iter: int = 500
    track_path: bool = False
    lambda0_override: float | None = None


@dataclass
class FitResult:
    spec_hat: IngarchSpec
    family: str
    loglik: float
    lambda_path: IntensityPath
    std_errors: np.ndarray
    iterations: int
    converged: bool
    aic: float
    bic: float
    k: int
    n_eff: int
    warnings: list = field(default_factory=list)
    loglik_trace: list | None = None

    @property
    def coefficients(self):
        return self.spec_hat.theta

    @property
    def param_names(self):
        return self.spec_hat.param_names


def _tables(x, family):
    maxx = int(x.max())
    logfact = gammaln(np.arange(maxx + 1) + 1.0)
    if family == "bell":
        logbell = np.asarray(log_bell_table(maxx), dtype=float)
    else:
        logbell = np.zeros(maxx + 1)
    return logbell, logfact


def _lambda0_and_derivs(spec, k, lambda0_override):
    """Initial intensity plus its first/second derivatives w.r.t. theta.

    With the default fixed-point initialization the likelihood depends on
    theta through lam0 as well; differentiating through it keeps the
    analytic score consistent with finite differences of the likelihood.
    A user-supplied override is treated as a constant.
    """
    if lambda0_override is not None:
        if lambda0_override <= 0.0:
            raise ValueError("lambda0_override must be > 0")
        return float(lambda0_override), np.zeros(k), np.zeros((k, k))
    lam0 = stationary_lambda0(spec)
    r = 1.0 - spec.persistence
    d = np.zeros(k)
    d2 = np.zeros((k, k))
    d[0] = 1.0 / r
    for i in range(1, 1 + spec.p + spec.q):
        d[i] = spec.alpha0 / r**2
        d2[0, i] = d2[i, 0] = 1.0 / r**2
        for j in range(1, 1 + spec.p + spec.q):
            d2[i, j] = 2.0 * spec.alpha0 / r**3
    return lam0, d, d2


def log_likelihood(spec, series, lambda0_override=None, family="bell"):
    """Conditional log-likelihood and the intensity path it used."""
    spec.require_stationary()
    x = series.values
    logbell, logfact = _tables(x, family)
    fam = FAMILY_CODES[family]
    if spec.link == NONLINEAR:
        lam0, _, _ = _lambda0_and_derivs(spec, 4, lambda0_override)
        lam = recursions.lambda_path_nonlinear(
            x, spec.alpha0, spec.alphas[0], spec.betas[0], spec.gamma, lam0
        )
        start = 0
    else:
        lam0, _, _ = _lambda0_and_derivs(
            spec, 1 + spec.p + spec.q, lambda0_override
        )
        lam = recursions.lambda_path_linear(
            x, spec.alpha0, np.asarray(spec.alphas), np.asarray(spec.betas), lam0
        )
        start = max(spec.p, spec.q) - 1
    ll, bad = recursions.loglik_from_path(x, lam, start, fam, logbell, logfact)
    if bad >= 0:
        raise LikelihoodError(
            f"intensity left (0, {recursions.LAMBDA_CAP}] at t={bad}", t=bad
        )
    return float(ll), IntensityPath(lam, family=family)


def _derivative_parts(spec, series, lambda0_override, family):
    """(loglik, score, observed information) via the one-pass kernels."""
    if (spec.p, spec.q) != (1, 1):
        raise ValueError("analytic score/Hessian are implemented at order (1,1)")
    spec.require_stationary()
    x = series.values
    logbell, logfact = _tables(x, family)
    k = 4 if spec.link == NONLINEAR else 3
    lam0, dlam0, d2lam0 = _lambda0_and_derivs(spec, k, lambda0_override)
    if spec.link == NONLINEAR:
        if family != "bell":
            raise ValueError("nonlinear link is implemented for the Bell family")
        ll, score, nhess, lam, bad = recursions.cml_parts_nonlinear11(
            x, spec.alpha0, spec.alphas[0], spec.betas[0], spec.gamma,
            lam0, dlam0, d2lam0, logbell, logfact,
        )
    else:
        ll, score, nhess, lam, bad = recursions.cml_parts_linear11(
            x, spec.alpha0, spec.alphas[0], spec.betas[0],
            lam0, dlam0, d2lam0, FAMILY_CODES[family], logbell, logfact,
        )
    if bad >= 0:
        raise LikelihoodError(
            f"intensity left (0, {recursions.LAMBDA_CAP}] at t={bad}", t=bad
        )
    return float(ll), score, nhess, lam


def score(spec, series, lambda0_override=None, family="bell"):
    """Gradient of the conditional log-likelihood over the free coefficients."""
    _, s, _, _ = _derivative_parts(spec, series, lambda0_override, family)
    return s


def hessian(spec, series, lambda0_override=None, family="bell"):
    """Observed information H_n = -sum_t d2 l_t, symmetric by construction."""
    _, _, nh, _ = _derivative_parts(spec, series, lambda0_override, family)
    return nh


def central_difference(f, x, h):
    """Component-wise central differences (f(x+h e_i) - f(x-h e_i)) / 2h."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def finite_diff_gradient(spec, series, h=1e-6, lambda0_override=None, family="bell"):
    """Central-difference gradient of ``log_likelihood``; verification oracle."""
    if h <= 0.0:
        raise ValueError("h must be > 0")
    theta = spec.theta
    if np.any(theta[1:] < h) or spec.persistence > 1.0 - h:
        raise ValueError(
            "spec must sit in the interior of the feasible region by a margin > h"
        )

    def f(vec):
        s = IngarchSpec.from_theta(vec, spec.link, spec.p, spec.q)
        return log_likelihood(s, series, lambda0_override, family)[0]

    return central_difference(f, theta, h)


# ---------------------------------------------------------------------------
# parameterizations


def _to_unconstrained(theta, has_gamma):
    a0, a1, b1 = theta[:3]
    a1 = max(a1, 1e-8)
    b1 = max(b1, 1e-8)
    r = max(1.0 - a1 - b1, 1e-8)
    out = [math.log(a0), math.log(a1 / r), math.log(b1 / r)]
    if has_gamma:
        out.append(math.log(theta[3]))
    return np.array(out)


def _from_unconstrained(t):
    # clip before exponentiating: the map saturates long before 50 and
    # wild line-search trial points must not overflow
    t = np.clip(t, -50.0, 50.0)
    eu = math.exp(t[1])
    ev = math.exp(t[2])
    d = 1.0 + eu + ev
    theta = [math.exp(t[0]), eu / d, ev / d]
    if len(t) == 4:
        theta.append(math.exp(t[3]))
    return np.array(theta)


def _jacobian(theta):
    """d(theta) / d(unconstrained), for the chain rule on the score."""
    k = len(theta)
    a0, a1, b1 = theta[:3]
    J = np.zeros((k, k))
    J[0, 0] = a0
    J[1, 1] = a1 * (1.0 - a1)
    J[1, 2] = -a1 * b1
    J[2, 1] = -a1 * b1
    J[2, 2] = b1 * (1.0 - b1)
    if k == 4:
        J[3, 3] = theta[3]
    return J


def default_init(series, link, family="bell"):
    """Deterministic starting spec derived from the sample mean."""
    m = float(series.values.mean())
    a1, b1 = 0.05, 0.1
    if family == "bell":
        scale = 0.5 * math.log1p(m) + 0.05
    else:
        scale = max(m, 0.1)
    alpha0 = max(scale * (1.0 - a1 - b1), 1e-3)
    if link == NONLINEAR:
        return IngarchSpec.nonlinear11(alpha0, a1, b1, 1.0)
    return IngarchSpec.linear11(alpha0, a1, b1)


def _multi_start_specs(series, link, family, options):
    rng = np.random.default_rng(options.seed)
    specs = [default_init(series, link, family)]
    m = max(float(series.values.mean()), 0.2)
    hi = 2.0 if family == "bell" else 2.0 * m
    for _ in range(options.n_starts):
        a0 = rng.uniform(0.05, hi)
        a1 = rng.uniform(0.0, 0.3)
        b1 = rng.uniform(0.0, 0.6)
        tot = a1 + b1
        if tot > 0.9:
            a1, b1 = 0.9 * a1 / tot, 0.9 * b1 / tot
        if link == NONLINEAR:
            specs.append(IngarchSpec.nonlinear11(a0, a1, b1, rng.uniform(0.2, 2.0)))
        else:
            specs.append(IngarchSpec.linear11(a0, a1, b1))
    return specs


def _neg_loglik_and_grad(t, x_series, link, family, lambda0_override):
    theta = _from_unconstrained(t)
    try:
        spec = IngarchSpec.from_theta(theta, link)
        ll, s, _, _ = _derivative_parts(spec, x_series, lambda0_override, family)
    except (ValueError, LikelihoodError, OverflowError):
        return _BIG, np.zeros_like(t)
    if not np.isfinite(ll):
        return _BIG, np.zeros_like(t)
    g = _jacobian(theta).T @ s
    return -ll, -g


def _fit_transformed(series, link, family, init_spec, options):
    t0 = _to_unconstrained(init_spec.theta, link == NONLINEAR)
    args = (series, link, family, options.lambda0_override)
    trace = [] if options.track_path else None

    callback = None
    if trace is not None:
        def callback(tk):
            trace.append(-_neg_loglik_and_grad(tk, *args)[0])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize.minimize(
            _neg_loglik_and_grad, t0, args=args, jac=True, method="BFGS",
            options={"maxiter": options.max_iter, "gtol": GRAD_TOL},
            callback=callback,
        )
        t_best, f_best = res.x, res.fun
        n_iter = res.nit
        gnorm = float(np.linalg.norm(res.jac))
        converged = bool(res.success) or gnorm < GRAD_TOL
        if not converged:
            polish = optimize.minimize(
                lambda t: _neg_loglik_and_grad(t, *args)[0], t_best,
                method="Nelder-Mead",
                options={"maxiter": 4000, "fatol": 1e-10, "xatol": 1e-8},
            )
            if polish.fun < f_best:
                t_best, f_best = polish.x, polish.fun
                n_iter += polish.nit
            gnorm = float(
                np.linalg.norm(_neg_loglik_and_grad(t_best, *args)[1])
            )
            converged = polish.success or gnorm < 1e-4
    return _from_unconstrained(t_best), -f_best, n_iter, converged, trace


def _fit_penalized(series, link, family, init_spec, options):
    has_gamma = link == NONLINEAR
    k = 4 if has_gamma else 3
    args = (series, link, family, options.lambda0_override)
    lim = 1.0 - 1e-7

    def fg(theta):
        pen = max(0.0, theta[1] + theta[2] - lim)
        try:
            spec = IngarchSpec.from_theta(theta, link)
            ll, s, _, _ = _derivative_parts(spec, series, options.lambda0_override,
                                            family)
        except (ValueError, LikelihoodError, OverflowError):
            return _BIG, np.zeros(k)
        g = -s
        if pen > 0.0:
            g[1] += 2e10 * pen
            g[2] += 2e10 * pen
        return -ll + 1e10 * pen * pen, g

    bounds = [(1e-8, None), (0.0, lim), (0.0, lim)]
    if has_gamma:
        bounds.append((1e-8, None))
    theta0 = np.array(init_spec.theta)
    res = optimize.minimize(fg, theta0, jac=True, method="L-BFGS-B", bounds=bounds,
                            options={"maxiter": options.max_iter})
    trace = None
    return res.x, -res.fun, res.nit, bool(res.success), trace


def fit_cml(series, link=LINEAR, init=None, options=None, family="bell"):
    """Constrained CML fit of an order-(1,1) model.

    Maximizes the conditional log-likelihood subject to alpha0 > 0,
    alpha1 >= 0, beta1 >= 0, alpha1 + beta1 < 1 (and gamma > 0 for the
    nonlinear link).  Standard errors come from the inverse observed
    information at the optimum; singular information yields NaN entries
    rather than a failed fit.
    """
    if not isinstance(series, CountSeries):
        series = CountSeries(np.asarray(series))
    options = options or FitOptions()
    k = 4 if link == NONLINEAR else 3
    if series.n < 10 * k:
        raise ValueError(f"need at least {10 * k} observations to fit {k} parameters")
    if np.all(series.values == 0):
        raise FitError("all-zero series: the likelihood degenerates at the boundary")

    if init is not None:
        starts = [init]
    elif options.multi_start:
        starts = _multi_start_specs(series, link, family, options)
    else:
        starts = [default_init(series, link, family)]

    runner = _fit_penalized if options.method == "penalized" else _fit_transformed
    best = None
    notes = []
    for s0 in starts:
        theta, ll, nit, conv, trace = runner(series, link, family, s0, options)
        if not np.isfinite(ll):
            continue
        if best is None or ll > best[1]:
            best = (theta, ll, nit, conv, trace)
    if best is None:
        raise FitError("no start produced a finite likelihood")
    theta, ll, nit, converged, trace = best
    if not converged:
        notes.append("optimizer did not meet the convergence criteria; "
                     "reporting the best point found")

    # snap coefficients that drifted to the boundary of the open region
    theta = np.asarray(theta, dtype=float)
    theta[1] = min(max(theta[1], 0.0), 1.0 - 1e-9)
    theta[2] = min(max(theta[2], 0.0), 1.0 - 1e-9)
    if theta[1] + theta[2] >= 1.0:
        scale = (1.0 - 1e-9) / (theta[1] + theta[2])
        theta[1] *= scale
        theta[2] *= scale
    spec_hat = IngarchSpec.from_theta(theta, link)

    ll_final, s, nhess, lam = _derivative_parts(
        spec_hat, series, options.lambda0_override, family
    )
    std = np.full(k, np.nan)
    try:
        cov = np.linalg.inv(nhess)
        diag = np.diag(cov)
        ok = diag > 0.0
        std[ok] = np.sqrt(diag[ok])
        if not ok.all():
            notes.append("observed information not positive on the diagonal; "
                         "some standard errors are unavailable")
    except np.linalg.LinAlgError:
        notes.append("observed information is singular; standard errors "
                     "are unavailable")

    n_eff = series.n - max(spec_hat.p, spec_hat.q) + 1
    aic = 2.0 * k - 2.0 * ll_final
    bic = k * math.log(n_eff) - 2.0 * ll_final
    return FitResult(
        spec_hat=spec_hat,
        family=family,
        loglik=ll_final,
        lambda_path=IntensityPath(lam, family=family),
        std_errors=std,
        iterations=nit,
        converged=converged,
        aic=aic,
        bic=bic,
        k=k,
        n_eff=n_eff,
        warnings=notes,
        loglik_trace=trace,
    )
