"""Bell-INGARCH(p, q) model: specification, recursions, simulation and
the stationary-moment structure.

The model is

    X_t | F_{t-1} ~ Bell(lam_t)

with a linear intensity recursion

    lam_t = alpha0 + sum_i alpha_i X_{t-i} + sum_j beta_j lam_{t-j}

or, at order (1,1), the nonlinear perturbation

    lam_t = alpha0 / (1 + lam_{t-1})**gamma + alpha1 X_{t-1} + beta1 lam_{t-1}.

The conditional mean is lam_t * exp(lam_t), NOT lam_t itself.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import bell_dist, recursions

LINEAR = "linear"
NONLINEAR = "nonlinear"

# simulation refuses intensities above this: the compound sampler draws
# about e**lambda parts per step, and once lambda is this large the next
# step's conditional mean lambda*e**lambda forces a blow-up past the
# likelihood cap anyway
SIM_THETA_CAP = 16.0


class SimulationError(RuntimeError):
    """Simulation left the admissible intensity range."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class IngarchSpec:
    """Model order, coefficients and link of a (non)linear INGARCH spec."""

    alpha0: float
    alphas: tuple = ()
    betas: tuple = ()
    link: str = LINEAR
    gamma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.alpha0 <= 0.0 or not np.isfinite(self.alpha0):
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        if any(a < 0.0 for a in self.alphas):
            raise ValueError("all alpha_i must be >= 0")
        if any(b < 0.0 for b in self.betas):
            raise ValueError("all beta_j must be >= 0")
        if max(self.p, self.q) < 1:
            raise ValueError("need max(p, q) >= 1")
        if self.link == NONLINEAR:
            if self.gamma is None or self.gamma <= 0.0:
                raise ValueError("nonlinear link requires gamma > 0")
            if (self.p, self.q) != (1, 1):
                raise ValueError("nonlinear link is defined at order (1,1) only")
        elif self.link == LINEAR:
            if self.gamma is not None:
                raise ValueError("gamma is only meaningful for the nonlinear link")
        else:
            raise ValueError(f"unknown link {self.link!r}")

    @property
    def p(self):
        return len(self.alphas)

    @property
    def q(self):
        return len(self.betas)

    @property
    def persistence(self):
        return sum(self.alphas) + sum(self.betas)

    def is_stationary(self):
        return self.persistence < 1.0

    def require_stationary(self):
        if not self.is_stationary():
            raise ValueError(
                f"sum(alphas) + sum(betas) = {self.persistence} >= 1: "
                "spec violates the stationarity condition"
            )

    @property
    def param_names(self):
        names = ["alpha0"]
        names += [f"alpha{i + 1}" for i in range(self.p)]
        names += [f"beta{j + 1}" for j in range(self.q)]
        if self.link == NONLINEAR:
            names.append("gamma")
        return names

    @property
    def theta(self):
        """Free coefficients as an array, in param_names order."""
        vals = [self.alpha0, *self.alphas, *self.betas]
        if self.link == NONLINEAR:
            vals.append(self.gamma)
        return np.array(vals)

    @classmethod
    def linear11(cls, alpha0, alpha1, beta1):
        return cls(alpha0=alpha0, alphas=(alpha1,), betas=(beta1,), link=LINEAR)

    @classmethod
    def nonlinear11(cls, alpha0, alpha1, beta1, gamma):
        return cls(
            alpha0=alpha0, alphas=(alpha1,), betas=(beta1,), link=NONLINEAR, gamma=gamma
        )

    @classmethod
    def from_theta(cls, theta, link, p=1, q=1):
        theta = np.asarray(theta, dtype=float)
        if link == NONLINEAR:
            if (p, q) != (1, 1):
                raise ValueError("nonlinear link is order (1,1) only")
            return cls.nonlinear11(*theta)
        return cls(alpha0=theta[0], alphas=tuple(theta[1 : 1 + p]),
                   betas=tuple(theta[1 + p : 1 + p + q]), link=LINEAR)


@dataclass(frozen=True)
class CountSeries:
    """Ordered non-negative integer observations."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a count series must be a non-empty 1-d sequence")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.all(np.isfinite(arr)) or np.any(rounded != arr):
                raise ValueError("count series values must be integral")
            arr = rounded
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("count series values must be non-negative")
        object.__setattr__(self, "values", arr)

    @property
    def n(self):
        return len(self.values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class IntensityPath:
    """Intensity sequence lam_1..lam_n and the induced conditional means."""

    lambdas: np.ndarray
    family: str = "bell"

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if np.any(lam <= 0.0):
            raise ValueError("every intensity must be strictly positive")
        object.__setattr__(self, "lambdas", lam)

    @property
    def cond_means(self):
        if self.family == "bell":
            return self.lambdas * np.exp(self.lambdas)
        return self.lambdas.copy()

    @property
    def cond_variances(self):
        if self.family == "bell":
            return self.lambdas * (1.0 + self.lambdas) * np.exp(self.lambdas)
        return self.lambdas.copy()


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    autocovariances: np.ndarray = field(default_factory=lambda: np.zeros(1))


def stationary_lambda0(spec):
    """Fixed point alpha0 / (1 - sum(alphas) - sum(betas)) of the linear map."""
    spec.require_stationary()
    return spec.alpha0 / (1.0 - spec.persistence)


def intensity_step_linear(spec, recent_counts, recent_lambdas):
    """One linear step alpha0 + sum_i alpha_i X_{t-i} + sum_j beta_j lam_{t-j}.

    ``recent_counts[i-1]`` is X_{t-i}, ``recent_lambdas[j-1]`` is lam_{t-j}.
    """
    counts = np.asarray(recent_counts, dtype=float)
    lams = np.asarray(recent_lambdas, dtype=float)
    if counts.shape != (spec.p,) or lams.shape != (spec.q,):
        raise ValueError(
            f"expected {spec.p} recent counts and {spec.q} recent intensities, "
            f"got {counts.shape} and {lams.shape}"
        )
    if np.any(counts < 0.0) or np.any(lams < 0.0):
        raise ValueError("recent counts and intensities must be non-negative")
    return float(spec.alpha0 + np.dot(spec.alphas, counts) + np.dot(spec.betas, lams))


def intensity_step_nonlinear(spec, recent_count, recent_lambda):
    """One nonlinear step alpha0/(1+lam)**gamma + alpha1*X + beta1*lam."""
    if spec.link != NONLINEAR:
        raise ValueError("intensity_step_nonlinear requires a nonlinear-link spec")
    if recent_count < 0.0 or recent_lambda < 0.0:
        raise ValueError("recent count and intensity must be non-negative")
    return float(
        spec.alpha0 / (1.0 + recent_lambda) ** spec.gamma
        + spec.alphas[0] * recent_count
        + spec.betas[0] * recent_lambda
    )


def simulate(spec, n, burn_in=500, seed=None, rng=None):
    """Simulate a path of length ``n`` after discarding ``burn_in`` steps.

    The recursion starts at the linear fixed point
    alpha0 / (1 - sum(alphas) - sum(betas)); each X_t is a Bell(lam_t)
    draw via the compound sampler.  Deterministic under a fixed seed.
    """
    spec.require_stationary()
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if rng is None:
        rng = np.random.default_rng(seed)
    total = n + burn_in
    lam0 = stationary_lambda0(spec)
    p, q = spec.p, spec.q
    pstar = max(p, q)
    lam = np.empty(total)
    x = np.empty(total, dtype=np.int64)
    alphas = np.asarray(spec.alphas)
    betas = np.asarray(spec.betas)
    for t in range(total):
        if t < pstar:
            lt = lam0
        elif spec.link == NONLINEAR:
            lt = intensity_step_nonlinear(spec, x[t - 1], lam[t - 1])
        else:
            lt = (
                spec.alpha0
                + float(np.dot(alphas, x[t - p : t][::-1]))
                + float(np.dot(betas, lam[t - q : t][::-1]))
            )
        cap = min(bell_dist.THETA_CAP, SIM_THETA_CAP)
        if lt > cap:
            raise SimulationError(
                f"intensity {lt:.4g} exceeded the simulation cap {cap} at t={t}",
                t=t,
            )
        lam[t] = lt
        x[t] = bell_dist._sample_scalar(lt, rng)
    return (
        CountSeries(x[burn_in:]),
        IntensityPath(lam[burn_in:]),
    )


def theorem1_mean(spec):
    """Closed-form unconditional mean A * exp(A) with

        A = [(1 - sum(betas)) * ln(alpha0) + sum(alphas) * (alpha0 - ln(alpha0))]
            / sum(alphas)

    Implemented verbatim; see ``orthogonality_check`` for the part of the
    stationary structure that is verified by simulation.
    """
    spec.require_stationary()
    sa = sum(spec.alphas)
    sb = sum(spec.betas)
    if sa == 0.0:
        raise ZeroDivisionError(
            "the closed-form mean divides by sum(alphas); it is undefined when "
            "all alpha_i are zero"
        )
    lna0 = math.log(spec.alpha0)
    a = ((1.0 - sb) * lna0 + sa * (spec.alpha0 - lna0)) / sa
    return a * math.exp(a)


def empirical_moments(series, max_lag=0):
    """Sample mean, variance (denominator n) and autocovariances 0..max_lag."""
    x = series.values.astype(float)
    n = len(x)
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if max_lag >= n:
        raise ValueError(f"max_lag={max_lag} must be smaller than n={n}")
    xm = x - x.mean()
    acov = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        acov[k] = np.dot(xm[k:], xm[: n - k]) / n
    return MomentSummary(mean=float(x.mean()), variance=float(acov[0]),
                         autocovariances=acov)


def orthogonality_check(spec, n, lags, seed=None):
    """Sample cov(X_t - Z_t, Z_{t-k}) with Z_t = lam_t * exp(lam_t).

    The martingale-difference structure of the model makes each of these
    covariances zero for k >= 0; the returned list carries, per lag, the
    point estimate and its Monte Carlo standard error.
    """
    series, path = simulate(spec, n, seed=seed)
    x = series.values.astype(float)
    z = path.cond_means
    d = x - z
    zbar = z.mean()
    out = []
    for k in lags:
        if k < 0:
            raise ValueError("lags must be >= 0")
        w = d[k:] * (z[: len(z) - k] - zbar)
        m = len(w)
        out.append((int(k), float(w.mean()), float(w.std(ddof=1) / math.sqrt(m))))
    return out
