"""Bell distribution primitives.

The Bell distribution with parameter theta > 0 has pmf

    P(Z = z) = theta**z * exp(1 - exp(theta)) * B_z / z!,   z = 0, 1, 2, ...

where B_z is the z-th Bell number.  Its mean is theta * exp(theta), its
variance theta * (1 + theta) * exp(theta), so the dispersion index is
1 + theta > 1: the distribution is always overdispersed.

Bell numbers are computed exactly (integer Bell-triangle recurrence) up
to ``EXACT_MAX`` and in the log domain via the truncated series
B_n = (1/e) * sum_k k**n / k! above that, with the two methods
cross-validated on the overlap.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

THETA_CAP = 30.0

# largest index computed by exact integer arithmetic
EXACT_MAX = 64

# zero-truncated sampler safety bound; the tail beyond this is far below
# float resolution for any theta <= THETA_CAP
_ZTP_MAX_ITER = 4000


@dataclass(frozen=True)
class BellParams:
    """Single parameter of the Bell distribution, theta > 0."""

    theta: float

    def __post_init__(self):
        if not np.isfinite(self.theta) or self.theta <= 0.0:
            raise ValueError(f"theta must be a positive real, got {self.theta}")
        if self.theta > THETA_CAP:
            raise ValueError(
                f"theta={self.theta} exceeds the numeric cap {THETA_CAP}; "
                "the conditional-mean scale theta*exp(theta) is unusable beyond it"
            )


def _bell_triangle(nmax):
    """Exact Bell numbers B_0..B_nmax via the Bell triangle (Python ints)."""
    bells = [1]
    row = [1]
    for _ in range(nmax):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        bells.append(new[0])
        row = new
    return bells


_EXACT_LOGS = None


def _exact_log_table():
    global _EXACT_LOGS
    if _EXACT_LOGS is None:
        _EXACT_LOGS = np.array([math.log(b) for b in _bell_triangle(EXACT_MAX)])
    return _EXACT_LOGS


def _log_bell_series(n):
    """log B_n by log-sum-exp over the truncated series (1/e) sum k**n / k!.

    Terms are accumulated from k = 1 past the peak (near n / W(n)) until
    they drop below 1e-18 of the running maximum.
    """
    if n == 0:
        return 0.0
    log_terms = []
    max_term = -np.inf
    k = 1
    while True:
        lt = n * math.log(k) - math.lgamma(k + 1)
        log_terms.append(lt)
        if lt > max_term:
            max_term = lt
        # past the peak once k * log(k/...) decreases; terms are unimodal in k
        if lt < max_term - 41.5 and k > 2:  # log(1e-18) ~ -41.4
            break
        k += 1
    lt_arr = np.array(log_terms)
    return max_term + math.log(np.sum(np.exp(lt_arr - max_term))) - 1.0


def log_bell_number(n):
    """log of the n-th Bell number.

    Exact integer recurrence for n <= EXACT_MAX, truncated-series
    log-sum-exp beyond.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be a non-negative integer")
    if n <= EXACT_MAX:
        return float(_exact_log_table()[n])
    return _log_bell_series(n)


class BellNumberTable:
    """Append-only memo of log Bell numbers log B_0..log B_max_index."""

    def __init__(self, max_index=EXACT_MAX):
        self._values = np.array([log_bell_number(n) for n in range(max_index + 1)])

    @property
    def max_index(self):
        return len(self._values) - 1

    @property
    def log_values(self):
        return self._values

    def extend_to(self, max_index):
        """Grow the table so that log B_0..log B_max_index are available."""
        cur = self.max_index
        if max_index > cur:
            extra = np.array(
                [log_bell_number(n) for n in range(cur + 1, max_index + 1)]
            )
            self._values = np.concatenate([self._values, extra])
        return self._values[: max_index + 1]


_TABLE = BellNumberTable()


def log_bell_table(max_index):
    """Shared log-Bell-number array of length max_index + 1."""
    return _TABLE.extend_to(max_index)


def log_pmf(z, params):
    """Log pmf z*log(theta) + (1 - exp(theta)) + log B_z - log z!.

    ``z`` may be a non-negative integer or an integer array.
    """
    theta = params.theta
    z_arr = np.asarray(z)
    if np.any(z_arr < 0) or not np.issubdtype(z_arr.dtype, np.integer):
        raise ValueError("z must consist of non-negative integers")
    logbell = log_bell_table(int(z_arr.max()) if z_arr.size else 0)
    out = (
        z_arr * math.log(theta)
        + (1.0 - math.exp(theta))
        + logbell[z_arr]
        - gammaln(z_arr + 1.0)
    )
    if np.isscalar(z) or z_arr.ndim == 0:
        return float(out)
    return out


def pmf(z, params):
    return np.exp(log_pmf(z, params))


def pgf(s, params):
    """Probability generating function exp(exp(s*theta) - exp(theta)), |s| <= 1."""
    if abs(s) > 1.0:
        raise ValueError(f"pgf requires |s| <= 1, got s={s}")
    theta = params.theta
    return math.exp(math.exp(s * theta) - math.exp(theta))


def mean(params):
    return params.theta * math.exp(params.theta)


def variance(params):
    return params.theta * (1.0 + params.theta) * math.exp(params.theta)


def dispersion_index(params):
    """Var/Mean = 1 + theta, algebraically exact."""
    return 1.0 + params.theta


def _sample_zt_poisson_scalar(theta, rng):
    u = rng.random()
    p = theta / math.expm1(theta)
    cum = p
    k = 1
    while u > cum and k < _ZTP_MAX_ITER:
        k += 1
        p *= theta / k
        cum += p
    return k


def sample_zt_poisson(theta, rng, size=None):
    """Zero-truncated Poisson draws, P(k) = theta**k / (k! * (e**theta - 1)).

    Inversion by sequential search from k = 1; vectorized when ``size``
    is given.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if size is None:
        return _sample_zt_poisson_scalar(theta, rng)
    u = rng.random(size)
    k = np.ones(size, dtype=np.int64)
    p = np.full(size, theta / math.expm1(theta))
    cum = p.copy()
    active = u > cum
    j = 1
    while active.any() and j < _ZTP_MAX_ITER:
        j += 1
        p *= theta / j
        cum += p
        k[active] = j
        active &= u > cum
    return k


def _sample_scalar(theta, rng):
    n_parts = rng.poisson(math.expm1(theta))
    if n_parts > 1000:
        # the part count grows like e**theta; switch to the vectorized
        # inner sampler once the scalar loop would dominate
        return int(sample_zt_poisson(theta, rng, size=n_parts).sum())
    total = 0
    for _ in range(n_parts):
        total += _sample_zt_poisson_scalar(theta, rng)
    return total


def sample(params, rng, size=None):
    """Bell draws via the compound representation.

    Draw N ~ Poisson(exp(theta) - 1) and return the sum of N independent
    zero-truncated Poisson(theta) variates (0 when N = 0).
    """
    theta = params.theta
    if size is None:
        return _sample_scalar(theta, rng)
    counts = rng.poisson(math.expm1(theta), size)
    total_parts = int(counts.sum())
    parts = sample_zt_poisson(theta, rng, size=total_parts)
    out = np.zeros(size, dtype=np.int64)
    ends = np.cumsum(counts)
    starts = ends - counts
    nonzero = counts > 0
    sums = np.add.reduceat(parts, starts[nonzero]) if total_parts else None
    if total_parts:
        out[nonzero] = sums
    return out
