"""Monte Carlo replication engine for the estimator study.

Eight preset data-generating scenarios (A1-A4 linear, B1-B4 nonlinear)
are replicated across sample sizes; each replication simulates a path,
fits by CML with an initializer drawn uniformly around the truth, and
the per-parameter Mean, MADE and MSE of the estimates are aggregated
over the converged fits:

    MADE = mean(|est - truth|),   MSE = mean((est - truth)**2).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .estimation import FitError, FitOptions, LikelihoodError, fit_cml
from .ingarch import IngarchSpec, SimulationError, simulate

DEFAULT_SAMPLE_SIZES = (200, 500, 1000)
DEFAULT_REPLICATIONS = 500
DEFAULT_BURN_IN = 500
DEFAULT_INIT_JITTER = 0.02


def scenario_presets():
    """The eight preset true-parameter scenarios."""
    return {
        "A1": IngarchSpec.linear11(0.6, 0.06, 0.10),
        "A2": IngarchSpec.linear11(0.7, 0.025, 0.08),
        "A3": IngarchSpec.linear11(0.8, 0.04, 0.09),
        "A4": IngarchSpec.linear11(0.9, 0.03, 0.12),
        "B1": IngarchSpec.nonlinear11(0.4, 0.04, 0.1, 0.5),
        "B2": IngarchSpec.nonlinear11(0.5, 0.05, 0.2, 0.8),
        "B3": IngarchSpec.nonlinear11(0.7, 0.06, 0.3, 1.0),
        "B4": IngarchSpec.nonlinear11(0.4, 0.07, 0.4, 2.0),
    }


@dataclass(frozen=True)
class McConfig:
    scenario: IngarchSpec
    scenario_name: str = "custom"
    sample_sizes: tuple = DEFAULT_SAMPLE_SIZES
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    init_jitter: float = DEFAULT_INIT_JITTER
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if any(n < 20 for n in self.sample_sizes):
            raise ValueError("all sample sizes must be >= 20")
        self.scenario.require_stationary()


@dataclass
class McCell:
    """Aggregates for one (scenario, n) pair."""

    scenario_name: str
    n: int
    param_names: list
    mean: np.ndarray
    made: np.ndarray
    mse: np.ndarray
    successes: int
    failures: int
    estimates: np.ndarray = field(repr=False, default=None)


@dataclass
class McReport:
    config: McConfig
    cells: list

    def cell(self, n):
        for c in self.cells:
            if c.n == n:
                return c
        raise KeyError(f"no cell for n={n}")

    def write_csv(self, path):
        """Table-shaped CSV: one row per (scenario, n, statistic)."""
        names = self.cells[0].param_names if self.cells else []
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scenario", "n", "statistic", *names, "successes",
                        "failures"])
            for c in self.cells:
                for stat, vals in (("mean", c.mean), ("made", c.made),
                                   ("mse", c.mse)):
                    w.writerow(
                        [c.scenario_name, c.n, stat,
                         *[f"{v:.10g}" for v in vals], c.successes, c.failures]
                    )


def _jittered_init(truth, jitter, rng):
    """Uniform draw in a box around the truth, clamped to feasibility."""
    theta = truth.theta + rng.uniform(-jitter, jitter, size=len(truth.theta))
    theta[0] = max(theta[0], 1e-3)
    theta[1] = max(theta[1], 0.0)
    theta[2] = max(theta[2], 0.0)
    if theta[1] + theta[2] > 0.98:
        scale = 0.98 / (theta[1] + theta[2])
        theta[1] *= scale
        theta[2] *= scale
    if len(theta) == 4:
        theta[3] = max(theta[3], 1e-3)
    return IngarchSpec.from_theta(theta, truth.link)


def aggregate(estimates, truth_theta):
    """Mean / MADE / MSE of a stack of estimate vectors against the truth."""
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 2 or est.shape[0] < 1:
        raise ValueError("need at least one estimate vector")
    dev = est - np.asarray(truth_theta)
    return est.mean(axis=0), np.abs(dev).mean(axis=0), (dev**2).mean(axis=0)


def run_replication(config, n, rep):
    """One simulate-and-fit replication; deterministic in (seed, n, rep)."""
    sim_rng = np.random.default_rng((config.seed, n, rep, 0))
    jit_rng = np.random.default_rng((config.seed, n, rep, 1))
    series, _ = simulate(config.scenario, n, burn_in=config.burn_in, rng=sim_rng)
    init = _jittered_init(config.scenario, config.init_jitter, jit_rng)
    fit = fit_cml(series, link=config.scenario.link, init=init)
    return fit


def run_study(config):
    """Full Monte Carlo study for one scenario across its sample sizes.

    Non-converged (or failed) replications are excluded from the
    aggregates and counted in ``failures``.
    """
    truth = config.scenario.theta
    cells = []
    for n in config.sample_sizes:
        estimates = []
        failures = 0
        for rep in range(config.replications):
            try:
                fit = run_replication(config, n, rep)
            except (FitError, LikelihoodError, SimulationError, ValueError):
                failures += 1
                continue
            if not fit.converged:
                failures += 1
                continue
            estimates.append(fit.coefficients)
        if not estimates:
            raise FitError(
                f"all {config.replications} replications failed for n={n}"
            )
        mean, made, mse = aggregate(estimates, truth)
        cells.append(
            McCell(
                scenario_name=config.scenario_name,
                n=n,
                param_names=config.scenario.param_names,
                mean=mean,
                made=made,
                mse=mse,
                successes=len(estimates),
                failures=failures,
                estimates=np.asarray(estimates),
            )
        )
    return McReport(config=config, cells=cells)
