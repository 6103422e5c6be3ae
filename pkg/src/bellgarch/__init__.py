"""Bell-INGARCH modelling of overdispersed count time series.

Count observations follow X_t | F_{t-1} ~ Bell(lam_t) with a linear or
nonlinear intensity recursion; the package provides the distribution
toolkit, simulation, conditional maximum-likelihood estimation,
Poisson/negative-binomial baselines, residual diagnostics and a Monte
Carlo replication harness, plus a command-line interface.
"""

__version__ = "0.1.0"

from .bell_dist import BellParams, log_pmf, pgf, sample  # noqa: F401
from .diagnostics import build_report, pearson_residuals  # noqa: F401
from .estimation import (  # noqa: F401
    FitError,
    FitOptions,
    FitResult,
    LikelihoodError,
    fit_cml,
    log_likelihood,
)
from .baselines import fit_nb_ingarch, fit_poisson_ingarch  # noqa: F401
from .ingarch import (  # noqa: F401
    LINEAR,
    NONLINEAR,
    CountSeries,
    IngarchSpec,
    IntensityPath,
    SimulationError,
    simulate,
    theorem1_mean,
)
from .simstudy import McConfig, run_study, scenario_presets  # noqa: F401
