"""Hazard-potential reliability models.

Lifetimes are hitting times of a cumulative hazard (or degradation) process
to a unit-exponential hazard potential. The package provides closed-form
competing-risk survival functions, inverse Gaussian first-passage laws for a
Wiener marker, Monte Carlo estimators with reproducible substreams, and a
grid-posterior residual-life predictor.
"""

__version__ = "0.1.0"

from .distcore import (  # noqa: E402
    IgParams,
    Quadrature,
    WienerParams,
    ig_cdf,
    ig_params_from_threshold,
    ig_pdf,
    integrate,
    mixture_lifetime_cdf,
    reflection_hitting_cdf,
    std_normal_cdf,
)
from .estimators import WienerMaxLifetime  # noqa: E402
from .exceptions import DataError, DomainError, HazardPotentialError, NumericError  # noqa: E402
from .inference import (  # noqa: E402
    MarkerSeries,
    PosteriorGrid,
    PriorConfig,
    ThresholdPosterior,
    mle,
    posterior_grid,
    predictive_survival,
    residual_life_survival,
    threshold_posterior,
)
from .pathsim import McEstimate, PathConfig, SamplePath  # noqa: E402
from .riskmodels import (  # noqa: E402
    PowerLawHazard,
    TabulatedHazard,
    additive_survival,
    gumbel_survival,
    max_rule_survival,
    survival_bounds,
    trauma_gamma_closed,
)
