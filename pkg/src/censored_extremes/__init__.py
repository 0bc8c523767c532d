"""Extreme value index and extreme quantile estimation under random right censoring."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    CensoredExtremesError,
    DataValidationError,
    DegenerateTailError,
    TailDomainError,
    UnsupportedCaseError,
)
from .sample import (  # noqa: E402
    CensoredObservation,
    CensoredSample,
    KaplanMeierFunction,
    SortedCensoredSample,
    StepFunction,
    from_records,
    kaplan_meier,
    km_survival_at_threshold,
    read_csv,
    sort_sample,
    uncensored_proportion,
)
from .estimators import (  # noqa: E402
    EstimateCurve,
    EstimatorKind,
    PPolicy,
    TailStatistics,
    adapt_to_censoring,
    estimate_curve,
    hill,
    log_moments,
    ml_estimator,
    moment,
    uh,
)
from .gpd import GpdFit, gpd_fit_ml, gpd_loglik  # noqa: E402
from .quantile import QuantileEstimate, extreme_quantile, pareto_growth  # noqa: E402
from .asymptotics import TailCase, classify_case, confidence_interval, variance_censored  # noqa: E402
from .families import FamilyPair, sample_censored, truth_values  # noqa: E402
from .base import CensoredTailEstimator  # noqa: E402

