"""Censoring-adapted extreme quantile estimation.

``x_eps = Z_{n-k,n} + a * ((S_n(Z_{n-k,n}) / eps) ** g - 1) / g`` where
``S_n`` is the Kaplan-Meier survival function, ``g`` the adapted index and
``a`` the adapted scale. Only the moment, UH and ML index estimators are
supported; the Hill estimator is valid only for heavy tails.

The estimator presumes the lifetime and censoring distributions share their
right endpoint (possibly infinite). That cannot be checked from data and is
left to the user.
"""

import math
from dataclasses import dataclass

from ._validation import check_k, check_open_unit, check_p_hat
from .estimators import EstimatorKind, PPolicy, adapt_to_censoring, log_moments, ml_estimator, moment, uh
from .exceptions import TailDomainError, UnsupportedCaseError
from .sample import km_survival_at_threshold

_GROWTH_ZERO = 1e-8


@dataclass(frozen=True)
class QuantileEstimate:
    kind: EstimatorKind
    k: int
    eps: float
    value: float
    scale: float
    gamma_adapted: float
    threshold: float
    survival_at_threshold: float
    p: float


def scale_moment_uh(sorted_sample, k, p_hat):
    """``Z_{n-k,n} * M1 * (1 - S) / p_hat``."""
    p_hat = check_p_hat(p_hat)
    stats = log_moments(sorted_sample, k)
    threshold = sorted_sample.z[sorted_sample.n - stats.k - 1]
    return threshold * stats.m1 * (1.0 - stats.s) / p_hat


def scale_ml(fit, p_hat):
    return fit.sigma / check_p_hat(p_hat)


def pareto_growth(u, gamma):
    """``(u**gamma - 1) / gamma``, switching to ``log(u)`` for ``|gamma| < 1e-8``."""
    u = float(u)
    if not u > 0:
        raise TailDomainError(f"pareto_growth needs u > 0, got {u!r}")
    gamma = float(gamma)
    if abs(gamma) < _GROWTH_ZERO:
        return math.log(u)
    return math.expm1(gamma * math.log(u)) / gamma


def extreme_quantile(sorted_sample, k, eps, kind, p_policy=None, km=None):
    """Adapted estimate of ``F^{-1}(1 - eps)`` from the ``k`` largest observations.

    Parameters
    ----------
    sorted_sample : SortedCensoredSample
    k : int
        Number of top order statistics, ``1 <= k <= n - 2`` (``k >= 2`` for ML).
    eps : float
        Exceedance probability in (0, 1).
    kind : EstimatorKind or str
        ``"moment"``, ``"uh"`` or ``"ml"``.
    p_policy : PPolicy, float or None
        None uses ``p_hat(k)``; a number fixes ``p``.
    km : StepFunction, optional
        Precomputed Kaplan-Meier estimate of the same sample.
    """
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.HILL:
        raise UnsupportedCaseError(
            "the Hill estimator is excluded from quantile estimation (heavy tails only)"
        )
    eps = check_open_unit(eps, "eps")
    n = sorted_sample.n
    k = check_k(k, n, offset=2)
    p = PPolicy.parse(p_policy).p(sorted_sample, k)
    p = check_p_hat(p)
    if kind is EstimatorKind.ML:
        fit = ml_estimator(sorted_sample, k)
        gamma_c = adapt_to_censoring(fit.gamma, p)
        scale = scale_ml(fit, p)
    else:
        raw = moment(sorted_sample, k) if kind is EstimatorKind.MOMENT else uh(sorted_sample, k)
        gamma_c = adapt_to_censoring(raw, p)
        scale = scale_moment_uh(sorted_sample, k, p)
    if not scale > 0:
        raise TailDomainError(f"scale estimate {scale!r} at k={k} is not positive")
    survival = km_survival_at_threshold(sorted_sample, k, km=km)
    if not survival > 0:
        raise TailDomainError(f"Kaplan-Meier survival at Z_(n-k,n) is zero for k={k}")
    threshold = float(sorted_sample.z[n - k - 1])
    value = threshold + scale * pareto_growth(survival / eps, gamma_c)
    return QuantileEstimate(kind, k, eps, value, scale, gamma_c, threshold, survival, p)
