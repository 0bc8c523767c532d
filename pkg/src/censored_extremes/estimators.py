"""Extreme value index estimators on the Z-sample and their censoring adaptation.

All estimators use the ``k`` largest order statistics of the observed times
and the threshold ``Z_{n-k,n}``. The censoring-adapted version of any of them
is the raw estimate divided by the fraction of uncensored observations among
those ``k`` (see :func:`adapt_to_censoring`).
"""

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_k, check_p_hat
from .exceptions import CensoredExtremesError, DegenerateTailError, TailDomainError
from .gpd import GpdFit, gpd_fit_ml
from .sample import uncensored_proportion


class EstimatorKind(str, enum.Enum):
    HILL = "hill"
    MOMENT = "moment"
    UH = "uh"
    ML = "ml"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise CensoredExtremesError(
                f"unknown estimator {value!r}; expected one of {[k.value for k in cls]}"
            ) from None


class TailStatistics(NamedTuple):
    """Log-moment summaries of the top ``k`` log-excesses.

    ``s`` is None when all log-excesses are equal (``m2 == m1**2``).
    """

    k: int
    m1: float
    m2: float
    s: float | None


def _log_excesses(sorted_sample, k, name="k"):
    n = sorted_sample.n
    k = check_k(k, n, name=name)
    z = sorted_sample.z
    threshold = z[n - k - 1]
    if not threshold > 0:
        raise TailDomainError(
            f"threshold Z_(n-k,n)={threshold!r} at k={k} is not positive; log undefined"
        )
    return np.log(z[n - k:]) - np.log(threshold)


def log_moments(sorted_sample, k, require_s=True):
    """First and second log-moments and the S statistic at ``k``.

    With ``require_s=True`` a :class:`DegenerateTailError` is raised when all
    log-excesses coincide; otherwise ``s`` is returned as None.
    """
    ex = _log_excesses(sorted_sample, k)
    m1 = float(np.mean(ex))
    m2 = float(np.mean(ex * ex))
    if np.ptp(ex) == 0.0 or not m2 > m1 * m1:
        if require_s:
            raise DegenerateTailError(
                f"all {ex.size} top log-excesses are equal; moment statistic undefined"
            )
        return TailStatistics(int(ex.size), m1, m2, None)
    s = 1.0 - 0.5 / (1.0 - m1 * m1 / m2)
    return TailStatistics(int(ex.size), m1, m2, float(s))


def hill(sorted_sample, k):
    return log_moments(sorted_sample, k, require_s=False).m1


def moment(sorted_sample, k):
    stats = log_moments(sorted_sample, k)
    return stats.m1 + stats.s


def uh(sorted_sample, k):
    """Slope estimator of the generalized quantile plot.

    Uses ``UH_i = Z_{n-i,n} * hill(i)`` for ``i = 1..k+1``, so it needs
    ``k <= n - 2`` and every one of those values strictly positive.
    """
    n = sorted_sample.n
    k = check_k(k, n, offset=2)
    top = sorted_sample.z[::-1][: k + 2]
    if not top[k + 1] > 0:
        raise TailDomainError(
            f"Z_(n-k-1,n)={top[k + 1]!r} at k={k} is not positive; log undefined"
        )
    logs = np.log(top)
    i = np.arange(1, k + 2)
    hills = np.cumsum(logs[: k + 1]) / i - logs[1: k + 2]
    uh_values = top[1: k + 2] * hills
    if np.any(uh_values <= 0):
        bad = int(i[np.argmax(uh_values <= 0)])
        raise TailDomainError(f"UH_{bad} is not positive at k={k}; log undefined")
    log_uh = np.log(uh_values)
    return float(np.mean(log_uh[:k]) - log_uh[k])


def exceedances(sorted_sample, k):
    """``Z_{n-j+1,n} - Z_{n-k,n}`` for ``j = 1..k`` (largest first)."""
    n = sorted_sample.n
    k = check_k(k, n)
    z = sorted_sample.z
    return z[n - k:][::-1] - z[n - k - 1]


def ml_estimator(sorted_sample, k):
    """GPD maximum-likelihood fit to the ``k`` exceedances over ``Z_{n-k,n}``."""
    n = sorted_sample.n
    k = check_k(k, n, k_min=2)
    return gpd_fit_ml(exceedances(sorted_sample, k))


def raw_estimate(sorted_sample, k, kind):
    """Unadapted index estimate of the given kind at ``k``."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.HILL:
        return hill(sorted_sample, k)
    if kind is EstimatorKind.MOMENT:
        return moment(sorted_sample, k)
    if kind is EstimatorKind.UH:
        return uh(sorted_sample, k)
    return ml_estimator(sorted_sample, k).gamma


def adapt_to_censoring(raw_estimate, p_hat):
    """Divide a Z-sample estimate by the uncensored fraction ``p_hat``."""
    return float(raw_estimate) / check_p_hat(p_hat)


class PPolicy:
    """How ``p`` enters the adapted estimators: ``p_hat(k)`` per ``k``, or a constant.

    >>> PPolicy.parse(None).fixed is None
    True
    >>> PPolicy.parse(0.28).fixed
    0.28
    """

    __slots__ = ("fixed",)

    def __init__(self, fixed=None):
        self.fixed = None if fixed is None else check_p_hat(fixed)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if value is None or (isinstance(value, str) and value.strip().lower() in ("per_k", "per-k")):
            return cls(None)
        return cls(float(value))

    def p(self, sorted_sample, k):
        if self.fixed is not None:
            return self.fixed
        return uncensored_proportion(sorted_sample, k)

    def __eq__(self, other):
        return isinstance(other, PPolicy) and other.fixed == self.fixed

    def __hash__(self):
        return hash(self.fixed)

    def __repr__(self):
        return "PPolicy(per_k)" if self.fixed is None else f"PPolicy(fixed={self.fixed!r})"

    def to_json(self):
        return "per_k" if self.fixed is None else self.fixed


@dataclass(frozen=True)
class EstimateCurve:
    """Estimates over a range of ``k``.

    ``points`` holds ``(k, estimate)`` pairs with ``k`` strictly increasing;
    ``skipped`` maps each omitted ``k`` to the reason it was infeasible.
    """

    kind: EstimatorKind
    points: tuple
    adapted: bool
    skipped: dict = field(default_factory=dict)

    @property
    def k(self):
        return np.array([p[0] for p in self.points], dtype=int)

    @property
    def values(self):
        return np.array([p[1] for p in self.points], dtype=float)


def estimate_curve(sorted_sample, kind, k_min, k_max, p_policy=None, adapted=True):
    """Evaluate an estimator for every ``k`` in ``[k_min, k_max]``.

    Infeasible ``k`` values are left out of ``points`` and listed in
    ``skipped``. Raises if none is feasible.
    """
    kind = EstimatorKind.parse(kind)
    n = sorted_sample.n
    k_min = check_k(k_min, n, offset=2, name="k_min")
    k_max = check_k(k_max, n, k_min=k_min, offset=2, name="k_max")
    policy = PPolicy.parse(p_policy)
    points = []
    skipped = {}
    for k in range(k_min, k_max + 1):
        try:
            value = raw_estimate(sorted_sample, k, kind)
            if adapted:
                value = adapt_to_censoring(value, policy.p(sorted_sample, k))
        except CensoredExtremesError as exc:
            skipped[k] = str(exc)
            continue
        points.append((k, value))
    if not points:
        raise TailDomainError(
            f"no feasible k in [{k_min}, {k_max}] for the {kind.value} estimator"
        )
    return EstimateCurve(kind, tuple(points), adapted, skipped)


__all__ = [
    "EstimatorKind",
    "TailStatistics",
    "GpdFit",
    "EstimateCurve",
    "PPolicy",
    "log_moments",
    "hill",
    "moment",
    "uh",
    "exceedances",
    "ml_estimator",
    "raw_estimate",
    "adapt_to_censoring",
    "estimate_curve",
]
