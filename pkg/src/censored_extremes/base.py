"""scikit-learn compatible wrapper around the censoring-adapted estimators."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .asymptotics import TailCase, confidence_interval, variance_censored
from .estimators import EstimatorKind, PPolicy, adapt_to_censoring, estimate_curve, ml_estimator, raw_estimate
from .quantile import extreme_quantile
from .sample import CensoredSample, kaplan_meier, km_survival_at_threshold, sort_sample, uncensored_proportion


class CensoredTailEstimator(BaseEstimator):
    """Extreme value index of a right-censored lifetime distribution.

    Parameters
    ----------
    kind : {"hill", "moment", "uh", "ml"}, default="uh"
        Index estimator applied to the observed times.
    k : int, default=100
        Number of top order statistics.
    fixed_p : float or None, default=None
        Replace the uncensored fraction ``p_hat(k)`` with this constant.

    Attributes
    ----------
    gamma_ : float
        Censoring-adapted index estimate.
    gamma_raw_ : float
        Estimate on the observed times, ignoring censoring.
    p_hat_ : float
        Fraction of events among the ``k`` largest observations.
    p_ : float
        The ``p`` actually used (``fixed_p`` or ``p_hat_``).
    threshold_ : float
        ``Z_{n-k,n}``.
    survival_at_threshold_ : float
        Kaplan-Meier survival at ``threshold_``.
    sigma_ : float
        GPD scale, only for ``kind="ml"``.

    Examples
    --------
    >>> from censored_extremes.families import BURR_EXAMPLE, sample_censored
    >>> s = sample_censored(BURR_EXAMPLE, 2000, seed=1)
    >>> est = CensoredTailEstimator(kind="hill", k=200).fit(s.z, s.delta)
    >>> 0.1 < est.gamma_ < 0.4
    True
    """

    def __init__(self, kind="uh", k=100, fixed_p=None):
        self.kind = kind
        self.k = k
        self.fixed_p = fixed_p

    def fit(self, X, y=None):
        """Fit on observed times ``X`` and event indicators ``y``.

        ``X`` may also be an ``(n, 2)`` array of ``(z, delta)`` rows with ``y=None``.
        """
        z, delta = _split_xy(X, y)
        kind = EstimatorKind.parse(self.kind)
        policy = PPolicy.parse(self.fixed_p)
        sample = sort_sample(CensoredSample(z, delta))
        self.sample_ = sample
        self.n_samples_ = sample.n
        self.km_ = kaplan_meier(sample)
        self.p_hat_ = uncensored_proportion(sample, self.k)
        self.p_ = policy.p(sample, self.k)
        if kind is EstimatorKind.ML:
            fit = ml_estimator(sample, self.k)
            self.fit_ = fit
            self.sigma_ = fit.sigma
            self.gamma_raw_ = fit.gamma
        else:
            self.gamma_raw_ = raw_estimate(sample, self.k, kind)
        self.gamma_ = adapt_to_censoring(self.gamma_raw_, self.p_)
        self.threshold_ = float(sample.z[sample.n - self.k - 1])
        self.survival_at_threshold_ = km_survival_at_threshold(sample, self.k, km=self.km_)
        return self

    def predict(self, eps):
        """Extreme quantile estimates ``F^{-1}(1 - eps)`` for each exceedance probability."""
        check_is_fitted(self, "gamma_")
        eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
        out = np.array([
            extreme_quantile(self.sample_, self.k, e, self.kind, self.fixed_p, km=self.km_).value
            for e in eps_arr
        ])
        return out if np.ndim(eps) else float(out[0])

    def curve(self, k_min, k_max, adapted=True):
        """Estimates for every ``k`` in ``[k_min, k_max]`` on the fitted sample."""
        check_is_fitted(self, "gamma_")
        return estimate_curve(self.sample_, self.kind, k_min, k_max, self.fixed_p, adapted=adapted)

    def confidence_interval(self, case, level=0.95, gamma1=None, p=None):
        """Wald interval for the lifetime index under an asserted tail case.

        The variance is evaluated at ``gamma1`` (default: the estimate) and
        ``p`` (default: the ``p`` used in the fit). The bias is not removed.
        """
        check_is_fitted(self, "gamma_")
        g1 = self.gamma_ if gamma1 is None else float(gamma1)
        p = self.p_ if p is None else float(p)
        case = TailCase.parse(case)
        gamma = 0.0 if case is TailCase.CASE3 else p * g1
        var = variance_censored(self.kind, case, g1, gamma, p)
        return confidence_interval(self.gamma_, self.k, var, level)


def _split_xy(X, y):
    X = np.asarray(X)
    if y is None:
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError("without y, X must be an (n, 2) array of (time, indicator) rows")
        return X[:, 0].astype(float), X[:, 1]
    return np.asarray(X, dtype=float).reshape(-1), np.asarray(y).reshape(-1)
