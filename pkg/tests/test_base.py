import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from censored_extremes import CensoredTailEstimator, UnsupportedCaseError, sort_sample
from censored_extremes.asymptotics import confidence_interval, variance_censored
from censored_extremes.estimators import estimate_curve
from censored_extremes.families import BURR_EXAMPLE, sample_censored
from censored_extremes.quantile import extreme_quantile


@pytest.fixture(scope="module")
def sample():
    return sample_censored(BURR_EXAMPLE, 800, seed=17)


class TestCensoredTailEstimator:
    def test_params(self):
        est = CensoredTailEstimator(kind="moment", k=50, fixed_p=0.9)
        assert est.get_params() == {"kind": "moment", "k": 50, "fixed_p": 0.9}
        assert clone(est).set_params(k=70).k == 70

    @pytest.mark.parametrize("kind", ["moment", "uh", "ml"])
    def test_matches_functional_api(self, sample, kind):
        est = CensoredTailEstimator(kind=kind, k=120).fit(sample.z, sample.delta)
        q = extreme_quantile(sort_sample(sample), 120, 0.001, kind)
        assert est.gamma_ == q.gamma_adapted
        assert est.predict(0.001) == q.value
        assert est.threshold_ == q.threshold
        assert est.survival_at_threshold_ == q.survival_at_threshold

    def test_two_column_input(self, sample):
        a = CensoredTailEstimator(kind="hill", k=100).fit(np.column_stack((sample.z, sample.delta)))
        b = CensoredTailEstimator(kind="hill", k=100).fit(sample.z, sample.delta)
        assert a.gamma_ == b.gamma_

    def test_predict_vector(self, sample):
        est = CensoredTailEstimator(kind="uh", k=100).fit(sample.z, sample.delta)
        out = est.predict([0.01, 0.001])
        assert out.shape == (2,) and out[1] > out[0]

    def test_hill_has_no_quantile(self, sample):
        est = CensoredTailEstimator(kind="hill", k=100).fit(sample.z, sample.delta)
        with pytest.raises(UnsupportedCaseError):
            est.predict(0.01)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            CensoredTailEstimator().predict(0.01)

    def test_curve(self, sample):
        est = CensoredTailEstimator(kind="moment", k=100).fit(sample.z, sample.delta)
        c = est.curve(10, 200)
        ref = estimate_curve(sort_sample(sample), "moment", 10, 200)
        assert c.points == ref.points

    def test_confidence_interval(self, sample):
        est = CensoredTailEstimator(kind="hill", k=128, fixed_p=8 / 9).fit(sample.z, sample.delta)
        lo, hi = est.confidence_interval(case=1, gamma1=0.25)
        ref = confidence_interval(est.gamma_, 128, variance_censored("hill", 1, 0.25, 2 / 9, 8 / 9))
        assert_allclose([lo, hi], ref, rtol=1e-14)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            CensoredTailEstimator().fit(np.ones((5, 3)))
