import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from censored_extremes import CensoredExtremesError, DataValidationError, EstimatorKind
from censored_extremes.families import (
    BURR_EXAMPLE,
    LOGISTIC_EXAMPLE,
    REVERSE_BURR_EXAMPLE,
    Burr,
    FamilyPair,
    sample_censored,
)
from censored_extremes.montecarlo import (
    SimConfig,
    default_k_grid,
    mse,
    normality_experiment,
    run_study,
    write_study,
)


@pytest.fixture(scope="module")
def small_study():
    config = SimConfig(REVERSE_BURR_EXAMPLE, n=200, reps=12, k_grid=(3, 10, 40, 120), seed=5)
    return run_study(config)


class TestMse:
    def test_zero(self):
        assert mse([1.5, 1.5], 1.5) == 0.0

    def test_simple(self):
        assert mse([0.0, 2.0], 1.0) == 1.0

    def test_shifted_copy(self, rng):
        v = rng.normal(size=1000)
        assert_allclose(mse(v + 0.3, 0.0) - mse(v, 0.0), 0.6 * v.mean() + 0.09, rtol=1e-12)

    def test_empty(self):
        with pytest.raises(CensoredExtremesError):
            mse([], 0.0)


class TestConfig:
    def test_default_grid(self):
        assert default_k_grid(500) == tuple(range(5, 476, 5))

    def test_round_trip(self):
        c = SimConfig(BURR_EXAMPLE, 500, 3, k_grid=(10, 20), p_policy=0.9)
        assert SimConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c

    def test_grid_object(self):
        c = SimConfig.from_dict({"pair": LOGISTIC_EXAMPLE.to_dict(), "n": 100, "reps": 1,
                                 "k_grid": {"start": 10, "stop": 50, "step": 20}})
        assert c.k_grid == (10, 30, 50)

    @pytest.mark.parametrize("patch, pointer", [
        ({"n": "big"}, "/n"),
        ({"reps": 0}, "/reps"),
        ({"eps": 1.5}, "/eps"),
        ({"estimators": ["pickands"]}, "/estimators/0"),
        ({"pair": {"f": {"family": "burr", "beta": -1, "tau": 1, "lambda": 1}, "g": {"family": "burr"}}}, "/pair/f/beta"),
    ])
    def test_json_pointer_errors(self, patch, pointer):
        data = {"pair": BURR_EXAMPLE.to_dict(), "n": 500, "reps": 2, **patch}
        with pytest.raises(DataValidationError, match=f"config {pointer}:"):
            SimConfig.from_dict(data)

    def test_k_out_of_range(self):
        with pytest.raises(DataValidationError, match="k_grid"):
            SimConfig(BURR_EXAMPLE, 50, 1, k_grid=(49,))


class TestRunStudy:
    def test_single_replicate_median_is_the_estimate(self):
        # censoring times of order 1e12: every observation is an event
        pair = FamilyPair(Burr(1, 2, 1), Burr(1e12, 1, 1))
        assert sample_censored(pair, 100, seed=20080101).delta.all()
        config = SimConfig(pair, 100, 1, k_grid=(10, 20), estimators=("hill",))
        study = run_study(config)
        for j, k in enumerate(config.k_grid):
            cell = study.cell("hill", k)
            assert cell.median == study.index_raw[EstimatorKind.HILL][0, j]
            assert cell.count == 1

    def test_mse_second_pass(self, small_study):
        truth = small_study.truth.gamma1
        for kind, raw in small_study.index_raw.items():
            for j, k in enumerate(small_study.config.k_grid):
                v = raw[:, j][~np.isnan(raw[:, j])]
                if v.size:
                    assert_allclose(small_study.cell(kind, k).mse, np.sum((v - truth) ** 2) / v.size, rtol=1e-12)

    def test_variance_decomposition(self, small_study):
        for c in small_study.index_cells + small_study.quantile_cells:
            if c.count:
                truth = small_study.truth.gamma1 if c in small_study.index_cells else small_study.true_quantile
                assert_allclose(c.mse, (c.mean - truth) ** 2 + c.variance, rtol=1e-12, atol=1e-15)
                assert c.mse >= (c.mean - truth) ** 2 * (1 - 1e-12)

    def test_failure_bookkeeping(self, small_study):
        reps = small_study.config.reps
        for c in small_study.index_cells:
            assert c.count + sum(c.failures.values()) == reps
        assert all(isinstance(name, str) for c in small_study.index_cells for name in c.failures)

    def test_hill_has_no_quantiles(self, small_study):
        assert EstimatorKind.HILL not in small_study.quantile_raw
        assert all(c.estimator is not EstimatorKind.HILL for c in small_study.quantile_cells)

    def test_deterministic_and_parallel_identical(self):
        config = SimConfig(BURR_EXAMPLE, 150, 6, k_grid=(10, 50), seed=11)
        a = run_study(config)
        b = run_study(config, n_jobs=3)
        for kind in config.estimators:
            assert a.index_raw[kind].tobytes() == b.index_raw[kind].tobytes()
        assert a.index_cells == b.index_cells

    def test_write_study(self, small_study, tmp_path):
        write_study(small_study, tmp_path / "a")
        write_study(small_study, tmp_path / "b")
        for name in ("summary.csv", "quantile_summary.csv", "metadata.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        lines = (tmp_path / "a" / "summary.csv").read_text().splitlines()
        assert lines[0] == "estimator,k,median,mean,mse,failures"
        assert len(lines) == 1 + 4 * len(small_study.config.k_grid)
        meta = json.loads((tmp_path / "a" / "metadata.json").read_text())
        assert meta["config"]["seed"] == 5
        assert "Philox" in meta["generator"]


class TestNormality:
    def test_single_replicate_has_no_ks(self):
        config = SimConfig(LOGISTIC_EXAMPLE, 300, 1)
        report = normality_experiment(config, "moment", 30)
        assert report.ks_distance is None
        assert report.values.size == 1

    def test_logistic_moment_theory_attached(self):
        config = SimConfig(LOGISTIC_EXAMPLE, 400, 50)
        report = normality_experiment(config, "moment", lambda n: int(n**0.5))
        assert report.k == 20
        assert report.theoretical_variance == pytest.approx(4.0)
        assert report.values.size + sum(report.failures.values()) == 50
        assert 0 < report.ks_distance < 1
