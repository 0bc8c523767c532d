import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from censored_extremes import EstimatorKind, PPolicy, sort_sample, uncensored_proportion
from censored_extremes.cli import main, prepare_survival
from censored_extremes.estimators import adapt_to_censoring, raw_estimate
from censored_extremes.families import BURR_EXAMPLE, LOGISTIC_EXAMPLE, sample_censored
from censored_extremes.quantile import extreme_quantile
from censored_extremes.sample import CensoredSample, write_csv


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def records(*rows):
    return [dict(zip(("diagnosis", "end", "status"), r)) for r in rows]


@pytest.fixture
def synthetic_csv(tmp_path):
    s = sample_censored(BURR_EXAMPLE, 20, seed=99)
    path = tmp_path / "synthetic.csv"
    write_csv(path, s)
    return path, s


class TestPrepareSurvival:
    def test_date_arithmetic(self):
        s = prepare_survival(records(("2000-01-01", "2000-01-11", "dead")))
        assert s.z.tolist() == [10.0] and s.delta.tolist() == [1]

    def test_same_day_rejected(self):
        with pytest.raises(ValueError, match="nonpositive durations at rows 2"):
            prepare_survival(records(("2000-01-01", "2000-01-05", "Censored"), ("2000-01-01", "2000-01-01", "censored")))

    def test_allow_zero_keeps_same_day_only(self):
        s = prepare_survival(records(("2000-01-01", "2000-01-01", "DEAD")), allow_zero=True)
        assert s.z.tolist() == [0.0]
        with pytest.raises(ValueError, match="negative durations at rows 1"):
            prepare_survival(records(("2000-01-02", "2000-01-01", "dead")), allow_zero=True)

    def test_status_aliases(self):
        s = prepare_survival(records(("2000-01-01", "2000-02-01", "D"), ("2000-01-01", "2000-03-01", "a")))
        assert s.delta.tolist() == [1, 0]

    def test_unknown_status(self):
        with pytest.raises(ValueError, match="row 1: unknown status 'lost'"):
            prepare_survival(records(("2000-01-01", "2000-01-11", "lost")))

    def test_bad_date(self):
        with pytest.raises(ValueError, match="unparseable date"):
            prepare_survival(records(("2000-13-01", "2000-01-11", "dead")))

    def test_sex_filter(self):
        rows = [
            {"diagnosis": "2000-01-01", "end": "2000-01-11", "status": "dead", "sex": "M"},
            {"diagnosis": "2000-01-01", "end": "2000-01-21", "status": "dead", "sex": "F"},
        ]
        s = prepare_survival(rows, sex_col="sex", sex="m")
        assert s.z.tolist() == [10.0]

    def test_command(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("diagnosis,end,status\n2000-01-01,2000-01-11,dead\n2000-01-01,2000-02-01,censored\n")
        out = tmp_path / "zd.csv"
        assert main(["prepare-survival", "--input", str(src), "--output", str(out)]) == 0
        assert out.read_bytes() == b"z,delta\n10,1\n31,0\n"

    def test_exit_codes(self, tmp_path, capsys):
        assert main(["prepare-survival", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.csv")]) == 2
        bad = tmp_path / "bad.csv"
        bad.write_text("diagnosis,end,status\n2000-01-01,1999-01-11,dead\n")
        assert main(["prepare-survival", "--input", str(bad), "--output", str(tmp_path / "o.csv")]) == 1
        assert "row" in capsys.readouterr().err


class TestAnalyze:
    def test_library_oracle(self, synthetic_csv, tmp_path):
        path, s = synthetic_csv
        out = tmp_path / "out"
        code = main(["analyze", "--input", str(path), "--out-dir", str(out), "--k-min", "2", "--k-max", "17",
                     "--eps", "0.01", "--eps", "0.001"])
        assert code == 0
        srt = sort_sample(s)
        for k, v in read_rows(out / "phat.csv")[1:]:
            assert float(v) == uncensored_proportion(srt, int(k))
        for kind in EstimatorKind:
            rows = read_rows(out / f"gamma_{kind.value}.csv")
            assert rows[0] == ["k", "raw", "adapted"]
            for k, raw, adapted in rows[1:]:
                k = int(k)
                r = raw_estimate(srt, k, kind)
                assert abs(float(raw) - r) <= 1e-15 * max(1.0, abs(r))
                assert float(adapted) == adapt_to_censoring(r, uncensored_proportion(srt, k))
            if kind is EstimatorKind.HILL:
                assert not list(out.glob("quantile_hill_*"))
                continue
            for eps in (0.01, 0.001):
                rows = read_rows(out / f"quantile_{kind.value}_{eps!r}.csv")
                assert rows[0] == ["k", "estimate"] and len(rows) > 1
                for k, est in rows[1:]:
                    assert float(est) == extreme_quantile(srt, int(k), eps, kind).value

    def test_all_uncensored_fixed_p_one(self, tmp_path):
        s = sample_censored(BURR_EXAMPLE, 60, seed=1)
        path = tmp_path / "u.csv"
        write_csv(path, CensoredSample(s.z, np.ones(60, dtype=int)))
        main(["analyze", "--input", str(path), "--out-dir", str(tmp_path / "o"), "--k-max", "50", "--fix-p", "1"])
        for kind in ("hill", "moment", "uh", "ml"):
            for _, raw, adapted in read_rows(tmp_path / "o" / f"gamma_{kind}.csv")[1:]:
                assert raw == adapted

    def test_byte_identical_rerun(self, synthetic_csv, tmp_path):
        path, _ = synthetic_csv
        args = ["analyze", "--input", str(path), "--k-max", "15", "--eps", "0.01", "--case", "1"]
        main(args + ["--out-dir", str(tmp_path / "a")])
        main(args + ["--out-dir", str(tmp_path / "b")])
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
            assert b"\r" not in (tmp_path / "a" / name).read_bytes()

    def test_confidence_columns(self, synthetic_csv, tmp_path):
        path, s = synthetic_csv
        main(["analyze", "--input", str(path), "--out-dir", str(tmp_path), "--k-min", "5", "--k-max", "10",
              "--estimators", "hill", "--case", "1", "--gamma1", "0.25", "--fix-p", "0.8"])
        rows = read_rows(tmp_path / "gamma_hill.csv")
        assert rows[0] == ["k", "raw", "adapted", "ci_lower", "ci_upper"]
        for k, _, adapted, lo, hi in rows[1:]:
            half = 1.959963984540054 * np.sqrt(0.25**3 / (0.8 * 0.25) / int(k))
            assert_allclose([float(lo), float(hi)], [float(adapted) - half, float(adapted) + half], rtol=1e-13)

    def test_no_ci_without_case(self, synthetic_csv, tmp_path):
        path, _ = synthetic_csv
        main(["analyze", "--input", str(path), "--out-dir", str(tmp_path), "--k-max", "10", "--estimators", "uh"])
        assert read_rows(tmp_path / "gamma_uh.csv")[0] == ["k", "raw", "adapted"]

    def test_years_divides_quantiles_only(self, synthetic_csv, tmp_path):
        path, _ = synthetic_csv
        base = ["analyze", "--input", str(path), "--k-max", "12", "--estimators", "uh", "--eps", "0.01"]
        main(base + ["--out-dir", str(tmp_path / "d")])
        main(base + ["--out-dir", str(tmp_path / "y"), "--years"])
        d = read_rows(tmp_path / "d" / "quantile_uh_0.01.csv")[1:]
        y = read_rows(tmp_path / "y" / "quantile_uh_0.01.csv")[1:]
        assert [float(a[1]) / 365.25 for a in d] == [float(b[1]) for b in y]
        assert (tmp_path / "d" / "gamma_uh.csv").read_bytes() == (tmp_path / "y" / "gamma_uh.csv").read_bytes()

    def test_fixed_p_matches_policy(self, synthetic_csv, tmp_path):
        path, s = synthetic_csv
        main(["analyze", "--input", str(path), "--out-dir", str(tmp_path), "--k-max", "12",
              "--estimators", "moment", "--fix-p", "0.5"])
        srt = sort_sample(s)
        for k, raw, adapted in read_rows(tmp_path / "gamma_moment.csv")[1:]:
            assert float(adapted) == adapt_to_censoring(float(raw), PPolicy(0.5).p(srt, int(k)))

    @pytest.mark.parametrize("args", [
        ["--k-max", "19"],
        ["--k-max", "10", "--eps", "1.5"],
        ["--k-max", "10", "--estimators", "pickands"],
        ["--k-max", "10", "--case", "2", "--estimators", "hill"],
    ])
    def test_validation_exit(self, synthetic_csv, tmp_path, args):
        path, _ = synthetic_csv
        assert main(["analyze", "--input", str(path), "--out-dir", str(tmp_path)] + args) == 1

    def test_missing_input(self, tmp_path):
        assert main(["analyze", "--input", str(tmp_path / "x.csv"), "--out-dir", str(tmp_path), "--k-max", "5"]) == 2


class TestSimulate:
    def test_minimal_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"pair": LOGISTIC_EXAMPLE.to_dict(), "n": 60, "reps": 1, "k_grid": [5, 10, 20]}))
        for out in ("a", "b"):
            assert main(["simulate", "--input", str(cfg), "--out-dir", str(tmp_path / out)]) == 0
        rows = read_rows(tmp_path / "a" / "summary.csv")
        assert len(rows) == 1 + 4 * 3
        assert len(read_rows(tmp_path / "a" / "quantile_summary.csv")) == 1 + 3 * 3
        for name in ("summary.csv", "quantile_summary.csv", "metadata.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"pair": LOGISTIC_EXAMPLE.to_dict(), "n": 60, "reps": 2, "k_grid": [10]}))
        main(["simulate", "--input", str(cfg), "--out-dir", str(tmp_path / "o"), "--seed", "3"])
        assert json.loads((tmp_path / "o" / "metadata.json").read_text())["config"]["seed"] == 3

    def test_invalid_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"pair": LOGISTIC_EXAMPLE.to_dict(), "n": 60, "reps": -1}))
        assert main(["simulate", "--input", str(cfg), "--out-dir", str(tmp_path / "o")]) == 1
        assert "config /reps" in capsys.readouterr().err


class TestTruth:
    def run(self, capsys, pair):
        assert main(["truth", "--pair", json.dumps(pair)]) == 0
        return json.loads(capsys.readouterr().out)

    def test_example1(self, capsys):
        report = self.run(capsys, BURR_EXAMPLE.to_dict())
        assert_allclose([report["truth"][k] for k in ("gamma1", "gamma", "p")], [0.25, 2 / 9, 8 / 9])
        assert_allclose(report["variance"]["hill"], 9 / 128)

    def test_logistic(self, capsys):
        report = self.run(capsys, LOGISTIC_EXAMPLE.to_dict())
        assert report["truth"]["gamma1"] == report["truth"]["gamma"] == 0.0
        assert report["truth"]["p"] == 0.5
        assert report["variance"]["moment"] == report["variance"]["uh"] == 4.0
        assert report["variance"]["hill"] is None

    def test_mixed_pair(self, capsys):
        pair = {"f": {"family": "burr", "beta": 1, "tau": 1, "lambda": 1},
                "g": {"family": "reverse_burr", "beta": 1, "tau": 1, "lambda": 1, "x_plus": 5}}
        assert main(["truth", "--pair", json.dumps(pair)]) == 1
        assert "three cases" in capsys.readouterr().err

    def test_usage_error_is_validation(self, capsys):
        assert main(["truth"]) == 1
        assert "usage" in capsys.readouterr().err
