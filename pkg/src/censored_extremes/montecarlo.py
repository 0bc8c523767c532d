"""Seeded Monte Carlo studies of the adapted index and quantile estimators.

Replicate ``r`` draws its sample from the counter stream ``(seed, r)``, so
replicates are independent of each other and of the number of worker
processes. Aggregates are computed from arrays ordered by replicate index,
which makes a study bit-identical whether it runs serially or in parallel.
"""

import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import jsonschema
import numpy as np
from scipy import stats

from . import __version__
from .asymptotics import variance_censored
from .estimators import EstimatorKind, PPolicy, adapt_to_censoring, raw_estimate
from .exceptions import CensoredExtremesError, DataValidationError, UnsupportedCaseError
from .families import (
    GENERATOR_ID,
    FamilyPair,
    bias_overlay,
    sample_censored,
    true_quantile,
    truth_values,
)
from .quantile import extreme_quantile
from .sample import kaplan_meier, sort_sample

logger = logging.getLogger(__name__)

_MODEL_SCHEMA = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["burr", "reverse_burr", "logistic"]},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "x_plus": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["pair", "n", "reps"],
    "properties": {
        "pair": {
            "type": "object",
            "required": ["f", "g"],
            "properties": {"f": _MODEL_SCHEMA, "g": _MODEL_SCHEMA},
            "additionalProperties": False,
        },
        "n": {"type": "integer", "minimum": 3},
        "reps": {"type": "integer", "minimum": 1},
        "k_grid": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                {
                    "type": "object",
                    "required": ["start", "stop"],
                    "properties": {
                        "start": {"type": "integer", "minimum": 1},
                        "stop": {"type": "integer", "minimum": 1},
                        "step": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "estimators": {
            "type": "array",
            "items": {"enum": [k.value for k in EstimatorKind]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "p_policy": {
            "oneOf": [
                {"const": "per_k"},
                {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            ]
        },
    },
    "additionalProperties": False,
}


def default_k_grid(n):
    """``k = 5, 10, ...`` up to 95% of ``n`` (5..475 for ``n = 500``)."""
    top = min(int(0.95 * n), n - 2)
    return tuple(range(5, top + 1, 5))


@dataclass(frozen=True)
class SimConfig:
    pair: FamilyPair
    n: int
    reps: int
    k_grid: tuple = ()
    eps: float = 1.0 / 50.0
    seed: int = 20080101
    estimators: tuple = tuple(EstimatorKind)
    p_policy: PPolicy = field(default_factory=PPolicy)

    def __post_init__(self):
        if self.n < 3:
            raise DataValidationError("n must be at least 3")
        if self.reps < 1:
            raise DataValidationError("reps must be >= 1")
        grid = tuple(int(k) for k in (self.k_grid or default_k_grid(self.n)))
        if any(not 1 <= k <= self.n - 2 for k in grid):
            raise DataValidationError(f"k_grid must lie in [1, n-2] = [1, {self.n - 2}]")
        if list(grid) != sorted(set(grid)):
            raise DataValidationError("k_grid must be strictly increasing")
        if not 0 < self.eps < 1:
            raise DataValidationError("eps must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise DataValidationError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "k_grid", grid)
        object.__setattr__(self, "estimators", tuple(EstimatorKind.parse(e) for e in self.estimators))
        object.__setattr__(self, "p_policy", PPolicy.parse(self.p_policy))

    @classmethod
    def from_dict(cls, data):
        """Build from a JSON-like mapping; errors carry a JSON pointer to the bad field."""
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            pointer = "/" + "/".join(str(p) for p in err.absolute_path)
            raise DataValidationError(f"config {pointer}: {err.message}")
        grid = data.get("k_grid")
        if isinstance(grid, dict):
            grid = range(grid["start"], grid["stop"] + 1, grid.get("step", 1))
        try:
            return cls(
                pair=FamilyPair.from_dict(data["pair"]),
                n=data["n"],
                reps=data["reps"],
                k_grid=tuple(grid) if grid is not None else (),
                eps=data.get("eps", 1.0 / 50.0),
                seed=data.get("seed", 20080101),
                estimators=tuple(data.get("estimators", [k.value for k in EstimatorKind])),
                p_policy=data.get("p_policy", "per_k"),
            )
        except CensoredExtremesError as exc:
            raise DataValidationError(f"config /: {exc}") from None

    def to_dict(self):
        return {
            "pair": self.pair.to_dict(),
            "n": self.n,
            "reps": self.reps,
            "k_grid": list(self.k_grid),
            "eps": self.eps,
            "seed": int(self.seed),
            "estimators": [e.value for e in self.estimators],
            "p_policy": self.p_policy.to_json(),
        }


@dataclass(frozen=True)
class CellSummary:
    estimator: EstimatorKind
    k: int
    median: float
    mean: float
    mse: float
    variance: float
    count: int
    failures: dict


@dataclass(frozen=True)
class SimSummary:
    """Per-(estimator, k) summaries plus the raw replicate arrays behind them.

    ``index_raw[kind]`` and ``quantile_raw[kind]`` have shape
    ``(reps, len(k_grid))`` with NaN where the estimator failed.
    """

    config: SimConfig
    truth: object
    true_quantile: float
    index_cells: tuple
    quantile_cells: tuple
    index_raw: dict
    quantile_raw: dict
    metadata: dict

    def cell(self, kind, k, target="index"):
        kind = EstimatorKind.parse(kind)
        cells = self.index_cells if target == "index" else self.quantile_cells
        for c in cells:
            if c.estimator is kind and c.k == k:
                return c
        raise KeyError((kind, k, target))

    def curve(self, kind, stat="median", target="index"):
        kind = EstimatorKind.parse(kind)
        cells = self.index_cells if target == "index" else self.quantile_cells
        return np.array([getattr(c, stat) for c in cells if c.estimator is kind])


def mse(values, truth):
    """Mean squared error of ``values`` around ``truth``."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise CensoredExtremesError("mse of an empty set of values")
    return float(np.mean((v - truth) ** 2))


def _run_replicate(config, r):
    sample = sort_sample(sample_censored(config.pair, config.n, config.seed, stream=r))
    km = kaplan_meier(sample)
    out = {}
    for kind in config.estimators:
        idx = np.full(len(config.k_grid), np.nan)
        qnt = np.full(len(config.k_grid), np.nan)
        idx_fail = {}
        q_fail = {}
        for j, k in enumerate(config.k_grid):
            if kind is not EstimatorKind.HILL:
                try:
                    q = extreme_quantile(sample, k, config.eps, kind, config.p_policy, km=km)
                    idx[j] = q.gamma_adapted
                    qnt[j] = q.value
                    continue
                except CensoredExtremesError as exc:
                    q_fail[k] = type(exc).__name__
            try:
                raw = raw_estimate(sample, k, kind)
                idx[j] = adapt_to_censoring(raw, config.p_policy.p(sample, k))
            except CensoredExtremesError as exc:
                idx_fail[k] = type(exc).__name__
        out[kind] = (idx, qnt, idx_fail, q_fail)
    return out


def _run_chunk(config, replicates):
    return [_run_replicate(config, r) for r in replicates]


def _replicate_results(config, n_jobs):
    reps = range(config.reps)
    if n_jobs is None or n_jobs <= 1 or config.reps == 1:
        return [_run_replicate(config, r) for r in reps]
    chunks = [list(reps[i::n_jobs]) for i in range(n_jobs)]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks))
    results = [None] * config.reps
    for chunk, part in zip(chunks, parts):
        for r, res in zip(chunk, part):
            results[r] = res
    return results


def _summarize(kind, k, values, truth, failures):
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        nan = float("nan")
        return CellSummary(kind, k, nan, nan, nan, nan, 0, dict(failures))
    return CellSummary(
        kind,
        k,
        float(np.median(finite)),
        float(np.mean(finite)),
        mse(finite, truth),
        float(np.var(finite)),
        int(finite.size),
        dict(failures),
    )


def run_study(config, n_jobs=1):
    """Simulate ``config.reps`` censored samples and summarize every estimator per ``k``.

    Failed (replicate, estimator, k) cells are excluded from that cell's
    statistics and counted by exception type. The Hill estimator has no
    quantile summaries.
    """
    truth = truth_values(config.pair)
    x_true = true_quantile(config.pair, config.eps)
    results = _replicate_results(config, n_jobs)

    index_cells, quantile_cells = [], []
    index_raw, quantile_raw = {}, {}
    failure_log = {}
    for kind in config.estimators:
        idx = np.vstack([res[kind][0] for res in results])
        qnt = np.vstack([res[kind][1] for res in results])
        index_raw[kind] = idx
        for j, k in enumerate(config.k_grid):
            fails = Counter(res[kind][2][k] for res in results if k in res[kind][2])
            index_cells.append(_summarize(kind, k, idx[:, j], truth.gamma1, fails))
            if fails:
                failure_log[f"index/{kind.value}/{k}"] = dict(sorted(fails.items()))
        if kind is EstimatorKind.HILL:
            continue
        quantile_raw[kind] = qnt
        for j, k in enumerate(config.k_grid):
            fails = Counter(res[kind][3][k] for res in results if k in res[kind][3])
            quantile_cells.append(_summarize(kind, k, qnt[:, j], x_true, fails))
            if fails:
                failure_log[f"quantile/{kind.value}/{k}"] = dict(sorted(fails.items()))

    metadata = {
        "config": config.to_dict(),
        "generator": GENERATOR_ID,
        "version": __version__,
        "truth": truth.to_dict(),
        "true_quantile": x_true,
        "failures": failure_log,
    }
    return SimSummary(config, truth, x_true, tuple(index_cells), tuple(quantile_cells),
                      index_raw, quantile_raw, metadata)


def _fmt(x):
    return repr(float(x))


def write_study(summary, out_dir):
    """Write ``summary.csv``, ``quantile_summary.csv`` and ``metadata.json`` into ``out_dir``."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = "estimator,k,median,mean,mse,failures\n"
    for name, cells in (("summary.csv", summary.index_cells), ("quantile_summary.csv", summary.quantile_cells)):
        lines = [header]
        for c in cells:
            lines.append(
                f"{c.estimator.value},{c.k},{_fmt(c.median)},{_fmt(c.mean)},{_fmt(c.mse)},{sum(c.failures.values())}\n"
            )
        (out / name).write_text("".join(lines), encoding="utf-8", newline="\n")
    (out / "metadata.json").write_text(
        json.dumps(summary.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    return out


@dataclass(frozen=True)
class NormalityReport:
    kind: EstimatorKind
    n: int
    k: int
    values: np.ndarray
    failures: dict
    mean: float
    variance: float
    theoretical_mean: float | None
    theoretical_variance: float | None
    ks_distance: float | None


def normality_experiment(config, kind, k_rule, n_jobs=1):
    """Standardized replicates ``sqrt(k)(gamma_c - gamma1)`` at one ``k``.

    ``k_rule`` is an int or a callable mapping ``n`` to ``k``. The
    theoretical mean is the closed-form bias of the model pair, when one is
    available; the theoretical variance comes from the limiting law.
    """
    kind = EstimatorKind.parse(kind)
    k = int(k_rule(config.n) if callable(k_rule) else k_rule)
    run = SimConfig(config.pair, config.n, config.reps, (k,), config.eps, config.seed,
                    (kind,), config.p_policy)
    truth = truth_values(config.pair)
    results = _replicate_results_index_only(run, kind, k, n_jobs)
    values = np.array([v for v in results if not isinstance(v, str)], dtype=float)
    failures = dict(sorted(Counter(v for v in results if isinstance(v, str)).items()))
    values = math.sqrt(k) * (values - truth.gamma1)

    try:
        theo_var = variance_censored(kind, truth.case, truth.gamma1, truth.gamma, truth.p)
    except UnsupportedCaseError:
        theo_var = None
    try:
        theo_mean = bias_overlay(config.pair, kind, config.n, k)
    except UnsupportedCaseError:
        theo_mean = None

    if values.size >= 2:
        mean = float(np.mean(values))
        var = float(np.var(values, ddof=1))
        ks = float(stats.kstest(values, "norm", args=(mean, math.sqrt(var))).statistic)
    else:
        mean = float(values[0]) if values.size else float("nan")
        var = float("nan")
        ks = None
    return NormalityReport(kind, config.n, k, values, failures, mean, var, theo_mean, theo_var, ks)


def _index_only(config, kind, k, r):
    sample = sort_sample(sample_censored(config.pair, config.n, config.seed, stream=r))
    try:
        raw = raw_estimate(sample, k, kind)
        return adapt_to_censoring(raw, config.p_policy.p(sample, k))
    except CensoredExtremesError as exc:
        return type(exc).__name__


def _index_chunk(config, kind, k, replicates):
    return [_index_only(config, kind, k, r) for r in replicates]


def _replicate_results_index_only(config, kind, k, n_jobs):
    reps = range(config.reps)
    if n_jobs is None or n_jobs <= 1 or config.reps == 1:
        return [_index_only(config, kind, k, r) for r in reps]
    chunks = [list(reps[i::n_jobs]) for i in range(n_jobs)]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(_index_chunk, [config] * len(chunks), [kind] * len(chunks),
                              [k] * len(chunks), chunks))
    results = [None] * config.reps
    for chunk, part in zip(chunks, parts):
        for r, res in zip(chunk, part):
            results[r] = res
    return results
