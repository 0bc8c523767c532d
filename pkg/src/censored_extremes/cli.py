"""Command-line interface: ``censored-extremes <command> [options]``.

Commands
--------
prepare-survival
    Convert an event-record CSV (diagnosis date, end date, status) into a
    ``z,delta`` CSV of durations in days.
analyze
    Write the p_hat curve, index curves and extreme quantile curves of a
    ``z,delta`` CSV.
simulate
    Run a seeded Monte Carlo study from a JSON config.
truth
    Print the exact tail parameters and asymptotic variances of a model pair.

Exit codes are 0 on success, 1 on validation errors and 2 on I/O errors.
"""

import argparse
import csv
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .asymptotics import TailCase, confidence_interval, variance_censored
from .estimators import EstimatorKind, PPolicy, estimate_curve
from .exceptions import CensoredExtremesError, DataValidationError
from .families import FamilyPair, truth_values
from .montecarlo import SimConfig, run_study, write_study
from .quantile import extreme_quantile
from .sample import CensoredSample, kaplan_meier, read_csv, sort_sample, uncensored_proportion, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
DAYS_PER_YEAR = 365.25

_DEAD = {"dead", "d"}
_CENSORED = {"censored", "a", "alive"}


def _fmt(x):
    return repr(float(x))


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _eps_label(eps):
    return repr(float(eps))


# --------------------------------------------------------------------------
# prepare-survival


def _parse_date(text, row, column):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataValidationError(f"row {row}: column {column!r}: unparseable date {text!r}", row=row) from None


def prepare_survival(rows, diagnosis_col="diagnosis", end_col="end", status_col="status",
                     sex_col=None, sex=None, allow_zero=False):
    """Turn event records into durations in days and event indicators.

    Parameters
    ----------
    rows : iterable of dict
        Records as produced by :class:`csv.DictReader`.
    allow_zero : bool
        Keep zero-length durations (same-day diagnosis and end). Negative
        durations are always rejected.

    Returns
    -------
    CensoredSample
    """
    z, delta = [], []
    bad = []
    for i, rec in enumerate(rows, start=1):
        if sex is not None:
            if rec.get(sex_col) is None:
                raise DataValidationError(f"row {i}: missing column {sex_col!r}", row=i)
            if rec[sex_col].strip().lower() != sex.strip().lower():
                continue
        for col in (diagnosis_col, end_col, status_col):
            if rec.get(col) is None or not rec[col].strip():
                raise DataValidationError(f"row {i}: missing value in column {col!r}", row=i)
        start = _parse_date(rec[diagnosis_col], i, diagnosis_col)
        end = _parse_date(rec[end_col], i, end_col)
        token = rec[status_col].strip().lower()
        if token in _DEAD:
            event = 1
        elif token in _CENSORED:
            event = 0
        else:
            raise DataValidationError(
                f"row {i}: unknown status {rec[status_col]!r}; expected dead or censored", row=i
            )
        days = (end - start).days
        if days < 0 or (days == 0 and not allow_zero):
            bad.append(i)
            continue
        z.append(float(days))
        delta.append(event)
    if bad:
        shown = ", ".join(str(r) for r in bad[:20]) + (" ..." if len(bad) > 20 else "")
        rule = "negative" if allow_zero else "nonpositive"
        raise DataValidationError(f"{len(bad)} {rule} durations at rows {shown}", row=bad[0])
    return CensoredSample(z, delta)


def cmd_prepare_survival(args):
    with open(args.input, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    sample = prepare_survival(
        rows, args.diagnosis_col, args.end_col, args.status_col,
        sex_col=args.sex_col, sex=args.sex, allow_zero=args.allow_zero,
    )
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, sample)
    logger.info("wrote %d rows (%d events) to %s", sample.n, int(sample.delta.sum()), out)
    return EXIT_OK


# --------------------------------------------------------------------------
# analyze


def analyze(sample, out_dir, kinds, k_min, k_max, eps_list=(), fixed_p=None,
            years=False, case=None, gamma1=None, level=0.95):
    """Write the analysis CSV files for ``sample`` into ``out_dir``.

    Every number written comes straight from a library call; the only
    transformation is the optional division of quantiles by 365.25.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sorted_sample = sort_sample(sample)
    policy = PPolicy.parse(fixed_p)
    kinds = [EstimatorKind.parse(k) for k in kinds]
    for e in eps_list:
        if not 0.0 < float(e) < 1.0:
            raise DataValidationError(f"eps must lie in (0, 1), got {e!r}")
    if case is not None:
        case = TailCase.parse(case)
    km = kaplan_meier(sorted_sample)
    written = []

    ks = range(k_min, min(k_max, sorted_sample.n) + 1)
    _write_rows(out / "phat.csv", ["k", "p_hat"],
                [[k, _fmt(uncensored_proportion(sorted_sample, k))] for k in ks])
    written.append(out / "phat.csv")

    for kind in kinds:
        raw = estimate_curve(sorted_sample, kind, k_min, k_max, policy, adapted=False)
        adapted = estimate_curve(sorted_sample, kind, k_min, k_max, policy, adapted=True)
        raw_by_k = dict(raw.points)
        header = ["k", "raw", "adapted"]
        if case is not None:
            header += ["ci_lower", "ci_upper"]
        rows = []
        for k, g_c in adapted.points:
            row = [k, _fmt(raw_by_k[k]), _fmt(g_c)]
            if case is not None:
                p = policy.p(sorted_sample, k)
                g1 = g_c if gamma1 is None else float(gamma1)
                gamma = 0.0 if case is TailCase.CASE3 else p * g1
                lo, hi = confidence_interval(g_c, k, variance_censored(kind, case, g1, gamma, p), level)
                row += [_fmt(lo), _fmt(hi)]
            rows.append(row)
        path = out / f"gamma_{kind.value}.csv"
        _write_rows(path, header, rows)
        written.append(path)

        if kind is EstimatorKind.HILL:
            continue
        for e in eps_list:
            rows = []
            for k in range(k_min, k_max + 1):
                try:
                    q = extreme_quantile(sorted_sample, k, float(e), kind, policy, km=km).value
                except CensoredExtremesError:
                    continue
                rows.append([k, _fmt(q / DAYS_PER_YEAR if years else q)])
            path = out / f"quantile_{kind.value}_{_eps_label(e)}.csv"
            _write_rows(path, ["k", "estimate"], rows)
            written.append(path)
    return written


def cmd_analyze(args):
    sample = read_csv(args.input)
    analyze(
        sample, args.out_dir, args.estimators, args.k_min, args.k_max,
        eps_list=args.eps or (), fixed_p=args.fix_p, years=args.years,
        case=args.case, gamma1=args.gamma1, level=args.level,
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate / truth


def cmd_simulate(args):
    with open(args.input, encoding="utf-8") as fh:
        raw = json.load(fh)
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    config = SimConfig.from_dict(raw)
    summary = run_study(config, n_jobs=args.jobs)
    write_study(summary, args.out_dir)
    return EXIT_OK


def truth_report(pair):
    """Truth values of ``pair`` with the asymptotic variance of each adapted estimator.

    Estimators not covered in the pair's case get ``None``.
    """
    tv = truth_values(pair)
    variances = {}
    for kind in EstimatorKind:
        try:
            variances[kind.value] = variance_censored(kind, tv.case, tv.gamma1, tv.gamma, tv.p)
        except CensoredExtremesError:
            variances[kind.value] = None
    return {"pair": pair.to_dict(), "truth": tv.to_dict(), "variance": variances}


def cmd_truth(args):
    if args.input is not None:
        with open(args.input, encoding="utf-8") as fh:
            spec = json.load(fh)
    else:
        try:
            spec = json.loads(args.pair)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"--pair is not valid JSON: {exc}") from None
    report = truth_report(FamilyPair.from_dict(spec))
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _kinds(text):
    try:
        return [EstimatorKind.parse(t.strip()).value for t in text.split(",") if t.strip()]
    except CensoredExtremesError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors (exit 1), not I/O errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="censored-extremes",
        description="Extreme value index and extreme quantile estimation under random right censoring.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "prepare-survival",
        help="event records to a z,delta CSV",
        description=(
            "Compute durations in whole days between two ISO-8601 date columns. "
            "Status tokens are case-insensitive: dead or D marks an event, censored, alive or A a "
            "censored record. Nonpositive durations are rejected with their row numbers unless "
            "--allow-zero is given, which keeps same-day records and still rejects negative ones."
        ),
    )
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="z,delta CSV to write")
    p.add_argument("--diagnosis-col", default="diagnosis")
    p.add_argument("--end-col", default="end")
    p.add_argument("--status-col", default="status")
    p.add_argument("--sex-col", default="sex")
    p.add_argument("--sex", default=None, help="keep only rows whose sex column equals this value")
    p.add_argument("--allow-zero", action="store_true", help="keep zero-length durations")
    p.set_defaults(func=cmd_prepare_survival)

    p = sub.add_parser("analyze", help="p_hat, index and quantile curves of a z,delta CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--estimators", type=_kinds, default=["hill", "moment", "uh", "ml"],
                   help="comma-separated subset of hill,moment,uh,ml")
    p.add_argument("--k-min", type=int, default=5)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--eps", type=float, action="append", help="exceedance probability (repeatable)")
    p.add_argument("--fix-p", type=float, default=None, help="use this p instead of p_hat(k)")
    p.add_argument("--years", action="store_true", help="divide quantile estimates by 365.25")
    p.add_argument("--case", type=int, choices=(1, 2, 3), default=None,
                   help="asserted tail case; adds ci_lower and ci_upper columns")
    p.add_argument("--gamma1", type=float, default=None,
                   help="hypothesized lifetime index for the CI variance (default: the estimate)")
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a JSON config")
    p.add_argument("--input", required=True, help="JSON config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("truth", help="print truth values and asymptotic variances of a model pair")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="JSON file with {\"f\": ..., \"g\": ...}")
    src.add_argument("--pair", help="the same JSON given inline")
    p.set_defaults(func=cmd_truth)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CensoredExtremesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
