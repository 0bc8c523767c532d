"""Censored samples, order statistics with induced indicators, and Kaplan-Meier.

A right-censored observation is a pair ``(z, delta)`` where ``z = min(x, y)``
is the observed time and ``delta = 1`` when the lifetime ``x`` itself was seen.
Everything here is immutable; arrays are returned read-only.
"""

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_censored_arrays, check_k
from .exceptions import DataValidationError


class CensoredObservation(NamedTuple):
    z: float
    delta: int


@dataclass(frozen=True, eq=False)
class CensoredSample:
    """Validated observations in input order."""

    z: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        z, d = check_censored_arrays(self.z, self.delta)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "delta", d)

    @property
    def n(self):
        return int(self.z.size)

    @property
    def observations(self):
        return tuple(
            CensoredObservation(float(t), int(d)) for t, d in zip(self.z, self.delta)
        )

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"CensoredSample(n={self.n}, events={int(self.delta.sum())})"


@dataclass(frozen=True, eq=False)
class SortedCensoredSample:
    """Order statistics ``Z_{1,n} <= ... <= Z_{n,n}`` with induced indicators.

    Built by :func:`sort_sample`; the constructor only checks monotonicity.
    """

    z: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        z, d = check_censored_arrays(self.z, self.delta)
        if np.any(np.diff(z) < 0):
            raise DataValidationError("times are not sorted; use sort_sample()")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "delta", d)

    @property
    def n(self):
        return int(self.z.size)

    @property
    def z_sorted(self):
        return self.z

    @property
    def delta_induced(self):
        return self.delta

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"SortedCensoredSample(n={self.n}, events={int(self.delta.sum())})"


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous step function.

    ``f(t) = initial_value`` for ``t < jump_points[0]`` and
    ``f(t) = values[i]`` for ``jump_points[i] <= t < jump_points[i + 1]``.
    """

    jump_points: np.ndarray
    values: np.ndarray
    initial_value: float = 0.0

    def __post_init__(self):
        x = np.array(self.jump_points, dtype=float).reshape(-1)
        y = np.array(self.values, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError("jump_points and values must have equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("jump_points must be strictly increasing")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "jump_points", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_points, t, side="right")
        table = np.concatenate(([self.initial_value], self.values))
        out = table[idx]
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class KaplanMeierFunction(StepFunction):
    """Kaplan-Meier distribution function that also keeps the survival products.

    ``survival(t)`` is evaluated from the product-limit factors directly
    rather than as ``1 - F(t)``, so small tail survivals keep full relative
    precision.
    """

    survival_values: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        s = np.array(self.survival_values, dtype=float).reshape(-1)
        if s.shape != self.values.shape:
            raise ValueError("survival_values must match values in length")
        s.flags.writeable = False
        object.__setattr__(self, "survival_values", s)

    def survival(self, t):
        """Right-continuous ``1 - F(t)``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_points, t, side="right")
        out = np.concatenate(([1.0 - self.initial_value], self.survival_values))[idx]
        return float(out) if out.ndim == 0 else out


def from_records(rows):
    """Build a :class:`CensoredSample` from ``(time, indicator)`` pairs.

    Input order is preserved. Raises :class:`DataValidationError` naming the
    first bad row.
    """
    rows = list(rows)
    if not rows:
        raise DataValidationError("empty sample: at least one observation is required")
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise DataValidationError(f"row {i}: expected (time, indicator), got {row!r}", row=i)
    z = [r[0] for r in rows]
    d = [r[1] for r in rows]
    try:
        z = np.asarray(z, dtype=float)
    except (TypeError, ValueError):
        for i, t in enumerate(z):
            try:
                float(t)
            except (TypeError, ValueError):
                raise DataValidationError(f"row {i}: time {t!r} is not a number", row=i) from None
    return CensoredSample(z, np.asarray(d, dtype=object))


def sort_sample(sample):
    """Sort by time; ties put censored (delta=0) before events, then input order."""
    # lexsort is stable, so equal (z, delta) keys keep their input order
    order = np.lexsort((sample.delta, sample.z))
    return SortedCensoredSample(sample.z[order], sample.delta[order])


def uncensored_proportion(sorted_sample, k):
    """Fraction of events among the ``k`` largest observations."""
    k = check_k(k, sorted_sample.n, offset=0)
    n = sorted_sample.n
    return float(np.mean(sorted_sample.delta[n - k:]))


def uncensored_proportion_curve(sorted_sample, k_values):
    """:func:`uncensored_proportion` evaluated at each ``k`` of ``k_values``."""
    return np.array([uncensored_proportion(sorted_sample, k) for k in k_values])


def kaplan_meier(sorted_sample):
    """Product-limit estimate of the lifetime distribution function.

    Returns a :class:`KaplanMeierFunction` (a :class:`StepFunction` for
    ``F_n``) jumping at the distinct event times. At a tied time the risk
    set includes observations censored there. If the largest observation is
    censored, ``1 - F_n`` keeps its last value.
    """
    z = sorted_sample.z
    d = sorted_sample.delta
    n = z.size
    event_times = np.unique(z[d == 1])
    if event_times.size == 0:
        return KaplanMeierFunction([], [], 0.0, [])
    at_risk = n - np.searchsorted(z, event_times, side="left")
    events = np.searchsorted(z[d == 1], event_times, side="right") - np.searchsorted(
        z[d == 1], event_times, side="left"
    )
    # Between two event times without censoring in between, the numerator of
    # one factor (r - d) / r cancels the next denominator. Each such run is
    # therefore a single integer ratio, which makes the uncensored case equal
    # to the empirical distribution function bit for bit.
    after = at_risk - events
    start = np.ones(event_times.size, dtype=bool)
    start[1:] = at_risk[1:] != after[:-1]
    block = np.cumsum(start) - 1
    first = np.flatnonzero(start)
    last = np.append(first[1:] - 1, event_times.size - 1)
    entering = np.concatenate(([1.0], np.cumprod(after[last] / at_risk[first])[:-1]))
    r0 = at_risk[first][block]
    p_in = entering[block]
    cdf = (1.0 - p_in) + p_in * ((r0 - after) / r0)
    survival = p_in * (after / r0)
    return KaplanMeierFunction(event_times, cdf, 0.0, survival)


def km_survival_at_threshold(sorted_sample, k, km=None):
    """``1 - F_n(Z_{n-k,n})``, the KM survival at the (k+1)-th largest time.

    ``km`` may be a precomputed :func:`kaplan_meier` result for the same sample.
    """
    n = sorted_sample.n
    k = check_k(k, n)
    if km is None:
        km = kaplan_meier(sorted_sample)
    t = sorted_sample.z[n - k - 1]
    if isinstance(km, KaplanMeierFunction):
        return km.survival(t)
    return 1.0 - km(t)


def read_csv(path):
    """Read a ``z,delta`` CSV into a :class:`CensoredSample`.

    Row numbers in error messages count data rows from 1 (header excluded).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header[:2] != ["z", "delta"] or len(header) != 2:
            raise DataValidationError(f"{path}: expected header 'z,delta', got {','.join(header)!r}")
        z, d = [], []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 2 or any(not c.strip() for c in row):
                raise DataValidationError(f"{path}: data row {i}: missing field", row=i)
            try:
                t = float(row[0])
            except ValueError:
                raise DataValidationError(f"{path}: data row {i}: bad time {row[0]!r}", row=i) from None
            flag = row[1].strip()
            if flag not in ("0", "1"):
                raise DataValidationError(f"{path}: data row {i}: indicator {flag!r} not in {{0,1}}", row=i)
            if not np.isfinite(t):
                raise DataValidationError(f"{path}: data row {i}: time is not finite", row=i)
            z.append(t)
            d.append(int(flag))
    if not z:
        raise DataValidationError(f"{path}: no data rows")
    return CensoredSample(np.array(z), np.array(d))


def write_csv(path, sample):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("z,delta\n")
        for t, d in zip(sample.z, sample.delta):
            fh.write(f"{_fmt(t)},{int(d)}\n")


def _fmt(x):
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)
