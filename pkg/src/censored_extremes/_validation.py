"""Input validation helpers."""

import math
import numbers

import numpy as np

from .exceptions import DataValidationError, TailDomainError


def check_censored_arrays(z, delta):
    """Validate and convert a (times, indicators) pair to read-only float/int arrays.

    Raises
    ------
    DataValidationError
        On empty input, shape mismatch, non-finite times or indicators
        outside {0, 1}. The message names the first offending row.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    delta_raw = np.asarray(delta).reshape(-1)
    if z.size == 0:
        raise DataValidationError("empty sample: at least one observation is required")
    if z.shape != delta_raw.shape:
        raise DataValidationError(
            f"times and indicators differ in length ({z.size} vs {delta_raw.size})"
        )
    bad = np.flatnonzero(~np.isfinite(z))
    if bad.size:
        i = int(bad[0])
        raise DataValidationError(f"row {i}: time {z[i]!r} is not finite", row=i)
    try:
        delta_f = delta_raw.astype(float)
    except (TypeError, ValueError) as exc:
        raise DataValidationError(f"indicators must be 0 or 1: {exc}") from None
    bad = np.flatnonzero((delta_f != 0) & (delta_f != 1))
    if bad.size:
        i = int(bad[0])
        raise DataValidationError(
            f"row {i}: indicator {delta_raw[i]!r} is not in {{0, 1}}", row=i
        )
    z = z.copy()
    d = delta_f.astype(np.int8)
    z.flags.writeable = False
    d.flags.writeable = False
    return z, d


def check_k(k, n, k_min=1, offset=1, name="k"):
    """Return ``k`` as int after checking ``k_min <= k <= n - offset``."""
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise TailDomainError(f"{name} must be an integer, got {k!r}")
    k = int(k)
    if not k_min <= k <= n - offset:
        raise TailDomainError(f"{name}={k} outside [{k_min}, {n - offset}] for n={n}")
    return k


def check_p_hat(p_hat):
    p_hat = float(p_hat)
    if not 0.0 < p_hat <= 1.0 or math.isnan(p_hat):
        if p_hat == 0.0:
            raise TailDomainError("no uncensored observations among top k (p_hat = 0)")
        raise TailDomainError(f"p_hat must lie in (0, 1], got {p_hat!r}")
    return p_hat


def check_open_unit(value, name):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise DataValidationError(f"{name} must lie in (0, 1), got {value!r}")
    return value
