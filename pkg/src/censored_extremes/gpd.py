"""Generalized Pareto log-likelihood and maximum-likelihood fit of exceedances.

The fit profiles the likelihood over ``theta = gamma / sigma``. For fixed
``theta`` the likelihood is maximized in closed form by
``gamma(theta) = mean(log1p(theta * E))`` and ``sigma = gamma / theta``, which
leaves a one-dimensional search: a log-spaced bracket scan on each side of
zero followed by golden-section refinement around the best scan point.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .exceptions import TailDomainError

GAMMA_FLOOR = -0.5 + 1e-6
GAMMA_CEIL = 5.0
_GAMMA_ZERO = 1e-10
_THETA_ZERO = 1e-300
_SCAN_POINTS = 200


@dataclass(frozen=True)
class GpdFit:
    gamma: float
    sigma: float
    loglik: float
    converged: bool
    iterations: int


def gpd_loglik(exceedances, gamma, sigma):
    """Log-likelihood of GPD(gamma, sigma) exceedances.

    Returns ``-inf`` instead of raising when ``sigma <= 0`` or some
    ``1 + gamma * E / sigma <= 0``.
    """
    e = np.asarray(exceedances, dtype=float)
    if not sigma > 0:
        return -np.inf
    m = e.size
    if abs(gamma) < _GAMMA_ZERO:
        return float(-m * np.log(sigma) - e.sum() / sigma)
    t = 1.0 + gamma * e / sigma
    if np.any(t <= 0):
        return -np.inf
    return float(-m * np.log(sigma) - (1.0 / gamma + 1.0) * np.log(t).sum())


def _gamma_of_theta(e, theta):
    return float(np.mean(np.log1p(theta * e)))


def _profile(e, theta):
    """Profile log-likelihood at ``theta`` together with (gamma, sigma)."""
    m = e.size
    if abs(theta) < _THETA_ZERO:
        sigma = float(e.mean())
        return -m * (np.log(sigma) + 1.0), 0.0, sigma
    gamma = _gamma_of_theta(e, theta)
    if gamma == 0.0:
        sigma = float(e.mean())
        return gpd_loglik(e, 0.0, sigma), 0.0, sigma
    sigma = gamma / theta
    if not sigma > 0 or not np.isfinite(sigma):
        return -np.inf, gamma, sigma
    return -m * (np.log(sigma) + gamma + 1.0), gamma, sigma


def _profile_grid(e, thetas):
    """Vectorized profile log-likelihood over a grid of theta values."""
    m = e.size
    nonzero = thetas != 0.0
    gammas = np.mean(np.log1p(np.outer(thetas[nonzero], e)), axis=1)
    out = np.empty(thetas.size)
    out[~nonzero] = -m * (np.log(e.mean()) + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigmas = gammas / thetas[nonzero]
        vals = -m * (np.log(sigmas) + gammas + 1.0)
    vals[~(sigmas > 0) | ~np.isfinite(vals)] = -np.inf
    out[nonzero] = vals
    return out


def _theta_for_gamma(e, target, lo, hi):
    return optimize.brentq(lambda th: _gamma_of_theta(e, th) - target, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _theta_box(e):
    """theta interval on which gamma(theta) stays inside [GAMMA_FLOOR, GAMMA_CEIL]."""
    e_max = float(e.max())
    support = -(1.0 - 1e-8) / e_max
    if _gamma_of_theta(e, support) >= GAMMA_FLOOR:
        lo = support
    else:
        lo = _theta_for_gamma(e, GAMMA_FLOOR, support, 0.0)
    hi_bracket = 1.0 / float(e.min())
    while _gamma_of_theta(e, hi_bracket) < GAMMA_CEIL:
        hi_bracket *= 10.0
    hi = _theta_for_gamma(e, GAMMA_CEIL, 0.0, hi_bracket)
    return lo, hi


def _fit_fixed_gamma(e, gamma):
    if abs(gamma) < _GAMMA_ZERO:
        sigma = float(e.mean())
        return GpdFit(0.0, sigma, gpd_loglik(e, 0.0, sigma), True, 0)
    lower = max(-gamma * float(e.max()), 0.0) * (1 + 1e-12) + 1e-300
    res = optimize.minimize_scalar(
        lambda ls: -gpd_loglik(e, gamma, lower + np.exp(ls)),
        bracket=(np.log(e.mean()) - 1.0, np.log(e.mean()) + 1.0),
    )
    sigma = lower + float(np.exp(res.x))
    return GpdFit(float(gamma), sigma, gpd_loglik(e, gamma, sigma), bool(res.success), int(res.nit))


def gpd_fit_ml(exceedances, fixed_gamma=None):
    """Maximum-likelihood GPD fit with ``gamma`` restricted to ``(-0.5, 5]``.

    Parameters
    ----------
    exceedances : array_like
        Positive exceedances over a threshold; at least two distinct values.
    fixed_gamma : float, optional
        Hold the shape at this value and maximize over the scale only.

    Returns
    -------
    GpdFit
        ``converged`` is False when the optimum sits on the edge of the
        search box or the refinement step failed; the best point found is
        returned regardless.
    """
    e = np.asarray(exceedances, dtype=float).reshape(-1)
    if e.size == 0 or np.any(~np.isfinite(e)) or np.any(e < 0):
        raise TailDomainError("exceedances must be finite and nonnegative")
    if np.unique(e[e > 0]).size < 2:
        raise TailDomainError("GPD fit needs at least 2 distinct positive exceedances")
    if fixed_gamma is not None:
        return _fit_fixed_gamma(e, float(fixed_gamma))

    lo, hi = _theta_box(e)
    scale = 1.0 / float(e.mean())
    half = _SCAN_POINTS // 2
    neg_top = min(-lo, scale)
    grid = np.concatenate((
        lo * np.geomspace(1.0, 1e-8 * neg_top / -lo, half) if lo < 0 else [],
        [0.0],
        np.geomspace(1e-8 * min(hi, scale), hi, half),
    ))
    prof = _profile_grid(e, grid)
    best = int(np.nanargmax(prof))
    iterations = 0
    converged = True
    if best == 0 or best == grid.size - 1:
        theta = float(grid[best])
        converged = False
    else:
        a, b, c = grid[best - 1], grid[best], grid[best + 1]
        try:
            res = optimize.minimize_scalar(
                lambda th: -_profile(e, th)[0],
                bracket=(a, b, c),
                method="golden",
                options={"xtol": 1e-12},
            )
            theta = float(res.x)
            iterations = int(res.nit)
            if not (res.success and -res.fun >= prof[best]):
                theta = float(grid[best])
                converged = False
        except (ValueError, RuntimeError):
            theta = float(grid[best])
            converged = False
    _, gamma, sigma = _profile(e, theta)
    loglik = gpd_loglik(e, gamma, sigma)
    if gamma <= GAMMA_FLOOR + 1e-9 or gamma >= GAMMA_CEIL - 1e-9:
        converged = False
    return GpdFit(float(gamma), float(sigma), float(loglik), converged, iterations)
