"""Limiting laws of the censoring-adapted index estimators.

``sqrt(k) * (gamma_c - gamma1)`` is asymptotically normal. This module holds
the case classification of (gamma1, gamma2), the closed-form variances and
bias means of the four estimators, the second-order auxiliary quantities
``b(x)`` and ``rho_tilde``, and Wald intervals built from those variances.

Notation: ``gamma1`` and ``gamma2`` are the indices of the lifetime and
censoring distributions, ``gamma`` the index of the observed minimum and
``p = gamma2 / (gamma1 + gamma2)`` the limiting uncensored fraction.
"""

import enum
import math
from dataclasses import dataclass
from typing import Callable

from scipy.special import ndtri

from .estimators import EstimatorKind
from .exceptions import UnsupportedCaseError


class TailCase(enum.IntEnum):
    """Both indices positive (1), both negative with a shared endpoint (2), both zero (3)."""

    CASE1 = 1
    CASE2 = 2
    CASE3 = 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().removeprefix("case")
        try:
            return cls(int(text))
        except ValueError:
            raise UnsupportedCaseError(f"unknown case {value!r}; expected 1, 2 or 3") from None


@dataclass(frozen=True)
class SecondOrderParams:
    """Second-order parameters of the tail quantile function of the observed times.

    ``l2`` is only needed in the ``gamma == -rho`` branch of :func:`b_function`.
    """

    gamma: float
    rho: float
    a_coeff: float
    ell_plus: float = 1.0
    d_shift: float = 0.0
    tau_h: float = math.inf
    l2: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.rho > 0:
            raise ValueError(f"rho must be <= 0, got {self.rho}")
        if not self.ell_plus > 0:
            raise ValueError(f"ell_plus must be positive, got {self.ell_plus}")
        if self.a_coeff == 0:
            raise ValueError("a_coeff must be nonzero")


@dataclass(frozen=True)
class AsymptoticLaw:
    mean: float
    variance: float
    kind: EstimatorKind
    case: TailCase


_EXCLUDED = "outside the three supported cases (both indices positive, both negative with equal endpoints, both zero)"


def classify_case(gamma1, gamma2, endpoints_equal=None):
    if gamma1 > 0 and gamma2 > 0:
        return TailCase.CASE1
    if gamma1 < 0 and gamma2 < 0:
        if endpoints_equal:
            return TailCase.CASE2
        raise UnsupportedCaseError(f"(gamma1={gamma1}, gamma2={gamma2}) with unequal endpoints is {_EXCLUDED}")
    if gamma1 == 0 and gamma2 == 0:
        return TailCase.CASE3
    raise UnsupportedCaseError(f"(gamma1={gamma1}, gamma2={gamma2}) is {_EXCLUDED}")


def combined_index(gamma1, gamma2, case):
    """Index of the observed minimum: ``gamma1*gamma2/(gamma1+gamma2)``, 0 in case 3."""
    if TailCase.parse(case) is TailCase.CASE3:
        return 0.0
    return gamma1 * gamma2 / (gamma1 + gamma2)


def limit_p(gamma1, gamma2, case, p=None):
    """``gamma2 / (gamma1 + gamma2)``; in case 3 the caller must supply ``p``."""
    if TailCase.parse(case) is TailCase.CASE3:
        if p is None:
            raise UnsupportedCaseError("case 3 has no closed-form p; supply it explicitly")
        return _check_p(p)
    return gamma2 / (gamma1 + gamma2)


def _check_p(p):
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return p


def variance_from_theorem(sigma2_uncensored, gamma1, p):
    """``(sigma2 + gamma1**2 * p * (1 - p)) / p**2``."""
    p = _check_p(p)
    if sigma2_uncensored < 0:
        raise ValueError("sigma2_uncensored must be nonnegative")
    return (sigma2_uncensored + gamma1 * gamma1 * p * (1.0 - p)) / (p * p)


def variance_censored(kind, case, gamma1, gamma, p=None):
    """Closed-form asymptotic variance of ``sqrt(k)(gamma_c - gamma1)``.

    In cases 1 and 2 ``p`` defaults to ``gamma / gamma1``; case 3 needs it.
    """
    kind = EstimatorKind.parse(kind)
    case = TailCase.parse(case)
    if case is TailCase.CASE3:
        if p is None:
            raise UnsupportedCaseError("case 3 variance needs p")
        p = _check_p(p)
    elif p is None:
        p = gamma / gamma1

    if kind is EstimatorKind.HILL:
        if case is not TailCase.CASE1:
            raise UnsupportedCaseError("the Hill estimator is only covered in case 1")
        return gamma1**3 / gamma
    if kind is EstimatorKind.ML:
        if gamma <= -0.5:
            raise UnsupportedCaseError(f"the ML estimator needs gamma > -1/2, got {gamma}")
        return (1.0 + gamma * (2.0 + gamma1)) / (p * p)
    if case is TailCase.CASE3:
        return 1.0 / (p * p)
    g1sq = gamma1 * gamma1
    if case is TailCase.CASE1:
        return g1sq / (gamma * gamma) * (1.0 + gamma1 * gamma)
    censor_part = g1sq * (gamma1 / gamma - 1.0)
    if kind is EstimatorKind.MOMENT:
        g = gamma
        return (
            g1sq * (1 - g) ** 2 * (1 - 2 * g) * (1 - g + 6 * g * g)
            / (g * g * (1 - 4 * g) * (1 - 3 * g))
            + censor_part
        )
    g = gamma
    return g1sq * (1 - g) * (1 + g + 2 * g * g) / (g * g * (1 - 2 * g)) + censor_part


def uncensored_variance(kind, case, gamma):
    """Variance of ``sqrt(k)(gamma_hat - gamma)`` for the Z-sample estimator."""
    kind = EstimatorKind.parse(kind)
    case = TailCase.parse(case)
    g = gamma
    if kind is EstimatorKind.HILL:
        if case is not TailCase.CASE1:
            raise UnsupportedCaseError("the Hill estimator is only covered in case 1")
        return g * g
    if kind is EstimatorKind.ML:
        return (1 + g) ** 2
    if case is TailCase.CASE3:
        return 1.0
    if case is TailCase.CASE1:
        return 1 + g * g
    if kind is EstimatorKind.MOMENT:
        return (1 - g) ** 2 * (1 - 2 * g) * (1 - g + 6 * g * g) / ((1 - 4 * g) * (1 - 3 * g))
    return (1 - g) * (1 + g + 2 * g * g) / (1 - 2 * g)


def bias_mu(kind, case, alpha1, alpha2, p, gamma1=0.0, gamma=0.0, rho_tilde=None,
            rho=None, a_coeff=None, ell_plus=None, tau_h=None):
    """Asymptotic mean of ``sqrt(k)(gamma_c - gamma1)``.

    ``alpha1`` is the limit of ``sqrt(k) b(n/k)`` (``sqrt(k) a2(n/k)`` for ML)
    and ``alpha2`` the limit of the scaled deviation of ``p(z)`` from ``p``.
    Branch-specific inputs: ``rho_tilde`` for Hill/UH and the moment
    estimator outside case 3, ``rho`` for ML and the case-2 moment branches,
    and ``a_coeff``, ``ell_plus``, ``tau_h`` for ML and the case-2
    ``rho == gamma`` moment branch.
    """
    kind = EstimatorKind.parse(kind)
    case = TailCase.parse(case)
    p = _check_p(p)
    censoring = -gamma1 * alpha2 / p
    if kind is EstimatorKind.HILL and case is not TailCase.CASE1:
        raise UnsupportedCaseError("the Hill estimator is only covered in case 1")
    if alpha1 == 0:
        return censoring + 0.0

    def need(**values):
        missing = [name for name, v in values.items() if v is None]
        if missing:
            raise UnsupportedCaseError(
                f"{kind.value} bias in case {int(case)} needs {', '.join(missing)}"
            )

    if kind is EstimatorKind.HILL:
        if case is not TailCase.CASE1:
            raise UnsupportedCaseError("the Hill estimator is only covered in case 1")
        need(rho_tilde=rho_tilde)
        factor = gamma / (rho_tilde + gamma * (1 - rho_tilde))
    elif kind is EstimatorKind.UH:
        need(rho_tilde=rho_tilde)
        factor = 1.0 / (1 - rho_tilde)
    elif kind is EstimatorKind.ML:
        need(rho=rho, a_coeff=a_coeff)
        factor = rho * (gamma + 1) * a_coeff / ((1 - rho) * (1 - rho + gamma))
    elif case is TailCase.CASE1:
        need(rho_tilde=rho_tilde)
        factor = 1.0 / (1 - rho_tilde)
    elif case is TailCase.CASE3:
        factor = 1.0
    else:
        need(rho=rho)
        g = gamma
        if rho < g:
            need(rho_tilde=rho_tilde)
            factor = (2 * g - 1) / (rho_tilde * (1 - rho_tilde))
        elif rho == g:
            need(a_coeff=a_coeff, ell_plus=ell_plus, tau_h=tau_h)
            ratio = ell_plus / tau_h
            denom = a_coeff * (1 - g) - ratio
            if denom == 0:
                raise UnsupportedCaseError(
                    "moment bias undefined: A(1-gamma) - ell_plus/tau_H vanishes"
                )
            factor = (1 - 2 * g) / ((1 - g) * (1 - 3 * g)) * (
                a_coeff * (1 - g) ** 2 - (g + 1) * ratio
            ) / denom
        else:
            need(rho_tilde=rho_tilde)
            factor = (1 - 2 * g) / (1 - 2 * g - rho_tilde)
    return censoring + alpha1 / p * factor


def asymptotic_law(kind, case, gamma1, gamma, p=None, alpha1=0.0, alpha2=0.0, **extras):
    """Bundle :func:`bias_mu` and :func:`variance_censored` for one estimator."""
    kind = EstimatorKind.parse(kind)
    case = TailCase.parse(case)
    if p is None:
        if case is TailCase.CASE3:
            raise UnsupportedCaseError("case 3 needs p")
        p = gamma / gamma1
    variance = variance_censored(kind, case, gamma1, gamma, p)
    mean = bias_mu(kind, case, alpha1, alpha2, p, gamma1=gamma1, gamma=gamma, **extras)
    return AsymptoticLaw(mean, variance, kind, case)


def rho_tilde(gamma, rho, d_shift=None):
    """Effective second-order parameter entering the bias of the Z-sample estimators."""
    if rho > 0:
        raise ValueError(f"rho must be <= 0, got {rho}")
    if 0 < gamma < -rho:
        if d_shift is None:
            raise UnsupportedCaseError("0 < gamma < -rho: the value depends on D; supply d_shift")
        return -gamma if d_shift != 0 else rho
    if -rho <= gamma or gamma < rho:
        return rho
    return gamma


class BBranch(enum.IntEnum):
    """Branches of the auxiliary bias function ``b(x)``, in display order."""

    HEAVY = 1
    GAMMA_EQ_MINUS_RHO = 2
    SHIFTED = 3
    LIGHT = 4
    GAMMA_BELOW_RHO = 5
    RHO_BELOW_GAMMA = 6
    GAMMA_EQ_RHO = 7


def select_b_branch(gamma, rho, d_shift=0.0):
    """The unique branch of ``b(x)`` whose domain contains ``(gamma, rho, D)``.

    Requires ``rho < 0`` unless ``gamma == 0``.
    """
    if gamma == 0:
        return BBranch.LIGHT
    if not rho < 0:
        raise UnsupportedCaseError(f"b(x) needs rho < 0 when gamma != 0, got rho={rho}")
    if gamma > 0:
        if -rho < gamma:
            return BBranch.HEAVY
        if gamma == -rho:
            return BBranch.GAMMA_EQ_MINUS_RHO
        return BBranch.SHIFTED if d_shift != 0 else BBranch.HEAVY
    if gamma < rho:
        return BBranch.GAMMA_BELOW_RHO
    if gamma == rho:
        return BBranch.GAMMA_EQ_RHO
    return BBranch.RHO_BELOW_GAMMA


def _branch_admits(branch, gamma, rho, d_shift):
    try:
        return select_b_branch(gamma, rho, d_shift) is branch
    except UnsupportedCaseError:
        return False


def b_function(x, params, branch=None):
    """Auxiliary bias function ``b(x)``, with ``a2(x) = x**rho``.

    ``branch`` defaults to :func:`select_b_branch`; an explicit branch is
    checked against the parameters. The ``gamma == 0`` branch is ``1/log(x)**2``
    with no scale factor.
    """
    g, r, a = params.gamma, params.rho, params.a_coeff
    d = params.d_shift
    if branch is None:
        branch = select_b_branch(g, r, d)
    else:
        branch = BBranch(branch)
        if not _branch_admits(branch, g, r, d):
            raise UnsupportedCaseError(
                f"branch {branch.name} does not apply to gamma={g}, rho={r}, D={d}"
            )
    x = float(x)
    if branch is BBranch.HEAVY:
        return a * r * (r + g * (1 - r)) / ((g + r) * (1 - r)) * x**r
    if branch is BBranch.GAMMA_EQ_MINUS_RHO:
        if params.l2 is None:
            raise UnsupportedCaseError("the gamma == -rho branch needs a caller-supplied L2")
        return -(g**3) / (1 + g) * x ** (-g) * params.l2(x)
    if branch is BBranch.SHIFTED:
        return -(g**3) * d / (1 + g) * x ** (-g)
    if branch is BBranch.LIGHT:
        return 1.0 / math.log(x) ** 2
    if branch is BBranch.GAMMA_BELOW_RHO:
        return a * r * (1 - g) / (1 - g - r) * x**r
    ratio = params.ell_plus / params.tau_h
    if branch is BBranch.RHO_BELOW_GAMMA:
        return -g / (1 - 2 * g) * ratio * x**g
    return g / (1 - 2 * g) * (a * (1 - g) - ratio) * x**g


def normal_quantile(q):
    return float(ndtri(q))


def confidence_interval(gamma_adapted, k, variance, level=0.95):
    """Wald interval ``gamma_c -/+ z * sqrt(variance / k)``; the bias is not removed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not variance > 0:
        raise ValueError("variance must be positive")
    if not 0.0 <= level < 1.0:
        raise ValueError("level must lie in [0, 1)")
    half = normal_quantile((1.0 + level) / 2.0) * math.sqrt(variance / k)
    return gamma_adapted - half, gamma_adapted + half
