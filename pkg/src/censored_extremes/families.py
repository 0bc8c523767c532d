"""Closed-form lifetime/censoring models used as simulation ground truth.

Three pairs are supported, one per tail case: Burr censored by Burr (both
indices positive), reverse Burr censored by reverse Burr with a shared right
endpoint (both negative) and logistic censored by logistic (both zero). Each
model exposes survival, cdf, density and quantile functions, vectorized over
numpy arrays.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .asymptotics import TailCase
from .estimators import EstimatorKind
from .exceptions import CensoredExtremesError, TailDomainError, UnsupportedCaseError
from .sample import CensoredSample

GENERATOR_ID = "numpy.random.Philox(4x64-10, key=seed+2**64*stream).random/inverse-cdf"


def _check_positive(**values):
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise CensoredExtremesError(f"{name} must be positive and finite, got {v!r}")


def _unit_quantile_arg(u):
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)) or np.any(np.isnan(u)):
        raise TailDomainError("quantile level must lie in [0, 1)")
    return u


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Burr:
    """``1 - F(x) = (beta / (beta + x**tau))**lam`` on ``x > 0``."""

    beta: float
    tau: float
    lam: float

    def __post_init__(self):
        _check_positive(beta=self.beta, tau=self.tau, lam=self.lam)

    @property
    def family(self):
        return "burr"

    def survival(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _scalar(np.exp(-self.lam * np.log1p(x**self.tau / self.beta)))

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _scalar(-np.expm1(-self.lam * np.log1p(x**self.tau / self.beta)))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.where(x > 0, x, 1.0)
        b, t, lam = self.beta, self.tau, self.lam
        f = lam * t * b**lam * xp ** (t - 1) * (b + xp**t) ** (-lam - 1)
        return _scalar(np.where(x > 0, f, 0.0))

    def quantile(self, u):
        u = _unit_quantile_arg(u)
        inner = self.beta * np.expm1(-np.log1p(-u) / self.lam)
        return _scalar(inner ** (1.0 / self.tau))

    def to_dict(self):
        return {"family": "burr", "beta": self.beta, "tau": self.tau, "lambda": self.lam}


@dataclass(frozen=True)
class ReverseBurr:
    """``1 - F(x) = (beta / (beta + (x_plus - x)**(-tau)))**lam`` on ``x < x_plus``."""

    beta: float
    tau: float
    lam: float
    x_plus: float

    def __post_init__(self):
        _check_positive(beta=self.beta, tau=self.tau, lam=self.lam, x_plus=self.x_plus)

    @property
    def family(self):
        return "reverse_burr"

    def _gap(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x >= self.x_plus):
            raise TailDomainError(f"reverse Burr argument must be below x_plus={self.x_plus}")
        return self.x_plus - x

    def survival(self, x):
        w = self._gap(x) ** (-self.tau)
        return _scalar(np.exp(-self.lam * np.log1p(w / self.beta)))

    def cdf(self, x):
        w = self._gap(x) ** (-self.tau)
        return _scalar(-np.expm1(-self.lam * np.log1p(w / self.beta)))

    def density(self, x):
        gap = self._gap(x)
        b, t, lam = self.beta, self.tau, self.lam
        w = gap ** (-t)
        return _scalar(lam * t * b**lam * gap ** (-t - 1) * (b + w) ** (-lam - 1))

    def quantile(self, u):
        u = _unit_quantile_arg(u)
        inner = self.beta * np.expm1(-np.log1p(-u) / self.lam)
        with np.errstate(divide="ignore"):
            return _scalar(self.x_plus - inner ** (-1.0 / self.tau))

    def to_dict(self):
        return {"family": "reverse_burr", "beta": self.beta, "tau": self.tau,
                "lambda": self.lam, "x_plus": self.x_plus}


@dataclass(frozen=True)
class Logistic:
    """``1 - F(x) = 2 / (1 + exp(x))`` on ``x > 0``: the positive half of a logistic law."""

    @property
    def family(self):
        return "logistic"

    def survival(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _scalar(2.0 * expit(-x))

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _scalar(np.tanh(x / 2.0))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar(np.where(x > 0, 2.0 * expit(x) * expit(-x), 0.0))

    def quantile(self, u):
        u = _unit_quantile_arg(u)
        return _scalar(np.log1p(u) - np.log1p(-u))

    def to_dict(self):
        return {"family": "logistic"}


_FAMILIES = {"burr": Burr, "reverse_burr": ReverseBurr, "logistic": Logistic}


def model_from_dict(spec):
    """Inverse of ``to_dict``: ``{"family": "burr", "beta": ..., "tau": ..., "lambda": ...}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise CensoredExtremesError(f"model spec must be an object with a 'family' key, got {spec!r}")
    family = str(spec["family"]).lower().replace("-", "_").replace(" ", "_")
    if family not in _FAMILIES:
        raise CensoredExtremesError(f"unknown family {spec['family']!r}; expected one of {sorted(_FAMILIES)}")
    params = {k: v for k, v in spec.items() if k != "family"}
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return _FAMILIES[family](**params)
    except TypeError as exc:
        raise CensoredExtremesError(f"bad parameters for {family}: {exc}") from None


@dataclass(frozen=True)
class FamilyPair:
    """Lifetime model ``f_spec`` censored by ``g_spec`` (same family)."""

    f_spec: object
    g_spec: object

    def __post_init__(self):
        if type(self.f_spec) is not type(self.g_spec):
            raise UnsupportedCaseError(
                f"lifetime and censoring models must share a family, got "
                f"{self.f_spec.family} and {self.g_spec.family}; only the three cases "
                f"(both indices positive, both negative with a shared endpoint, both zero) are covered"
            )
        if isinstance(self.f_spec, ReverseBurr) and self.f_spec.x_plus != self.g_spec.x_plus:
            raise UnsupportedCaseError("reverse Burr pairs must share the right endpoint x_plus")

    @property
    def family(self):
        return self.f_spec.family

    def to_dict(self):
        return {"f": self.f_spec.to_dict(), "g": self.g_spec.to_dict()}

    @classmethod
    def from_dict(cls, spec):
        if not isinstance(spec, dict) or "f" not in spec or "g" not in spec:
            raise CensoredExtremesError("pair spec must be an object with 'f' and 'g' keys")
        return cls(model_from_dict(spec["f"]), model_from_dict(spec["g"]))


@dataclass(frozen=True)
class TruthValues:
    """Exact tail parameters of a model pair.

    ``tau_min``, ``eta`` and ``beta_coeff`` are the coefficients of the
    leading correction terms of the Burr-type pairs; they and ``rho`` are
    None for the logistic pair.
    """

    gamma1: float
    gamma2: float
    gamma: float
    rho: float | None
    tau_min: float | None
    eta: float | None
    beta_coeff: float | None
    p: float
    case: TailCase

    def to_dict(self):
        return {
            "case": int(self.case), "gamma1": self.gamma1, "gamma2": self.gamma2,
            "gamma": self.gamma, "rho": self.rho, "tau_min": self.tau_min,
            "eta": self.eta, "beta_coeff": self.beta_coeff, "p": self.p,
        }


def _eta_beta(f, g):
    if f.tau < g.tau:
        return f.lam * f.beta, -f.beta
    if f.tau > g.tau:
        return g.lam * g.beta, g.beta
    return f.lam * f.beta + g.lam * g.beta, g.beta - f.beta


def truth_values(pair):
    f, g = pair.f_spec, pair.g_spec
    if isinstance(f, Logistic):
        return TruthValues(0.0, 0.0, 0.0, None, None, None, None, 0.5, TailCase.CASE3)
    sign = 1.0 if isinstance(f, Burr) else -1.0
    gamma1 = sign / (f.lam * f.tau)
    gamma2 = sign / (g.lam * g.tau)
    gamma = sign / (f.lam * f.tau + g.lam * g.tau)
    tau = min(f.tau, g.tau)
    rho = -abs(gamma) * tau
    eta, beta_coeff = _eta_beta(f, g)
    p = gamma2 / (gamma1 + gamma2)
    case = TailCase.CASE1 if sign > 0 else TailCase.CASE2
    return TruthValues(gamma1, gamma2, gamma, rho, tau, eta, beta_coeff, p, case)


def true_quantile(pair, eps):
    """``F^{-1}(1 - eps)`` of the lifetime model."""
    return float(pair.f_spec.quantile(1.0 - eps))


def p_of_z(pair, z):
    """``P(delta = 1 | Z = z)`` from the closed-form densities."""
    f, g = pair.f_spec, pair.g_spec
    num = g.survival(z) * f.density(z)
    other = f.survival(z) * g.density(z)
    den = np.asarray(num + other)
    if np.any(den <= 0):
        raise TailDomainError("p(z) undefined outside the common support")
    return _scalar(num / den)


def uniform_stream(seed, stream=0):
    """Counter-based generator keyed by ``(seed, stream)``; platform independent."""
    seed = int(seed)
    stream = int(stream)
    if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
        raise CensoredExtremesError("seed and stream must be unsigned 64-bit integers")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


def sample_censored(pair, n, seed, stream=0):
    """Draw ``n`` pairs ``(min(X, Y), 1{X <= Y})`` by inverse-cdf sampling.

    Two uniforms are consumed per observation: column 0 drives ``X`` and
    column 1 drives ``Y``.
    """
    if n < 1:
        raise CensoredExtremesError("n must be >= 1")
    u = uniform_stream(seed, stream).random((int(n), 2))
    x = np.asarray(pair.f_spec.quantile(u[:, 0]), dtype=float)
    y = np.asarray(pair.g_spec.quantile(u[:, 1]), dtype=float)
    return CensoredSample(np.minimum(x, y), (x <= y).astype(np.int8))


class BiasTerms(NamedTuple):
    """Asymptotic-equivalent bias terms at ``(n, k)``.

    ``gamma_term`` approximates the bias of ``sqrt(k)(gamma_hat - gamma)`` of
    the Z-sample estimator, ``alpha2_term`` the scaled deviation of ``p(z)``
    from its limit. ``caveat`` flags an ``alpha2_term`` set to 0 only because
    the closed form does not cover equal censoring and lifetime tails.
    """

    gamma_term: float
    alpha2_term: float
    caveat: bool = False


def theoretical_bias_example(pair, kind, n, k):
    kind = EstimatorKind.parse(kind)
    truth = truth_values(pair)
    f, g = pair.f_spec, pair.g_spec
    root_k = math.sqrt(k)
    if isinstance(f, Logistic):
        if kind in (EstimatorKind.MOMENT, EstimatorKind.UH):
            return BiasTerms(root_k / math.log(n / k) ** 2, 0.0)
        if kind is EstimatorKind.ML:
            return BiasTerms(-(1.0 / 9.0) * k / math.sqrt(n), 0.0)
        raise UnsupportedCaseError("the Hill estimator is only covered when both indices are positive")

    gm, rho, tau, eta = truth.gamma, truth.rho, truth.tau_min, truth.eta
    c = f.beta**f.lam * g.beta**g.lam
    order_rho = c**rho * root_k * (n / k) ** rho

    caveat = f.tau == g.tau and f.beta == g.beta
    if caveat:
        alpha2 = 0.0
    else:
        alpha2 = (truth.beta_coeff * gm * gm / (truth.gamma1 * truth.gamma2)
                  * order_rho / (1 - rho))

    if isinstance(f, Burr):
        if kind is EstimatorKind.HILL:
            factor = gm * rho / (1 - rho)
        elif kind is EstimatorKind.ML:
            factor = rho * (1 + gm) * (gm + rho) / ((1 - rho) * (1 - rho + gm))
        else:
            factor = rho * (rho + gm * (1 - rho)) / (1 - rho) ** 2
        return BiasTerms(-eta * order_rho * factor, alpha2, caveat)

    xp = f.x_plus
    order_gamma = c**gm * root_k * (n / k) ** gm
    if kind is EstimatorKind.HILL:
        raise UnsupportedCaseError("the Hill estimator is only covered when both indices are positive")
    if kind is EstimatorKind.ML:
        if not gm > -0.5:
            raise UnsupportedCaseError("the ML bias needs gamma > -1/2")
        value = (-gm * gm * tau * (1 + gm) * (1 + tau) / ((1 - gm * tau) * (1 + gm - gm * tau))
                 * eta * order_rho)
    elif kind is EstimatorKind.UH:
        if tau < 1:
            value = (-gm * gm * tau * (1 - gm) * (1 + tau) / ((1 - gm - gm * tau) * (1 - gm * tau))
                     * eta * order_rho)
        elif tau == 1:
            value = gm * gm / ((1 - gm) * (1 - 2 * gm)) * (-2 * eta * (1 - gm) + 1 / xp) * order_rho
        else:
            value = gm * gm / ((1 - gm) * (1 - 2 * gm) * xp) * order_gamma
    else:
        if tau < 1:
            value = (-gm * gm * tau * (1 - gm) * (1 + tau) * (1 - 2 * gm)
                     / ((1 - gm - gm * tau) * (1 - 2 * gm - gm * tau)) * eta * order_rho)
        elif tau == 1:
            value = (-gm * gm / ((1 - gm) * (1 - 3 * gm))
                     * (2 * eta * (1 - gm) ** 2 - (gm + 1) / xp) * order_rho)
        else:
            value = -gm / ((1 - gm) * xp) * order_gamma
    return BiasTerms(value, alpha2, caveat)


def bias_overlay(pair, kind, n, k):
    """Predicted mean of ``sqrt(k)(gamma_c - gamma1)``: ``(gamma_term - gamma1 * alpha2_term) / p``."""
    truth = truth_values(pair)
    terms = theoretical_bias_example(pair, kind, n, k)
    return (terms.gamma_term - truth.gamma1 * terms.alpha2_term) / truth.p


BURR_EXAMPLE = FamilyPair(Burr(10.0, 4.0, 1.0), Burr(10.0, 1.0, 0.5))
REVERSE_BURR_EXAMPLE = FamilyPair(ReverseBurr(1.0, 8.0, 0.5, 10.0), ReverseBurr(10.0, 1.0, 0.5, 10.0))
LOGISTIC_EXAMPLE = FamilyPair(Logistic(), Logistic())
