"""Parameters, regime classification and closed-form laws of a typical cluster.

A cluster starts from one contagious individual. Every contagious
individual contaminates at rate ``gamma`` (traceably with probability
``p``) and is detected at rate ``delta``; detection isolates the whole
cluster. The cluster size is then a Yule process of rate
``rho = delta + p * gamma`` killed at an independent geometric level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

#: Default truncation tolerance for geometric tails.
TAIL_EPS = 1e-12


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


class DegenerateDeltaError(ValueError):
    """Raised when a quantity is undefined (infinite) for ``delta == 0``."""


@dataclass(frozen=True)
class DerivedRates:
    rho: float
    iso_success: float
    offspring_success: float


@dataclass(frozen=True)
class Parameters:
    gamma: float
    p: float
    delta: float
    rates: DerivedRates = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rho = self.delta + self.p * self.gamma
        iso = self.delta / rho if rho > 0 else 1.0
        denom = (1.0 - self.p) * self.gamma + self.delta
        off = self.delta / denom if denom > 0 else 1.0
        object.__setattr__(self, "rates", DerivedRates(rho, iso, off))

    @property
    def rho(self) -> float:
        return self.rates.rho

    @property
    def degenerate(self) -> bool:
        """True in the detection-free (Yule-Simon) mode ``delta == 0``."""
        return self.delta == 0.0

    @property
    def growth_q(self) -> float:
        """Probability ``1 - delta/rho`` that a jump of a cluster is a growth step."""
        return 1.0 - self.rates.iso_success

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "p": self.p, "delta": self.delta}


def validate(gamma: float, p: float, delta: float, detection_free: bool = False) -> Parameters:
    """Check raw inputs and return :class:`Parameters`.

    ``delta == 0`` is accepted only with ``detection_free=True``; the
    returned object then has ``degenerate`` set and every operation that
    divides by ``delta`` either routes to its detection-free formula or
    raises :class:`DegenerateDeltaError`.
    """
    for name, v in (("gamma", gamma), ("p", p), ("delta", delta)):
        if not isinstance(v, (int, float, np.floating, np.integer)) or isinstance(v, bool):
            raise TypeError(f"{name} must be a real number, got {v!r}")
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if delta == 0 and not detection_free:
        raise DegenerateDeltaError("delta = 0 needs detection_free=True")
    return Parameters(float(gamma), float(p), float(delta))


def regime(params: Parameters) -> Regime:
    untraceable = (1.0 - params.p) * params.gamma
    if math.isclose(params.delta, untraceable, rel_tol=1e-12, abs_tol=0.0):
        return Regime.CRITICAL
    if params.delta < untraceable:
        return Regime.SUPERCRITICAL
    return Regime.SUBCRITICAL


def _require_delta(params: Parameters, what: str) -> None:
    if params.degenerate:
        raise DegenerateDeltaError(f"{what} is undefined for delta = 0")


def _check_t(t: float) -> None:
    if not t >= 0:
        raise ValueError(f"time must be >= 0, got {t}")


def _check_k(k, lo: int = 1) -> np.ndarray:
    arr = np.asarray(k)
    if np.any(arr < lo):
        raise ValueError(f"size index must be >= {lo}, got {k}")
    return arr


def tail_cutoff(params: Parameters, eps: float = TAIL_EPS) -> int:
    """Smallest ``K`` with ``q**K / (delta/rho) < eps``, ``q = 1 - delta/rho``.

    Every series over cluster sizes in this package is dominated by the
    geometric law of the final size, so this ``K`` bounds the discarded mass.
    """
    _require_delta(params, "the geometric tail cutoff")
    s = params.rates.iso_success
    q = params.growth_q
    if q <= 0.0:
        return 1
    # q**K < eps * s
    k = math.ceil(math.log(eps * s) / math.log(q))
    k = max(k, 1)
    while q**k / s >= eps:
        k += 1
    while k > 1 and q ** (k - 1) / s < eps:
        k -= 1
    return k


def typical_size_pmf(params: Parameters, t: float, k):
    """``P(C(t) = k)`` for ``k >= 1``: geometric in ``k`` at every fixed ``t``."""
    _check_t(t)
    k = _check_k(k)
    rho = params.rho
    grow = -math.expm1(-rho * t)
    logp = xlogy(k - 1, params.growth_q) + xlogy(k - 1, grow) - rho * t
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def isolation_cdf(params: Parameters, t: float) -> float:
    """``P(zeta <= t)``, the law of the isolation age of a typical cluster."""
    _check_t(t)
    rho, delta = params.rho, params.delta
    if rho == 0.0:
        return 0.0
    surv = math.exp(-rho * t)
    grow = -math.expm1(-rho * t)
    return delta * grow / (rho * surv + delta * grow)


def joint_final_size_cdf(params: Parameters, t: float, k):
    """``P(C(zeta-) = k, zeta <= t)``."""
    _check_t(t)
    k = _check_k(k)
    s = params.rates.iso_success
    if s == 0.0:
        out = np.zeros(np.shape(k))
        return float(out) if out.ndim == 0 else out
    grow = -math.expm1(-params.rho * t)
    logp = math.log(s) + xlogy(k - 1, params.growth_q) + xlogy(k, grow)
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def offspring_pmf(params: Parameters, k):
    """``P(Z1 = k)``, the number of clusters begotten by a typical cluster."""
    _require_delta(params, "the offspring law")
    k = _check_k(k, lo=0)
    s = params.rates.offspring_success
    out = np.exp(math.log(s) + xlogy(k, 1.0 - s))
    return float(out) if out.ndim == 0 else out


def mean_offspring(params: Parameters) -> float:
    _require_delta(params, "the mean offspring number")
    return (1.0 - params.p) * params.gamma / params.delta


def untraceable_intensity(params: Parameters, t: float) -> float:
    """Expected number of clusters begotten by a typical cluster up to age ``t``."""
    _check_t(t)
    p, gamma = params.p, params.gamma
    if params.degenerate:
        if p == 0.0:
            return gamma * t
        return (1.0 - p) / p * math.expm1(p * gamma * t)
    return mean_offspring(params) * isolation_cdf(params, t)


def extinction_probability(params: Parameters) -> float:
    untraceable = (1.0 - params.p) * params.gamma
    if params.degenerate:
        # no detection: nothing is ever isolated
        return 0.0
    if untraceable == 0.0:
        return 1.0
    return min(1.0, params.delta / untraceable)


def expected_size(params: Parameters, t: float) -> float:
    """``E(C(t))``, the mean number of contagious individuals in a typical cluster."""
    _check_t(t)
    rho, delta = params.rho, params.delta
    surv = math.exp(-rho * t)
    grow = -math.expm1(-rho * t)
    # e^{rho t} / (1 + delta (e^{rho t} - 1) / rho)^2 multiplied through by e^{-2 rho t}
    return surv / (surv + delta * grow / rho) ** 2 if rho > 0 else 1.0
