"""Lifespan bias of the dead part of a growing Poisson cohort.

Atoms ``(b, l)`` (birth time, lifespan) form a Poisson point process with
intensity ``g(b) db lambda(dl)`` on ``[0, t]``. Observing lifespans only at
death, the empirical mean of ``f(l)`` over atoms with ``b + l <= t``
converges to the ``exp(-l)``-tilted mean when ``g(b) = e^b``, but to the
plain mean ``<lambda, f>`` when ``g(b) = b^r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

#: Largest horizon accepted for exponential intensity (about 1e13 atoms).
T_CAP_EXPONENTIAL = 30.0
_GL_NODES = 8


def _identity(x):
    return x


@dataclass(frozen=True)
class LifespanSpec:
    """Lifespan law: ``point`` (``value``), ``exponential`` (``value`` = rate)
    or ``tabulated`` (inverse CDF through the points ``(u_grid, l_grid)``,
    interpolated linearly)."""

    kind: str
    value: float | None = None
    u_grid: tuple[float, ...] | None = None
    l_grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind in ("point", "exponential"):
            if self.value is None or not self.value > 0:
                raise ValueError(f"{self.kind} lifespan needs a positive value")
        elif self.kind == "tabulated":
            u = np.asarray(self.u_grid, dtype=float)
            ell = np.asarray(self.l_grid, dtype=float)
            if u.shape != ell.shape or u.size < 2:
                raise ValueError("tabulated grid needs two matching arrays of length >= 2")
            if u[0] != 0.0 or u[-1] != 1.0:
                raise ValueError("u_grid must run from 0 to 1")
            if np.any(np.diff(u) <= 0) or np.any(np.diff(ell) <= 0) or ell[0] < 0:
                raise ValueError("tabulated grid must be strictly increasing with nonnegative lifespans")
        else:
            raise ValueError(f"unknown lifespan kind {self.kind!r}")

    @classmethod
    def point(cls, ell0: float) -> "LifespanSpec":
        return cls("point", ell0)

    @classmethod
    def exponential(cls, rate: float) -> "LifespanSpec":
        return cls("exponential", rate)

    @classmethod
    def tabulated(cls, u_grid, l_grid) -> "LifespanSpec":
        return cls("tabulated", None, tuple(map(float, u_grid)), tuple(map(float, l_grid)))

    def quantile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "point":
            return np.full(u.shape, self.value)
        if self.kind == "exponential":
            return -np.log1p(-u) / self.value
        return np.interp(u, self.u_grid, self.l_grid)

    def _tilted(self, f: Callable, s: float) -> float:
        """``int f(l) e^{-s l} lambda(dl)``."""
        if self.kind == "point":
            return float(f(self.value)) * math.exp(-s * self.value)
        if self.kind == "exponential":
            r = self.value
            val, _ = integrate.quad(
                lambda x: f(x) * r * math.exp(-(r + s) * x), 0.0, math.inf, epsabs=1e-13, limit=200
            )
            return val
        return self._cells(lambda ell: np.vectorize(f, otypes=[float])(ell) * np.exp(-s * ell), 1.0)

    def _cells(self, g: Callable, u_top: float) -> float:
        """``int_0^u_top g(quantile(u)) du``, Gauss-Legendre on each linear cell."""
        u = np.asarray(self.u_grid)
        lo, hi = u[:-1], np.minimum(u[1:], u_top)
        keep = hi > lo
        lo, hi = lo[keep], hi[keep]
        x, w = np.polynomial.legendre.leggauss(_GL_NODES)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        vals = np.asarray(g(self.quantile(nodes)), dtype=float)
        return float(np.sum(half[:, None] * w[None, :] * vals))

    def partial(self, f: Callable, upper: float) -> float:
        """``int_{l <= upper} f(l) lambda(dl)``."""
        if upper <= 0:
            return 0.0
        if self.kind == "point":
            return float(f(self.value)) if self.value <= upper else 0.0
        if self.kind == "exponential":
            r = self.value
            val, _ = integrate.quad(lambda x: f(x) * r * math.exp(-r * x), 0.0, upper, epsabs=1e-13)
            return val
        u_top = float(np.interp(upper, self.l_grid, self.u_grid))
        return self._cells(lambda ell: np.vectorize(f, otypes=[float])(ell), u_top)

    def expectation(self, f: Callable = _identity) -> float:
        return self._tilted(f, 0.0)

    def lambda1_expectation(self, f: Callable = _identity) -> float:
        """Mean of ``f`` under ``e^{-l} lambda(dl)``, renormalized."""
        norm = self._tilted(lambda x: 1.0, 1.0)
        if not norm > 0:
            raise ArithmeticError("tilted normalizer vanished")
        return self._tilted(f, 1.0) / norm


def lambda1_expectation(spec: LifespanSpec, f: Callable = _identity) -> float:
    return spec.lambda1_expectation(f)


@dataclass(frozen=True)
class Intensity:
    """``exponential`` (``e^b``) or ``polynomial`` (``b^r``)."""

    kind: str = "exponential"
    r: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("exponential", "polynomial"):
            raise ValueError(f"unknown intensity {self.kind!r}")
        if self.kind == "polynomial" and not self.r > 0:
            raise ValueError("polynomial exponent must be > 0")

    def mass(self, t: float) -> float:
        if self.kind == "exponential":
            return math.expm1(t)
        return t ** (self.r + 1.0) / (self.r + 1.0)

    def births(self, u: np.ndarray, t: float) -> np.ndarray:
        """Inverse CDF of the normalized intensity on ``[0, t]``."""
        if self.kind == "exponential":
            return np.log1p(u * math.expm1(t))
        return t * u ** (1.0 / (self.r + 1.0))


EXPONENTIAL = Intensity("exponential")


@dataclass(frozen=True)
class CohortSample:
    births: np.ndarray
    lifespans: np.ndarray
    horizon: float
    intensity: Intensity

    @property
    def n(self) -> int:
        return len(self.births)


def sample_cohort(spec: LifespanSpec, intensity: Intensity, t: float, seed: int) -> CohortSample:
    """Poisson cohort on ``[0, t]``; deterministic in ``seed`` (Philox stream)."""
    if not t > 0:
        raise ValueError(f"horizon must be > 0, got {t}")
    if intensity.kind == "exponential" and t > T_CAP_EXPONENTIAL:
        raise ValueError(f"horizon {t} exceeds the cap {T_CAP_EXPONENTIAL} for exponential growth")
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(rng.poisson(intensity.mass(t)))
    births = intensity.births(rng.random(n), t)
    lifespans = spec.quantile(rng.random(n))
    return CohortSample(births, lifespans, float(t), intensity)


@dataclass(frozen=True)
class DeadMean:
    n_dead: int
    value: float | None

    @property
    def empty(self) -> bool:
        return self.n_dead == 0


def dead_mean(sample: CohortSample, t: float | None = None, f: Callable = _identity) -> DeadMean:
    """Mean of ``f(l)`` over atoms dead by ``t`` (default: the sample horizon)."""
    t = sample.horizon if t is None else t
    dead = sample.births + sample.lifespans <= t
    n = int(dead.sum())
    if n == 0:
        return DeadMean(0, None)
    return DeadMean(n, float(np.mean(f(sample.lifespans[dead]))))


def expected_dead_mean(
    spec: LifespanSpec, intensity: Intensity, t: float, f: Callable = _identity
) -> float:
    """Ratio of expectations ``E sum_dead f(l) / E n_dead`` at finite horizon ``t``."""
    if intensity.kind == "exponential":
        def weight(b):
            return math.exp(b - t)
    else:
        def weight(b):
            return (b / t) ** intensity.r
    num, _ = integrate.quad(lambda b: weight(b) * spec.partial(f, t - b), 0.0, t, epsabs=1e-12, limit=200)
    den, _ = integrate.quad(
        lambda b: weight(b) * spec.partial(lambda x: 1.0, t - b), 0.0, t, epsabs=1e-12, limit=200
    )
    return num / den


def paradox_table(
    spec: LifespanSpec,
    intensity: Intensity,
    horizons,
    seed: int,
    f: Callable = _identity,
) -> list[tuple]:
    """Rows ``(t, n_dead, dead_mean, lambda1_expectation, lambda_expectation)``."""
    lam1 = spec.lambda1_expectation(f)
    lam = spec.expectation(f)
    rows = []
    for i, t in enumerate(horizons):
        dm = dead_mean(sample_cohort(spec, intensity, t, seed + i), f=f)
        rows.append((float(t), dm.n_dead, dm.value, lam1, lam))
    return rows
