"""Malthusian parameter, limiting cluster-size profiles and the eigenproblem.

The growth exponent ``alpha`` is the root of ``L(theta) = 1`` where ``L`` is
the Laplace transform of the intensity of untraceable contaminations of a
typical cluster. Two independent evaluations of ``L`` are provided (a beta
series and adaptive quadrature); a third, independent route to ``alpha``
goes through the linear recurrence for the left eigenvector of the
generator, and a fourth integrates the truncated linear ODE system for the
expected number of active clusters of each size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import betaln

from .model import (
    TAIL_EPS,
    DegenerateDeltaError,
    Parameters,
    Regime,
    regime,
    tail_cutoff,
)


class NotSupercriticalError(ValueError):
    """No positive Malthusian parameter exists for these parameters."""


class TruncationError(RuntimeError):
    """A truncated computation lost more mass than allowed."""


@dataclass(frozen=True)
class Pmf:
    """Probability (or finite) mass on ``1..K`` plus a bound on the mass beyond ``K``."""

    mass: np.ndarray
    tail_bound: float = 0.0

    @property
    def K(self) -> int:
        return len(self.mass)

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def __getitem__(self, k: int) -> float:
        if k < 1:
            raise IndexError(k)
        return float(self.mass[k - 1]) if k <= self.K else 0.0

    def total(self) -> float:
        return float(self.mass.sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.mass))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def normalized(self) -> "Pmf":
        tot = self.total()
        return Pmf(self.mass / tot, self.tail_bound / tot)

    def size_biased(self) -> "Pmf":
        w = self.support * self.mass
        return Pmf(w / w.sum(), 0.0)


@dataclass(frozen=True)
class SpectralSolution:
    alpha: float
    beta: float
    c_a: float
    c_i: float
    pi_a: Pmf
    pi_i: Pmf
    solver_tol: float


# ---------------------------------------------------------------------------
# Laplace transform of the untraceable-contamination intensity


def _series_cutoff(q: float, eps: float) -> int:
    """Smallest K with sum_{j>K} j q^(j-1) below ``eps``."""
    if q <= 0.0:
        return 1
    k = 1
    while q**k * (k * (1.0 - q) + 1.0) / (1.0 - q) ** 2 >= eps:
        k = k * 2 if k < 64 else k + 64
    return k


def _check_theta(params: Parameters, theta: float) -> None:
    if params.degenerate:
        raise DegenerateDeltaError("the beta series diverges for delta = 0")
    if not theta >= 0:
        raise ValueError(f"theta must be >= 0, got {theta}")


def laplace_L_series(params: Parameters, theta: float, eps: float = 1e-16) -> float:
    """``((1-p) gamma / rho) * sum_j j q^(j-1) B(1 + theta/rho, j)``."""
    _check_theta(params, theta)
    rho, q = params.rho, params.growth_q
    a = theta / rho
    K = _series_cutoff(q, eps)
    j = np.arange(1, K + 1, dtype=float)
    logterm = np.log(j) + _log_q_power(params, j) + betaln(1.0 + a, j)
    # sum smallest terms first
    total = math.fsum(np.exp(logterm[::-1]))
    return (1.0 - params.p) * params.gamma / rho * total


def laplace_L_quad(params: Parameters, theta: float, epsabs: float = 1e-13) -> float:
    """``(1-p) gamma rho * int_0^1 x^(theta/rho) / ((rho - delta) x + delta)^2 dx``."""
    _check_theta(params, theta)
    rho, delta = params.rho, params.delta
    a = theta / rho
    val, _ = integrate.quad(
        lambda x: x**a / ((rho - delta) * x + delta) ** 2,
        0.0,
        1.0,
        epsabs=epsabs,
        epsrel=1e-13,
        limit=500,
    )
    return (1.0 - params.p) * params.gamma * rho * val


def laplace_L(params: Parameters, theta: float, check: bool = False, agree: float = 1e-9) -> float:
    """Laplace transform ``L(theta)``; series evaluator, optionally cross-checked.

    For ``delta == 0`` the closed form ``(1-p) gamma / (theta - p gamma)``
    (finite only for ``theta > p gamma``) is returned.
    """
    if params.degenerate:
        pg = params.p * params.gamma
        if theta <= pg:
            return math.inf
        return (1.0 - params.p) * params.gamma / (theta - pg)
    val = laplace_L_series(params, theta)
    if check:
        other = laplace_L_quad(params, theta)
        if abs(val - other) > agree:
            raise ArithmeticError(
                f"series {val!r} and quadrature {other!r} disagree at theta={theta}"
            )
    return val


# ---------------------------------------------------------------------------
# Root finding


def bracket_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-14,
    ftol: float = 1e-12,
    maxiter: int = 500,
) -> float:
    """Root of a decreasing function ``g`` with ``g(lo) > 0``.

    The upper end is doubled until ``g(hi) < 0``; the bracket is then
    shrunk by the Illinois variant of regula falsi, falling back to
    bisection whenever the secant step does not halve the bracket.
    """
    glo = g(lo)
    if not glo > 0:
        raise ValueError(f"g(lo) must be > 0, got {glo}")
    ghi = g(hi)
    n = 0
    while ghi >= 0:
        lo, glo = hi, ghi
        hi *= 2.0
        ghi = g(hi)
        n += 1
        if n > 200:
            raise ArithmeticError("could not bracket the root")
    side = 0
    for _ in range(maxiter):
        width = hi - lo
        x = (lo * ghi - hi * glo) / (ghi - glo)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        gx = g(x)
        if gx == 0.0 or (abs(gx) < ftol and width < max(xtol, 1e-15 * abs(x))):
            return x
        if gx > 0:
            lo, glo = x, gx
            if side == 1:
                ghi *= 0.5
            side = 1
        else:
            hi, ghi = x, gx
            if side == -1:
                glo *= 0.5
            side = -1
        if hi - lo > 0.5 * width:
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if gm > 0:
                lo, glo = mid, gm
            else:
                hi, ghi = mid, gm
            side = 0
        if hi - lo <= max(xtol, 4e-16 * abs(hi)):
            mid = 0.5 * (lo + hi)
            if abs(g(mid)) < ftol or hi - lo <= 4e-16 * abs(hi):
                return mid
    raise ArithmeticError("root finder did not converge")


def _require_supercritical(params: Parameters) -> None:
    if regime(params) is not Regime.SUPERCRITICAL:
        raise NotSupercriticalError(
            f"{params.as_dict()} is {regime(params).value}; no positive Malthusian parameter"
        )


def solve_alpha(params: Parameters, tol: float = 1e-12) -> float:
    """Malthusian parameter: the unique root of ``L(alpha) = 1``."""
    _require_supercritical(params)
    if params.degenerate:
        return params.gamma
    return bracket_root(lambda th: laplace_L(params, th) - 1.0, 1e-8, params.gamma, ftol=tol)


def beta_const(params: Parameters, alpha: float) -> float:
    """``-L'(alpha)``, by quadrature of the age-weighted intensity over ``[0, inf)``."""
    if params.degenerate:
        pg = params.p * params.gamma
        return (1.0 - params.p) * params.gamma / (alpha - pg) ** 2
    rho, delta = params.rho, params.delta

    def integrand(t: float) -> float:
        surv = math.exp(-rho * t)
        return t * math.exp(-(rho + alpha) * t) / (surv + delta * (1.0 - surv) / rho) ** 2

    val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    return (1.0 - params.p) * params.gamma * val


def beta_fd(params: Parameters, alpha: float, h: float) -> float:
    """Central finite-difference estimate of ``-L'(alpha)``."""
    return (laplace_L(params, alpha - h) - laplace_L(params, alpha + h)) / (2.0 * h)


# ---------------------------------------------------------------------------
# Measures m^a, m^i and their normalizations


def _log_q_power(params: Parameters, k: np.ndarray) -> np.ndarray:
    q = params.growth_q
    if q > 0:
        return (k - 1) * math.log(q)
    return np.where(k > 1, -np.inf, 0.0)


def m_active(params: Parameters, alpha: float, k):
    """``(1/rho) q^(k-1) B(1 + alpha/rho, k)``."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    rho = params.rho
    out = np.exp(_log_q_power(params, k) + betaln(1.0 + alpha / rho, k)) / rho
    return float(out) if out.ndim == 0 else out


def m_isolated(params: Parameters, alpha: float, k):
    """``(delta/rho^2) q^(k-1) B(alpha/rho, k + 1)``."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    rho = params.rho
    out = params.delta / rho**2 * np.exp(_log_q_power(params, k) + betaln(alpha / rho, k + 1.0))
    return float(out) if out.ndim == 0 else out


def default_K(params: Parameters, minimum: int = 1) -> int:
    return max(tail_cutoff(params, TAIL_EPS), minimum)


def _active_weights(params: Parameters, alpha: float, K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=float)
    return np.exp(_log_q_power(params, k) + betaln(1.0 + alpha / params.rho, k))


def pi_active(params: Parameters, alpha: float, K: int | None = None) -> tuple[Pmf, float]:
    """Normalized limiting profile of active cluster sizes, with its constant ``c_a``.

    In the detection-free mode the profile is the Yule-Simon law with
    parameter ``alpha/rho`` and ``c_a = alpha/rho`` exactly.
    """
    if params.degenerate:
        a = alpha / params.rho
        if K is None:
            raise ValueError("K is required when delta = 0")
        w = _active_weights(params, alpha, K)
        tail = a * math.exp(math.log(K) + betaln(float(K), a + 1.0))
        return Pmf(a * w, tail), a
    if K is None:
        K = default_K(params)
    w = _active_weights(params, alpha, K)
    c_a = 1.0 / math.fsum(w[::-1])
    q = params.growth_q
    # B(1+a, k) is decreasing in k, so the tail is dominated by a geometric sum
    tail = c_a * w[-1] * q / (1.0 - q) if q < 1 else 0.0
    return Pmf(c_a * w, tail), c_a


def pi_isolated(params: Parameters, alpha: float, K: int | None = None) -> tuple[Pmf, float]:
    """Normalized limiting profile of isolated cluster sizes, with ``c_i``."""
    if params.degenerate:
        raise DegenerateDeltaError("no cluster is ever isolated when delta = 0")
    if K is None:
        K = default_K(params)
    k = np.arange(1, K + 1, dtype=float)
    w = np.exp(_log_q_power(params, k) + betaln(alpha / params.rho, k + 1.0))
    c_i = 1.0 / math.fsum(w[::-1])
    q = params.growth_q
    tail = c_i * w[-1] * q / (1.0 - q) if q < 1 else 0.0
    return Pmf(c_i * w, tail), c_i


def geometric_pmf(success: float, K: int) -> Pmf:
    k = np.arange(1, K + 1, dtype=float)
    q = 1.0 - success
    mass = success * q ** (k - 1)
    return Pmf(mass, q**K)


def solve(params: Parameters, tol: float = 1e-12, K: int | None = None) -> SpectralSolution:
    """All spectral quantities for supercritical parameters."""
    alpha = solve_alpha(params, tol)
    beta = beta_const(params, alpha)
    if params.degenerate:
        K = K or 10_000
        pa, c_a = pi_active(params, alpha, K)
        return SpectralSolution(alpha, beta, c_a, math.nan, pa, Pmf(np.zeros(K), 0.0), tol)
    pa, c_a = pi_active(params, alpha, K)
    pi_, c_i = pi_isolated(params, alpha, K)
    return SpectralSolution(alpha, beta, c_a, c_i, pa, pi_, tol)


# ---------------------------------------------------------------------------
# Generator and eigenproblem


def generator_apply(params: Parameters, f: Callable, k):
    """``(A f)(k) = k (p gamma (f(k+1) - f(k)) + (1-p) gamma f(1) - delta f(k))``."""
    g, p, d = params.gamma, params.p, params.delta
    return k * (p * g * (f(k + 1) - f(k)) + (1.0 - p) * g * f(1) - d * f(k))


def _indicator(k0: int) -> Callable:
    return lambda k: np.asarray(np.equal(k, k0), dtype=float)


def eigen_residual(params: Parameters, alpha: float, pi_a: Pmf) -> float:
    """``max_f |<pi_a, A f> - alpha <pi_a, f>|`` over indicators ``f`` of ``1..K-1``."""
    K = pi_a.K
    ks = np.arange(1, K + 1)
    worst = 0.0
    for k0 in range(1, K):
        f = _indicator(k0)
        lhs = float(np.dot(pi_a.mass, generator_apply(params, f, ks)))
        rhs = alpha * float(np.dot(pi_a.mass, f(ks)))
        worst = max(worst, abs(lhs - rhs))
    return worst


@dataclass(frozen=True)
class NuRecurrence:
    nu: Pmf
    balance_gap: float


def nu_recurrence(params: Parameters, r: float, K: int | None = None) -> NuRecurrence:
    """Candidate left eigenvector for eigenvalue ``r`` via the size recurrence.

    The constant is fixed so that ``(r + rho) nu(1) = rho``; the returned gap
    ``(r + rho) nu(1) - (1-p) gamma sum_j j nu(j)`` vanishes iff ``r = alpha``.
    """
    if not r > 0:
        raise ValueError(f"r must be > 0, got {r}")
    if K is None:
        K = _series_cutoff(params.growth_q, 1e-16) if not params.degenerate else 10_000
    rho, pg = params.rho, params.p * params.gamma
    nu = np.empty(K)
    nu[0] = rho / (r + rho)
    for k in range(2, K + 1):
        nu[k - 1] = pg * (k - 1) / (r + rho * k) * nu[k - 2]
    weighted = math.fsum((np.arange(1, K + 1) * nu)[::-1])
    gap = (r + rho) * nu[0] - (1.0 - params.p) * params.gamma * weighted
    return NuRecurrence(Pmf(nu, 0.0), gap)


def recurrence_alpha(params: Parameters, tol: float = 1e-12) -> float:
    """Root of the recurrence balance gap, an independent route to ``alpha``."""
    _require_supercritical(params)
    if params.degenerate:
        raise DegenerateDeltaError("the recurrence balance diverges for delta = 0")
    # the gap is -rho (L(r) - 1), hence increasing in r
    return bracket_root(lambda r: -nu_recurrence(params, r).balance_gap, 1e-8, params.gamma, ftol=tol)


# ---------------------------------------------------------------------------
# Forward integration of the truncated evolution equations


@dataclass(frozen=True)
class NuTrajectory:
    times: np.ndarray
    nu: np.ndarray  # shape (len(times), K_max)
    leaked: float
    leaked_fraction: float

    @property
    def totals(self) -> np.ndarray:
        return self.nu.sum(axis=1)

    def profile(self, i: int = -1) -> Pmf:
        row = self.nu[i]
        return Pmf(row / row.sum(), 0.0)


def _nu_rhs(params: Parameters, K: int) -> Callable[[np.ndarray], np.ndarray]:
    rho = params.rho
    pg = params.p * params.gamma
    src = (1.0 - params.p) * params.gamma
    k = np.arange(1, K + 1, dtype=float)
    km1 = k[:-1]

    def rhs(v: np.ndarray) -> np.ndarray:
        out = -rho * k * v
        out[1:] += pg * km1 * v[:-1]
        out[0] += src * np.dot(k, v)
        return out

    return rhs


def integrate_nu(
    params: Parameters,
    K_max: int,
    t_max: float,
    dt: float | None = None,
    n_out: int = 401,
    leak_tol: float = 1e-6,
) -> NuTrajectory:
    """Classical RK4 for the expected numbers ``nu_t(k)`` of active clusters of size ``k``.

    Flux out of ``K_max`` is dropped and accumulated as ``leaked``; the run
    fails if the leaked mass exceeds ``leak_tol`` relative to the final
    total mass.
    """
    if K_max < 2 or not t_max > 0:
        raise ValueError("need K_max >= 2 and t_max > 0")
    rho = params.rho
    stiff = rho * K_max + (1.0 - params.p) * params.gamma
    dt_stab = 1.0 / stiff  # RK4 is stable up to ~2.78/stiff on the negative axis
    dt = dt_stab if dt is None else min(dt, dt_stab)
    n_steps = math.ceil(t_max / dt)
    dt = t_max / n_steps
    rhs = _nu_rhs(params, K_max)
    out_every = max(1, n_steps // (n_out - 1))
    v = np.zeros(K_max)
    v[0] = 1.0
    times, rows = [0.0], [v.copy()]
    edge = params.p * params.gamma * K_max
    leaked = 0.0
    for i in range(1, n_steps + 1):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * dt * k1)
        k3 = rhs(v + 0.5 * dt * k2)
        k4 = rhs(v + dt * k3)
        v_new = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        leaked += 0.5 * dt * edge * (v[-1] + v_new[-1])
        v = v_new
        if i % out_every == 0 or i == n_steps:
            times.append(i * dt)
            rows.append(v.copy())
    frac = leaked / v.sum()
    if frac > leak_tol:
        raise TruncationError(f"leaked mass fraction {frac:.3g} exceeds {leak_tol:.3g}; raise K_max")
    return NuTrajectory(np.asarray(times), np.asarray(rows), leaked, frac)


def log_slope(times: np.ndarray, values: np.ndarray, start_fraction: float = 0.75) -> float:
    """Least-squares slope of ``log(values)`` over the last part of the time range."""
    t0 = times[0] + start_fraction * (times[-1] - times[0])
    sel = times >= t0
    if sel.sum() < 2:
        raise ValueError("not enough points in the fitting window")
    slope, _ = np.polyfit(times[sel], np.log(values[sel]), 1)
    return float(slope)


def ode_alpha(params: Parameters, K_max: int = 200, t_max: float = 40.0) -> float:
    """Growth rate of the total expected number of active clusters."""
    traj = integrate_nu(params, K_max, t_max)
    return log_slope(traj.times, traj.totals)


# ---------------------------------------------------------------------------
# Detection-free limit


def yule_simon_pmf(q: float, k):
    """``(1/q) B(1 + 1/q, k)``."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    out = np.exp(betaln(1.0 + 1.0 / q, k)) / q
    return float(out) if out.ndim == 0 else out


def yule_simon(q: float, K: int) -> Pmf:
    """Truncated Yule-Simon law; the tail beyond ``K`` is ``K B(K, 1 + 1/q)``."""
    k = np.arange(1, K + 1)
    a = 1.0 / q
    tail = math.exp(math.log(K) + betaln(float(K), a + 1.0))
    return Pmf(yule_simon_pmf(q, k), tail)
