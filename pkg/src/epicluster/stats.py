"""Counted processes, empirical size distributions and goodness of fit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .malthus import Pmf
from .model import Parameters
from .sim import BIRTH, GROWTH, ISOLATION, Trace, snapshot, totals_on_grid


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Characteristic:
    """A function ``f`` on cluster sizes with the convention ``f(0) = 0``.

    ``kind`` is one of ``one``, ``identity``, ``square``, ``indicator``
    (needs ``arg = k``) or ``exp`` (needs ``arg = b``).
    """

    kind: str
    arg: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("one", "identity", "square", "indicator", "exp"):
            raise ValueError(f"unknown characteristic {self.kind!r}")
        if self.kind in ("indicator", "exp") and self.arg is None:
            raise ValueError(f"{self.kind} characteristic needs an argument")

    @property
    def integral(self) -> bool:
        return self.kind != "exp"

    def check(self, params: Parameters) -> None:
        """``exp(b n)`` is admissible only when ``(1 - delta/rho) e^b < 1``."""
        if self.kind == "exp" and params.growth_q * math.exp(self.arg) >= 1.0:
            raise ValueError(
                f"exp({self.arg} n) grows too fast: need b < {-math.log(params.growth_q):.6g}"
            )

    def __call__(self, n):
        n = np.asarray(n)
        if self.kind == "one":
            out = (n > 0).astype(np.int64)
        elif self.kind == "identity":
            out = n.astype(np.int64)
        elif self.kind == "square":
            out = n.astype(np.int64) ** 2
        elif self.kind == "indicator":
            out = (n == int(self.arg)).astype(np.int64)
        else:
            out = np.where(n > 0, np.exp(self.arg * n), 0.0)
        return out


ONE = Characteristic("one")
IDENTITY = Characteristic("identity")


def active_count(trace: Trace, t: float, f: Characteristic = ONE):
    """``A^f(t)``: sum of ``f`` over the current sizes of active clusters."""
    f.check(trace.params)
    sizes = snapshot(trace, t).active_sizes
    return _sum(f(sizes), f)


def isolated_count(trace: Trace, t: float, f: Characteristic = ONE):
    """``I^f(t)``: sum of ``f`` over the detection sizes of clusters isolated by ``t``."""
    f.check(trace.params)
    sizes = snapshot(trace, t).isolated_sizes
    return _sum(f(sizes), f)


def _sum(values: np.ndarray, f: Characteristic):
    return int(values.sum()) if f.integral else math.fsum(values)


def counts_on_grid(trace: Trace, times: Sequence[float], f: Characteristic = ONE):
    """``A^f`` and ``I^f`` on a sorted grid, in one streaming pass over the event log."""
    f.check(trace.params)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("grid must be sorted")
    if times.size and (times[0] < 0 or times[-1] > trace.end_time):
        raise ValueError("grid leaves [0, end_time]")
    dtype = np.int64 if f.integral else float
    a_out = np.zeros(len(times), dtype=dtype)
    i_out = np.zeros(len(times), dtype=dtype)
    fv = (lambda n: int(f(n))) if f.integral else (lambda n: float(f(n)))
    size = np.ones(trace.n_clusters, dtype=np.int64)
    a_val, i_val = fv(1), (0 if f.integral else 0.0)
    ev_t, kind, who, aux = trace.ev_time, trace.ev_kind, trace.ev_cluster, trace.ev_aux
    j, n_ev = 0, trace.n_events
    for gi, t in enumerate(times):
        while j < n_ev and ev_t[j] <= t:
            k, c = kind[j], who[j]
            if k == GROWTH:
                a_val += fv(size[c] + 1) - fv(size[c])
                size[c] += 1
            elif k == BIRTH:
                a_val += fv(1)
            elif k == ISOLATION:
                a_val -= fv(size[c])
                i_val += fv(aux[j])
            j += 1
        a_out[gi] = a_val
        i_out[gi] = i_val
    return a_out, i_out


@dataclass(frozen=True)
class EmpiricalDist:
    """Histogram of cluster sizes; ``counts[k-1]`` clusters have size ``k``."""

    counts: np.ndarray

    @classmethod
    def from_sizes(cls, sizes: np.ndarray) -> "EmpiricalDist":
        sizes = np.asarray(sizes, dtype=np.int64)
        if sizes.size == 0:
            return cls(np.zeros(0, dtype=np.int64))
        if sizes.min() < 1:
            raise ValueError("cluster sizes must be >= 1")
        return cls(np.bincount(sizes - 1))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def empty(self) -> bool:
        return self.total == 0

    @property
    def weights(self) -> np.ndarray:
        if self.empty:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / self.total

    def merge(self, other: "EmpiricalDist") -> "EmpiricalDist":
        n = max(len(self.counts), len(other.counts))
        return EmpiricalDist(_pad(self.counts, n) + _pad(other.counts, n))

    def mean(self) -> float:
        if self.empty:
            raise InsufficientDataError("empty distribution")
        return float(np.dot(np.arange(1, len(self.counts) + 1), self.weights))

    def size_biased(self) -> np.ndarray:
        w = np.arange(1, len(self.counts) + 1) * self.counts
        return w / w.sum()


def pool(dists: Sequence[EmpiricalDist]) -> EmpiricalDist:
    out = EmpiricalDist(np.zeros(0, dtype=np.int64))
    for d in dists:
        out = out.merge(d)
    return out


def empirical_active(trace: Trace, t: float) -> EmpiricalDist:
    return EmpiricalDist.from_sizes(snapshot(trace, t).active_sizes)


def empirical_isolated(trace: Trace, t: float) -> EmpiricalDist:
    return EmpiricalDist.from_sizes(snapshot(trace, t).isolated_sizes)


# ---------------------------------------------------------------------------
# Growth rate and the intrinsic martingale


def estimate_alpha(source, window: tuple[float, float] | None = None, n_points: int = 50) -> float:
    """Least-squares slope of ``log A^1(t)`` on an even grid over ``window``.

    ``source`` is a :class:`Trace` or a ``(times, counts)`` pair of arrays
    (pooled counts, ODE totals); counts are then linearly interpolated.
    The default window is the last half of the observed time range.
    """
    if isinstance(source, Trace):
        if not source.survived:
            raise InsufficientDataError("the epidemic died out; no growth to fit")
        t_end = source.end_time
        lo, hi = window or (t_end / 2, t_end)
        grid = np.linspace(lo, hi, n_points)
        counts = totals_on_grid(source, grid).n_active_clusters.astype(float)
    else:
        times, values = (np.asarray(x, dtype=float) for x in source)
        lo, hi = window or (times[0] + 0.5 * (times[-1] - times[0]), times[-1])
        grid = np.linspace(lo, hi, n_points)
        counts = np.interp(grid, times, values)
    if n_points < 3 or np.any(counts <= 0):
        raise InsufficientDataError("need positive counts at >= 3 grid points")
    slope, _ = np.polyfit(grid, np.log(counts), 1)
    return float(slope)


def intrinsic_martingale(trace: Trace, alpha: float, n: int) -> float:
    """``W_n``: sum of ``exp(-alpha * birth_time)`` over clusters of generation ``n``."""
    births = trace.cl_birth[trace.cl_gen == n]
    return math.fsum(np.exp(-alpha * births))


def generation_complete(trace: Trace, n: int) -> bool:
    """True when every cluster of generation ``< n`` is isolated, so ``W_n`` is final."""
    older = trace.cl_gen < n
    return bool(np.all(~np.isnan(trace.cl_iso[older])))


# ---------------------------------------------------------------------------
# Distances and tests


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate((a, np.zeros(n - len(a), dtype=a.dtype)))


def _as_weights(d) -> np.ndarray:
    if isinstance(d, EmpiricalDist):
        return d.weights
    if isinstance(d, Pmf):
        return d.mass
    return np.asarray(d, dtype=float)


def tv_distance(d1, d2) -> float:
    """Total variation distance between two laws on ``1, 2, ...``."""
    a, b = _as_weights(d1), _as_weights(d2)
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("empty distribution")
    n = max(len(a), len(b))
    return 0.5 * float(np.abs(_pad(a, n) - _pad(b, n)).sum())


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    pvalue: float
    dof: int
    n_bins: int


def chi_square(d_emp: EmpiricalDist, pmf: Pmf | np.ndarray, min_bin: float = 5.0) -> ChiSquareResult:
    """Pearson test of counts against a law on ``1, 2, ...``.

    The law's missing mass goes into a final tail bin; bins are pooled left
    to right until each expects at least ``min_bin`` observations, and an
    underfilled last bin is merged into its neighbour.
    """
    if d_emp.empty:
        raise InsufficientDataError("no observations")
    probs = _as_weights(pmf)
    N = d_emp.total
    K = max(len(probs), len(d_emp.counts))
    p = _pad(probs, K)
    obs = _pad(d_emp.counts, K).astype(float)
    tail_p = max(0.0, 1.0 - p.sum())
    p = np.append(p, tail_p)
    obs = np.append(obs, 0.0)
    exp_bins, obs_bins = [], []
    acc_e = acc_o = 0.0
    for e, o in zip(N * p, obs):
        acc_e += e
        acc_o += o
        if acc_e >= min_bin:
            exp_bins.append(acc_e)
            obs_bins.append(acc_o)
            acc_e = acc_o = 0.0
    if exp_bins:
        exp_bins[-1] += acc_e
        obs_bins[-1] += acc_o
    else:
        exp_bins, obs_bins = [acc_e], [acc_o]
    if len(exp_bins) < 2:
        raise InsufficientDataError("fewer than two bins after pooling")
    e = np.asarray(exp_bins)
    o = np.asarray(obs_bins)
    stat = float(((o - e) ** 2 / e).sum())
    dof = len(e) - 1
    return ChiSquareResult(stat, float(sps.chi2.sf(stat, dof)), dof, len(e))


def ks_test(samples: np.ndarray, cdf) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value against a continuous CDF."""
    res = sps.kstest(np.asarray(samples, dtype=float), cdf)
    return float(res.statistic), float(res.pvalue)


def binomial_band(p: float, n: int, sigmas: float = 3.0) -> tuple[float, float]:
    half = sigmas * math.sqrt(p * (1.0 - p) / n)
    return p - half, p + half


def distribution_table(
    emp_active: EmpiricalDist,
    emp_isolated: EmpiricalDist,
    pi_a: Pmf,
    pi_i: Pmf,
    geometric: Pmf,
    K: int,
) -> list[tuple]:
    """Rows ``(k, empirical_active, empirical_isolated, pi_a, pi_i, geometric_reference)``."""
    ea = _pad(emp_active.weights, K)[:K] if len(emp_active.counts) < K else emp_active.weights[:K]
    ei = _pad(emp_isolated.weights, K)[:K] if len(emp_isolated.counts) < K else emp_isolated.weights[:K]
    return [
        (k, float(ea[k - 1]), float(ei[k - 1]), pi_a[k], pi_i[k], geometric[k])
        for k in range(1, K + 1)
    ]
