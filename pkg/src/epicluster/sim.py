"""Exact continuous-time simulation of the cluster epidemic.

With ``S`` contagious individuals the next event comes after an
exponential time of rate ``(gamma + delta) S``; a uniformly chosen
contagious individual then either contaminates traceably (its cluster
grows), contaminates untraceably (a new cluster of size one is born) or is
detected (its whole cluster is isolated), with probabilities proportional
to ``p gamma``, ``(1 - p) gamma`` and ``delta``.

Clusters carry dense integer ids in order of birth; the ancestral cluster
is ``0``. The hot loop lives in :mod:`epicluster._backend`.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .model import Parameters, Regime, regime
from .rng import replicate_seed

GROWTH, BIRTH, ISOLATION, PRUNED = 0, 1, 2, 3
KIND_NAMES = ("growth", "birth", "isolation", "pruned")


class StopReason(enum.IntEnum):
    EXTINCTION = 0
    TIME_LIMIT = 1
    POPULATION_CAP = 2
    EVENT_CAP = 3
    CLUSTER_CAP = 4


@dataclass(frozen=True)
class StopCondition:
    """Bounds on a run. ``None`` means unbounded.

    ``max_individuals`` caps the cumulative number of infected individuals.
    ``max_generation`` does not stop the run: untraceable contaminations by
    clusters of that generation are logged as ``pruned`` and spawn nothing,
    which keeps generations ``0..max_generation`` exactly distributed.
    """

    t_max: float | None = None
    max_individuals: int | None = None
    max_events: int | None = None
    max_clusters: int | None = None
    max_generation: int | None = None

    def is_bounded(self) -> bool:
        return any(
            v is not None
            for v in (self.t_max, self.max_individuals, self.max_events, self.max_clusters)
        )

    def check(self, params: Parameters) -> None:
        for name in ("max_individuals", "max_events", "max_clusters", "max_generation"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.t_max is not None and not self.t_max >= 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        if self.is_bounded():
            return
        if self.max_generation is not None and not params.degenerate:
            return
        if params.degenerate or regime(params) is Regime.SUPERCRITICAL:
            raise ValueError("supercritical runs need at least one stop bound")


class Event(NamedTuple):
    time: float
    kind: str
    cluster: int
    child: int | None
    size: int | None


@dataclass(frozen=True)
class ClusterRecord:
    id: int
    parent_id: int | None
    generation: int
    birth_time: float
    isolation_age: float | None
    final_size: int | None
    child_birth_ages: tuple[float, ...]
    current_size: int


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trace:
    """Immutable event log of one run plus per-cluster columns."""

    params: Parameters
    seed: int
    stop: StopCondition
    ev_time: np.ndarray
    ev_kind: np.ndarray
    ev_cluster: np.ndarray
    ev_aux: np.ndarray
    cl_parent: np.ndarray
    cl_birth: np.ndarray
    cl_iso: np.ndarray
    cl_final: np.ndarray
    cl_gen: np.ndarray
    cl_size: np.ndarray
    stop_reason: StopReason
    end_time: float
    infected: int
    contagious: int
    backend: str = field(default="", compare=False)

    @property
    def n_events(self) -> int:
        return len(self.ev_time)

    @property
    def n_clusters(self) -> int:
        return len(self.cl_birth)

    @property
    def survived(self) -> bool:
        return self.contagious > 0

    @property
    def n_children(self) -> np.ndarray:
        return np.bincount(self.cl_parent[1:], minlength=self.n_clusters)

    def event(self, i: int) -> Event:
        kind = int(self.ev_kind[i])
        aux = int(self.ev_aux[i])
        return Event(
            float(self.ev_time[i]),
            KIND_NAMES[kind],
            int(self.ev_cluster[i]),
            aux if kind == BIRTH else None,
            aux if kind in (GROWTH, ISOLATION) else None,
        )

    @property
    def events(self) -> list[Event]:
        return [self.event(i) for i in range(self.n_events)]

    def cluster(self, i: int) -> ClusterRecord:
        kids = np.flatnonzero(self.cl_parent == i)
        iso = self.cl_iso[i]
        isolated = not math.isnan(iso)
        return ClusterRecord(
            id=i,
            parent_id=None if i == 0 else int(self.cl_parent[i]),
            generation=int(self.cl_gen[i]),
            birth_time=float(self.cl_birth[i]),
            isolation_age=float(iso - self.cl_birth[i]) if isolated else None,
            final_size=int(self.cl_final[i]) if isolated else None,
            child_birth_ages=tuple(float(x) for x in self.cl_birth[kids] - self.cl_birth[i]),
            current_size=int(self.cl_size[i]),
        )

    @property
    def clusters(self) -> list[ClusterRecord]:
        return [self.cluster(i) for i in range(self.n_clusters)]

    def same_as(self, other: "Trace") -> bool:
        """Bitwise equality of every logged quantity."""
        cols = (
            "ev_time", "ev_kind", "ev_cluster", "ev_aux", "cl_parent", "cl_birth",
            "cl_iso", "cl_final", "cl_gen", "cl_size",
        )
        for c in cols:
            a, b = getattr(self, c), getattr(other, c)
            if a.dtype != b.dtype or a.tobytes() != b.tobytes():
                return False
        return (
            self.stop_reason == other.stop_reason
            and self.end_time == other.end_time
            and self.infected == other.infected
            and self.contagious == other.contagious
        )


def _bound(v: int | None) -> int:
    return -1 if v is None else int(v)


def simulate(
    params: Parameters,
    seed: int,
    stop: StopCondition | None = None,
    backend: str | None = None,
) -> Trace:
    """One exact realization, fully determined by ``(params, seed, stop)``."""
    stop = stop or StopCondition()
    stop.check(params)
    run = _backend.run if backend is None else _backend.backends[backend]
    raw = run(
        params.gamma,
        params.p,
        params.delta,
        int(seed),
        math.inf if stop.t_max is None else float(stop.t_max),
        _bound(stop.max_individuals),
        _bound(stop.max_events),
        _bound(stop.max_clusters),
        _bound(stop.max_generation),
    )
    arrays = {k: _readonly(v) for k, v in raw.items() if isinstance(v, np.ndarray)}
    return Trace(
        params=params,
        seed=int(seed),
        stop=stop,
        stop_reason=StopReason(raw["reason"]),
        end_time=float(raw["end_time"]),
        infected=int(raw["infected"]),
        contagious=int(raw["contagious"]),
        backend=backend or _backend.BACKEND,
        **arrays,
    )


# ---------------------------------------------------------------------------
# Reconstruction at a given time


@dataclass(frozen=True)
class Snapshot:
    t: float
    active_ids: np.ndarray
    active_sizes: np.ndarray
    isolated_ids: np.ndarray
    isolated_sizes: np.ndarray
    n_contagious: int
    n_isolated_individuals: int
    cumulative_infected: int

    @property
    def n_active_clusters(self) -> int:
        return len(self.active_sizes)

    @property
    def n_isolated_clusters(self) -> int:
        return len(self.isolated_sizes)


def _check_time(trace: Trace, t: float) -> None:
    if not 0.0 <= t <= trace.end_time:
        raise ValueError(f"t={t} outside [0, {trace.end_time}]")


def snapshot(trace: Trace, t: float) -> Snapshot:
    """State of every cluster at time ``t`` (events at exactly ``t`` included)."""
    _check_time(trace, t)
    n_ev = int(np.searchsorted(trace.ev_time, t, side="right"))
    kind = trace.ev_kind[:n_ev]
    who = trace.ev_cluster[:n_ev]
    born = np.flatnonzero(trace.cl_birth <= t)
    grown = np.bincount(who[kind == GROWTH], minlength=trace.n_clusters)
    size_t = 1 + grown[born]
    iso_time = trace.cl_iso[born]
    isolated = iso_time <= t  # NaN compares False
    active_ids = born[~isolated]
    isolated_ids = born[isolated]
    active_sizes = size_t[~isolated]
    isolated_sizes = trace.cl_final[isolated_ids]
    cumulative = 1 + int(np.count_nonzero((kind == GROWTH) | (kind == BIRTH)))
    return Snapshot(
        t=float(t),
        active_ids=active_ids,
        active_sizes=active_sizes,
        isolated_ids=isolated_ids,
        isolated_sizes=isolated_sizes,
        n_contagious=int(active_sizes.sum()),
        n_isolated_individuals=int(isolated_sizes.sum()),
        cumulative_infected=cumulative,
    )


@dataclass(frozen=True)
class Totals:
    """Counts on a time grid, computed from cumulative event counts."""

    times: np.ndarray
    n_active_clusters: np.ndarray
    n_isolated_clusters: np.ndarray
    n_contagious: np.ndarray
    n_isolated_individuals: np.ndarray

    @property
    def cumulative_infected(self) -> np.ndarray:
        return self.n_contagious + self.n_isolated_individuals


def totals_on_grid(trace: Trace, times: Sequence[float]) -> Totals:
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or times.max() > trace.end_time):
        raise ValueError("grid leaves [0, end_time]")
    kind = trace.ev_kind
    births = np.cumsum(kind == BIRTH)
    isos = np.cumsum(kind == ISOLATION)
    infections = np.cumsum((kind == GROWTH) | (kind == BIRTH))
    iso_people = np.cumsum(np.where(kind == ISOLATION, trace.ev_aux, 0))
    idx = np.searchsorted(trace.ev_time, times, side="right")

    def at(cum: np.ndarray) -> np.ndarray:
        padded = np.concatenate(([0], cum))
        return padded[idx]

    n_iso_people = at(iso_people)
    return Totals(
        times=times,
        n_active_clusters=1 + at(births) - at(isos),
        n_isolated_clusters=at(isos),
        n_contagious=1 + at(infections) - n_iso_people,
        n_isolated_individuals=n_iso_people,
    )


class ReplayError(AssertionError):
    pass


def replay(trace: Trace) -> Totals:
    """Re-run the bookkeeping event by event and check every invariant.

    Returns the totals after each event (``times`` = event times).
    """
    n = trace.n_events
    size = {0: 1}
    isolated: set[int] = set()
    S, iso_people, n_iso = 1, 0, 0
    last_t = 0.0
    out = np.empty((4, n), dtype=np.int64)
    for i in range(n):
        t = float(trace.ev_time[i])
        kind = int(trace.ev_kind[i])
        c = int(trace.ev_cluster[i])
        aux = int(trace.ev_aux[i])
        if t < last_t:
            raise ReplayError(f"event {i}: time goes backwards")
        last_t = t
        if c in isolated or c not in size:
            raise ReplayError(f"event {i}: cluster {c} is not active")
        if kind == GROWTH:
            size[c] += 1
            S += 1
            if aux != size[c]:
                raise ReplayError(f"event {i}: logged size {aux} != {size[c]}")
        elif kind == BIRTH:
            if aux != len(size) or trace.cl_parent[aux] != c or trace.cl_birth[aux] != t:
                raise ReplayError(f"event {i}: inconsistent birth of {aux}")
            size[aux] = 1
            S += 1
        elif kind == ISOLATION:
            if aux != size[c] or trace.cl_iso[c] != t:
                raise ReplayError(f"event {i}: inconsistent isolation of {c}")
            S -= size[c]
            iso_people += size[c]
            n_iso += 1
            isolated.add(c)
        elif kind != PRUNED:
            raise ReplayError(f"event {i}: unknown kind {kind}")
        out[:, i] = (len(size) - n_iso, n_iso, S, iso_people)
    if S != sum(v for k, v in size.items() if k not in isolated):
        raise ReplayError("contagious count drifted from the active cluster sizes")
    if S != trace.contagious or len(size) != trace.n_clusters:
        raise ReplayError("final state does not match the trace")
    for c, s in size.items():
        expect = 0 if c in isolated else s
        if trace.cl_size[c] != expect:
            raise ReplayError(f"cluster {c}: final size column mismatch")
    return Totals(trace.ev_time.copy(), out[0], out[1], out[2], out[3])


# ---------------------------------------------------------------------------
# Replicates


@dataclass(frozen=True)
class TraceSummary:
    index: int
    seed: int
    stop_reason: StopReason
    end_time: float
    n_events: int
    n_clusters: int
    infected: int
    contagious: int
    data: Any = None

    @property
    def survived(self) -> bool:
        return self.contagious > 0


def summarize(index: int, trace: Trace, reducer: Callable[[Trace], Any] | None = None) -> TraceSummary:
    return TraceSummary(
        index=index,
        seed=trace.seed,
        stop_reason=trace.stop_reason,
        end_time=trace.end_time,
        n_events=trace.n_events,
        n_clusters=trace.n_clusters,
        infected=trace.infected,
        contagious=trace.contagious,
        data=None if reducer is None else reducer(trace),
    )


def _run_one(args) -> TraceSummary:
    params, seed_base, index, stop, reducer, backend = args
    seed = replicate_seed(seed_base, index)
    try:
        trace = simulate(params, seed, stop, backend)
    except Exception as exc:
        raise RuntimeError(f"replicate {index} (seed {seed}) failed: {exc}") from exc
    return summarize(index, trace, reducer)


def replicate_batch(
    params: Parameters,
    seed_base: int,
    n: int,
    stop: StopCondition | None = None,
    reducer: Callable[[Trace], Any] | None = None,
    workers: int = 1,
    backend: str | None = None,
) -> list[TraceSummary]:
    """``n`` independent runs with seeds ``seed_base ^ index``, sorted by index.

    ``reducer`` (a picklable top-level function when ``workers > 1``) maps each
    trace to the ``data`` field of its summary so traces need not be kept.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    stop = stop or StopCondition()
    stop.check(params)
    jobs = [(params, seed_base, i, stop, reducer, backend) for i in range(n)]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(_run_one, jobs, chunksize=max(1, n // (8 * workers))))
    return sorted(out, key=lambda s: s.index)
