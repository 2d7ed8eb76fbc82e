"""Bit-exact writers for traces and tables.

Floats are written with ``repr`` (shortest round-trip form, ``.`` decimal
separator); missing values are an empty CSV cell or JSON ``null``.

Schemas (column order is fixed):

``events.jsonl``
    one object per line, keys ``t, kind, cluster, child, size``. ``kind`` is
    ``growth``, ``birth``, ``isolation`` or ``pruned``; ``child`` is set only
    for births and ``size`` only for growth (new size) and isolation (final
    size).
``clusters.csv``
    ``id, parent_id, birth_time, isolation_time, final_size, n_children``.
``snapshots.csv``
    ``t, n_active_clusters, n_isolated_clusters, n_contagious,
    n_isolated_individuals``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .sim import BIRTH, GROWTH, ISOLATION, KIND_NAMES, Totals, Trace

EVENT_KEYS = ("t", "kind", "cluster", "child", "size")
CLUSTER_COLUMNS = ("id", "parent_id", "birth_time", "isolation_time", "final_size", "n_children")
SNAPSHOT_COLUMNS = (
    "t",
    "n_active_clusters",
    "n_isolated_clusters",
    "n_contagious",
    "n_isolated_individuals",
)


def plain(x: Any) -> Any:
    """Convert numpy scalars and containers to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def cell(x: Any) -> str:
    x = plain(x)
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def dumps(obj: Any) -> str:
    return json.dumps(plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def event_records(trace: Trace):
    for t, k, c, aux in zip(trace.ev_time, trace.ev_kind, trace.ev_cluster, trace.ev_aux):
        k = int(k)
        yield {
            "t": float(t),
            "kind": KIND_NAMES[k],
            "cluster": int(c),
            "child": int(aux) if k == BIRTH else None,
            "size": int(aux) if k in (GROWTH, ISOLATION) else None,
        }


def write_events(path: Path, trace: Trace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in event_records(trace):
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_events(path: Path) -> dict[str, np.ndarray]:
    """Inverse of :func:`write_events`, as ``ev_*`` columns of a trace."""
    t, kind, who, aux = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            k = KIND_NAMES.index(rec["kind"])
            t.append(rec["t"])
            kind.append(k)
            who.append(rec["cluster"])
            if k == BIRTH:
                aux.append(rec["child"])
            elif k in (GROWTH, ISOLATION):
                aux.append(rec["size"])
            else:
                aux.append(-1)
    return {
        "ev_time": np.asarray(t, dtype=float),
        "ev_kind": np.asarray(kind, dtype=np.int8),
        "ev_cluster": np.asarray(who, dtype=np.int64),
        "ev_aux": np.asarray(aux, dtype=np.int64),
    }


def cluster_rows(trace: Trace):
    n_children = trace.n_children
    for i in range(trace.n_clusters):
        iso = float(trace.cl_iso[i])
        isolated = not math.isnan(iso)
        parent = int(trace.cl_parent[i])
        yield (
            i,
            parent if parent >= 0 else None,
            float(trace.cl_birth[i]),
            iso if isolated else None,
            int(trace.cl_final[i]) if isolated else None,
            int(n_children[i]),
        )


def write_clusters(path: Path, trace: Trace) -> None:
    write_csv(path, CLUSTER_COLUMNS, cluster_rows(trace))


def snapshot_rows(totals: Totals):
    return zip(
        totals.times,
        totals.n_active_clusters,
        totals.n_isolated_clusters,
        totals.n_contagious,
        totals.n_isolated_individuals,
    )


def write_snapshots(path: Path, totals: Totals) -> None:
    write_csv(path, SNAPSHOT_COLUMNS, snapshot_rows(totals))
