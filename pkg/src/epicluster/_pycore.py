"""Pure-Python Gillespie kernel; reference for the compiled ``_core`` module.

Both implementations must stay step-for-step identical: same draws in the
same order, same floating-point expressions. Clusters are picked with
probability proportional to their current size through a Fenwick tree over
cluster ids.
"""

import math

import numpy as np

from .rng import GOLDEN, MASK64, fmix64, stream_key

GROWTH, BIRTH, ISOLATION, PRUNED = 0, 1, 2, 3
EXTINCTION, TIME_LIMIT, POPULATION_CAP, EVENT_CAP, CLUSTER_CAP = 0, 1, 2, 3, 4

_INV53 = 1.0 / (1 << 53)


def run(gamma, p, delta, seed, t_max, max_individuals, max_events, max_clusters, max_generation):
    """Simulate one epidemic; negative integer bounds and ``t_max = inf`` mean unbounded."""
    state = stream_key(seed)
    total_rate = gamma + delta
    thr_grow = p * gamma
    thr_birth = gamma

    cap = 16
    tree = [0] * (cap + 1)
    top = cap

    cl_parent = [-1]
    cl_birth = [0.0]
    cl_iso = [math.nan]
    cl_final = [0]
    cl_gen = [0]
    cl_size = [1]
    n_cl = 1
    i = 1
    while i <= cap:
        tree[i] += 1
        i += i & (-i)

    ev_time = []
    ev_kind = []
    ev_cluster = []
    ev_aux = []

    t = 0.0
    S = 1
    infected = 1
    n_ev = 0
    reason = EXTINCTION
    while True:
        if S == 0:
            reason = EXTINCTION
            break
        if 0 <= max_events <= n_ev:
            reason = EVENT_CAP
            break
        state = (state + GOLDEN) & MASK64
        u1 = (fmix64(state) >> 11) * _INV53
        state = (state + GOLDEN) & MASK64
        u2 = (fmix64(state) >> 11) * _INV53
        state = (state + GOLDEN) & MASK64
        u3 = (fmix64(state) >> 11) * _INV53
        t_next = t - math.log1p(-u1) / (total_rate * S)
        if t_next > t_max:
            t = t_max
            reason = TIME_LIMIT
            break
        t = t_next

        target = int(u2 * S)
        if target >= S:
            target = S - 1
        # Fenwick descent: smallest index whose prefix sum exceeds target
        pos = 0
        step = top
        while step:
            nxt = pos + step
            if nxt <= cap and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        c = pos  # zero-based cluster id

        x = u3 * total_rate
        if x < thr_grow:
            cl_size[c] += 1
            S += 1
            infected += 1
            i = c + 1
            while i <= cap:
                tree[i] += 1
                i += i & (-i)
            ev_time.append(t)
            ev_kind.append(GROWTH)
            ev_cluster.append(c)
            ev_aux.append(cl_size[c])
        elif x < thr_birth:
            if 0 <= max_generation <= cl_gen[c]:
                ev_time.append(t)
                ev_kind.append(PRUNED)
                ev_cluster.append(c)
                ev_aux.append(-1)
                n_ev += 1
                continue
            child = n_cl
            n_cl += 1
            cl_parent.append(c)
            cl_birth.append(t)
            cl_iso.append(math.nan)
            cl_final.append(0)
            cl_gen.append(cl_gen[c] + 1)
            cl_size.append(1)
            if n_cl > cap:
                # grow and rebuild the tree in O(cap)
                cap *= 2
                top = cap
                tree = [0] * (cap + 1)
                for j in range(1, cap + 1):
                    if j <= n_cl:
                        tree[j] += cl_size[j - 1]
                    up = j + (j & (-j))
                    if up <= cap:
                        tree[up] += tree[j]
            else:
                i = child + 1
                while i <= cap:
                    tree[i] += 1
                    i += i & (-i)
            S += 1
            infected += 1
            ev_time.append(t)
            ev_kind.append(BIRTH)
            ev_cluster.append(c)
            ev_aux.append(child)
        else:
            size = cl_size[c]
            cl_final[c] = size
            cl_iso[c] = t
            cl_size[c] = 0
            S -= size
            i = c + 1
            while i <= cap:
                tree[i] -= size
                i += i & (-i)
            ev_time.append(t)
            ev_kind.append(ISOLATION)
            ev_cluster.append(c)
            ev_aux.append(size)
        n_ev += 1
        if 0 <= max_individuals <= infected:
            reason = POPULATION_CAP
            break
        if 0 <= max_clusters <= n_cl:
            reason = CLUSTER_CAP
            break

    return {
        "ev_time": np.asarray(ev_time, dtype=np.float64),
        "ev_kind": np.asarray(ev_kind, dtype=np.int8),
        "ev_cluster": np.asarray(ev_cluster, dtype=np.int64),
        "ev_aux": np.asarray(ev_aux, dtype=np.int64),
        "cl_parent": np.asarray(cl_parent, dtype=np.int64),
        "cl_birth": np.asarray(cl_birth, dtype=np.float64),
        "cl_iso": np.asarray(cl_iso, dtype=np.float64),
        "cl_final": np.asarray(cl_final, dtype=np.int64),
        "cl_gen": np.asarray(cl_gen, dtype=np.int64),
        "cl_size": np.asarray(cl_size, dtype=np.int64),
        "end_time": t,
        "reason": reason,
        "infected": infected,
        "contagious": S,
    }
