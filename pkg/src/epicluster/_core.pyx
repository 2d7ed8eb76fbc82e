# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gillespie kernel. Step-for-step identical to ``_pycore.run``."""

from libc.math cimport log1p, NAN
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t, int64_t, int8_t
from libc.string cimport memset

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef double INV53 = 1.0 / 9007199254740992.0

cdef enum:
    GROWTH = 0
    BIRTH = 1
    ISOLATION = 2
    PRUNED = 3

cdef enum:
    EXTINCTION = 0
    TIME_LIMIT = 1
    POPULATION_CAP = 2
    EVENT_CAP = 3
    CLUSTER_CAP = 4


cdef inline uint64_t fmix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline double next_double(uint64_t* state) nogil:
    state[0] += GOLDEN
    return <double>(fmix64(state[0]) >> 11) * INV53


cdef void* grow(void* ptr, Py_ssize_t n, Py_ssize_t itemsize) except NULL:
    cdef void* out = realloc(ptr, n * itemsize)
    if out == NULL:
        raise MemoryError()
    return out


cdef object to_array(void* ptr, Py_ssize_t n, dtype):
    cdef Py_ssize_t nbytes = n * np.dtype(dtype).itemsize
    if n == 0:
        return np.empty(0, dtype=dtype)
    return np.frombuffer((<char*>ptr)[:nbytes], dtype=dtype).copy()


def run(double gamma, double p, double delta, object seed, double t_max,
        int64_t max_individuals, int64_t max_events, int64_t max_clusters,
        int64_t max_generation):
    """Simulate one epidemic; negative integer bounds and ``t_max = inf`` mean unbounded."""
    cdef uint64_t state = fmix64(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef double total_rate = gamma + delta
    cdef double thr_grow = p * gamma
    cdef double thr_birth = gamma

    cdef Py_ssize_t cap = 16, top = 16
    cdef Py_ssize_t cl_alloc = 16, ev_alloc = 64
    cdef int64_t* tree = <int64_t*>malloc((cap + 1) * sizeof(int64_t))
    cdef int64_t* cl_parent = <int64_t*>malloc(cl_alloc * sizeof(int64_t))
    cdef double* cl_birth = <double*>malloc(cl_alloc * sizeof(double))
    cdef double* cl_iso = <double*>malloc(cl_alloc * sizeof(double))
    cdef int64_t* cl_final = <int64_t*>malloc(cl_alloc * sizeof(int64_t))
    cdef int64_t* cl_gen = <int64_t*>malloc(cl_alloc * sizeof(int64_t))
    cdef int64_t* cl_size = <int64_t*>malloc(cl_alloc * sizeof(int64_t))
    cdef double* ev_time = <double*>malloc(ev_alloc * sizeof(double))
    cdef int8_t* ev_kind = <int8_t*>malloc(ev_alloc * sizeof(int8_t))
    cdef int64_t* ev_cluster = <int64_t*>malloc(ev_alloc * sizeof(int64_t))
    cdef int64_t* ev_aux = <int64_t*>malloc(ev_alloc * sizeof(int64_t))

    cdef Py_ssize_t n_cl = 1, n_ev = 0, i, j, up, pos, step, nxt, c, child
    cdef int64_t S = 1, infected = 1, target, size
    cdef double t = 0.0, t_next, u1, u2, u3, x
    cdef int reason = EXTINCTION

    try:
        memset(tree, 0, (cap + 1) * sizeof(int64_t))
        cl_parent[0] = -1
        cl_birth[0] = 0.0
        cl_iso[0] = NAN
        cl_final[0] = 0
        cl_gen[0] = 0
        cl_size[0] = 1
        i = 1
        while i <= cap:
            tree[i] += 1
            i += i & (-i)

        while True:
            if S == 0:
                reason = EXTINCTION
                break
            if 0 <= max_events <= n_ev:
                reason = EVENT_CAP
                break
            u1 = next_double(&state)
            u2 = next_double(&state)
            u3 = next_double(&state)
            t_next = t - log1p(-u1) / (total_rate * <double>S)
            if t_next > t_max:
                t = t_max
                reason = TIME_LIMIT
                break
            t = t_next

            target = <int64_t>(u2 * <double>S)
            if target >= S:
                target = S - 1
            pos = 0
            step = top
            while step:
                nxt = pos + step
                if nxt <= cap and tree[nxt] <= target:
                    pos = nxt
                    target -= tree[nxt]
                step >>= 1
            c = pos

            if n_ev >= ev_alloc:
                ev_alloc *= 2
                ev_time = <double*>grow(ev_time, ev_alloc, sizeof(double))
                ev_kind = <int8_t*>grow(ev_kind, ev_alloc, sizeof(int8_t))
                ev_cluster = <int64_t*>grow(ev_cluster, ev_alloc, sizeof(int64_t))
                ev_aux = <int64_t*>grow(ev_aux, ev_alloc, sizeof(int64_t))

            x = u3 * total_rate
            if x < thr_grow:
                cl_size[c] += 1
                S += 1
                infected += 1
                i = c + 1
                while i <= cap:
                    tree[i] += 1
                    i += i & (-i)
                ev_time[n_ev] = t
                ev_kind[n_ev] = GROWTH
                ev_cluster[n_ev] = c
                ev_aux[n_ev] = cl_size[c]
            elif x < thr_birth:
                if 0 <= max_generation <= cl_gen[c]:
                    ev_time[n_ev] = t
                    ev_kind[n_ev] = PRUNED
                    ev_cluster[n_ev] = c
                    ev_aux[n_ev] = -1
                    n_ev += 1
                    continue
                child = n_cl
                n_cl += 1
                if n_cl > cl_alloc:
                    cl_alloc *= 2
                    cl_parent = <int64_t*>grow(cl_parent, cl_alloc, sizeof(int64_t))
                    cl_birth = <double*>grow(cl_birth, cl_alloc, sizeof(double))
                    cl_iso = <double*>grow(cl_iso, cl_alloc, sizeof(double))
                    cl_final = <int64_t*>grow(cl_final, cl_alloc, sizeof(int64_t))
                    cl_gen = <int64_t*>grow(cl_gen, cl_alloc, sizeof(int64_t))
                    cl_size = <int64_t*>grow(cl_size, cl_alloc, sizeof(int64_t))
                cl_parent[child] = c
                cl_birth[child] = t
                cl_iso[child] = NAN
                cl_final[child] = 0
                cl_gen[child] = cl_gen[c] + 1
                cl_size[child] = 1
                if n_cl > cap:
                    cap *= 2
                    top = cap
                    tree = <int64_t*>grow(tree, cap + 1, sizeof(int64_t))
                    memset(tree, 0, (cap + 1) * sizeof(int64_t))
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
                ev_time[n_ev] = t
                ev_kind[n_ev] = BIRTH
                ev_cluster[n_ev] = c
                ev_aux[n_ev] = child
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
                ev_time[n_ev] = t
                ev_kind[n_ev] = ISOLATION
                ev_cluster[n_ev] = c
                ev_aux[n_ev] = size
            n_ev += 1
            if 0 <= max_individuals <= infected:
                reason = POPULATION_CAP
                break
            if 0 <= max_clusters <= n_cl:
                reason = CLUSTER_CAP
                break

        return {
            "ev_time": to_array(ev_time, n_ev, np.float64),
            "ev_kind": to_array(ev_kind, n_ev, np.int8),
            "ev_cluster": to_array(ev_cluster, n_ev, np.int64),
            "ev_aux": to_array(ev_aux, n_ev, np.int64),
            "cl_parent": to_array(cl_parent, n_cl, np.int64),
            "cl_birth": to_array(cl_birth, n_cl, np.float64),
            "cl_iso": to_array(cl_iso, n_cl, np.float64),
            "cl_final": to_array(cl_final, n_cl, np.int64),
            "cl_gen": to_array(cl_gen, n_cl, np.int64),
            "cl_size": to_array(cl_size, n_cl, np.int64),
            "end_time": t,
            "reason": reason,
            "infected": infected,
            "contagious": S,
        }
    finally:
        free(tree)
        free(cl_parent)
        free(cl_birth)
        free(cl_iso)
        free(cl_final)
        free(cl_gen)
        free(cl_size)
        free(ev_time)
        free(ev_kind)
        free(ev_cluster)
        free(ev_aux)
