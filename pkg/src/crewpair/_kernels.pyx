# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled set-cover kernels.

Every function mirrors one in ``_pykernels`` exactly, including tie
breaking. ``counts`` arguments are per-flight cover multiplicities and are
updated in place. Loops run without the GIL so generation-level threads
scale.
"""

import numpy as np
cimport numpy as cnp

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64


def coverage_counts(const i32[::1] pair_indptr, const i32[::1] pair_flights,
                    const i32[::1] active, Py_ssize_t num_flights):
    out = np.zeros(num_flights, dtype=np.int32)
    cdef i32[::1] c = out
    cdef Py_ssize_t k, j, p
    with nogil:
        for k in range(active.shape[0]):
            p = active[k]
            for j in range(pair_indptr[p], pair_indptr[p + 1]):
                c[pair_flights[j]] += 1
    return out


cdef inline i32 _new_cover(const i32[::1] pair_indptr, const i32[::1] pair_flights,
                           i32[::1] counts, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t j
    cdef i32 n = 0
    for j in range(pair_indptr[p], pair_indptr[p + 1]):
        if counts[pair_flights[j]] == 0:
            n += 1
    return n


cdef inline void _add(const i32[::1] pair_indptr, const i32[::1] pair_flights,
                      i32[::1] counts, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(pair_indptr[p], pair_indptr[p + 1]):
        counts[pair_flights[j]] += 1


cdef inline bint _qi_better(i64 cost_a, i64 new_a, i64 cost_b, i64 new_b) noexcept nogil:
    # cost_a/new_a < cost_b/new_b, then cheaper wins; equal keeps incumbent
    cdef i64 lhs = cost_a * new_b
    cdef i64 rhs = cost_b * new_a
    if lhs != rhs:
        return lhs < rhs
    return cost_a < cost_b


def repair_cover(i32[::1] counts, const i64[::1] costs,
                 const i32[::1] pair_indptr, const i32[::1] pair_flights,
                 const i32[::1] flight_indptr, const i32[::1] flight_pairs):
    cdef Py_ssize_t nf = counts.shape[0]
    picks = np.empty(nf, dtype=np.int32)
    cdef i32[::1] out = picks
    cdef Py_ssize_t n = 0, f, j, p, best
    cdef i64 best_new, new
    with nogil:
        for f in range(nf):
            if counts[f] != 0:
                continue
            best = -1
            best_new = 0
            for j in range(flight_indptr[f], flight_indptr[f + 1]):
                p = flight_pairs[j]
                new = _new_cover(pair_indptr, pair_flights, counts, p)
                if best < 0 or _qi_better(costs[p], new, costs[best], best_new):
                    best = p
                    best_new = new
            if best >= 0:
                _add(pair_indptr, pair_flights, counts, best)
                out[n] = <i32>best
                n += 1
    return picks[:n].copy()


def drop_redundant(i32[::1] counts, const i32[::1] pair_indptr,
                   const i32[::1] pair_flights, const i32[::1] active):
    keep = np.ones(active.shape[0], dtype=np.uint8)
    cdef cnp.uint8_t[::1] kv = keep
    cdef Py_ssize_t k, j, p
    cdef bint removable
    with nogil:
        for k in range(active.shape[0]):
            p = active[k]
            removable = True
            for j in range(pair_indptr[p], pair_indptr[p + 1]):
                if counts[pair_flights[j]] < 2:
                    removable = False
                    break
            if removable:
                for j in range(pair_indptr[p], pair_indptr[p + 1]):
                    counts[pair_flights[j]] -= 1
                kv[k] = 0
    return keep


def zero_deadhead_scan(i32[::1] counts, const i32[::1] pair_indptr,
                       const i32[::1] pair_flights, const i32[::1] order):
    picks = np.empty(counts.shape[0], dtype=np.int32)
    cdef i32[::1] out = picks
    cdef Py_ssize_t n = 0, k, j, p
    cdef bint free
    with nogil:
        for k in range(order.shape[0]):
            p = order[k]
            free = True
            for j in range(pair_indptr[p], pair_indptr[p + 1]):
                if counts[pair_flights[j]] != 0:
                    free = False
                    break
            if free and pair_indptr[p + 1] > pair_indptr[p]:
                _add(pair_indptr, pair_flights, counts, p)
                out[n] = <i32>p
                n += 1
    return picks[:n].copy()


def min_deadhead_fill(i32[::1] counts, const i64[::1] costs, const i32[::1] pair_indptr,
                      const i32[::1] pair_flights, const i32[::1] candidates):
    picks = np.empty(counts.shape[0], dtype=np.int32)
    cdef i32[::1] out = picks
    cdef Py_ssize_t n = 0, k, p, best
    cdef i64 new, dh, best_dh
    with nogil:
        while True:
            best = -1
            best_dh = 0
            for k in range(candidates.shape[0]):
                p = candidates[k]
                new = _new_cover(pair_indptr, pair_flights, counts, p)
                if new == 0:
                    continue
                dh = pair_indptr[p + 1] - pair_indptr[p] - new
                if best < 0 or dh < best_dh or (dh == best_dh and costs[p] < costs[best]):
                    best = p
                    best_dh = dh
            if best < 0:
                break
            _add(pair_indptr, pair_flights, counts, best)
            out[n] = <i32>best
            n += 1
    return picks[:n].copy()


def qi_fill(i32[::1] counts, const i64[::1] costs, const i32[::1] pair_indptr,
            const i32[::1] pair_flights, const i32[::1] candidates):
    picks = np.empty(counts.shape[0], dtype=np.int32)
    cdef i32[::1] out = picks
    cdef Py_ssize_t n = 0, k, p, best
    cdef i64 new, best_new
    with nogil:
        while True:
            best = -1
            best_new = 0
            for k in range(candidates.shape[0]):
                p = candidates[k]
                new = _new_cover(pair_indptr, pair_flights, counts, p)
                if new == 0:
                    continue
                if best < 0 or _qi_better(costs[p], new, costs[best], best_new):
                    best = p
                    best_new = new
            if best < 0:
                break
            _add(pair_indptr, pair_flights, counts, best)
            out[n] = <i32>best
            n += 1
    return picks[:n].copy()


def nearest_symdiff(const i32[::1] pool, const i32[::1] expressed, const i32[::1] pair_indptr,
                    const i32[::1] pair_flights, Py_ssize_t num_flights):
    out = np.empty(pool.shape[0], dtype=np.int64)
    cdef i64[::1] res = out
    mark_arr = np.zeros(num_flights, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mark = mark_arr
    cdef Py_ssize_t a, b, j, p, q
    cdef i64 shared, sym, size_p, size_q
    with nogil:
        for a in range(pool.shape[0]):
            p = pool[a]
            res[a] = pair_indptr[p + 1] - pair_indptr[p]
        for b in range(expressed.shape[0]):
            q = expressed[b]
            size_q = pair_indptr[q + 1] - pair_indptr[q]
            for j in range(pair_indptr[q], pair_indptr[q + 1]):
                mark[pair_flights[j]] = 1
            for a in range(pool.shape[0]):
                p = pool[a]
                size_p = pair_indptr[p + 1] - pair_indptr[p]
                shared = 0
                for j in range(pair_indptr[p], pair_indptr[p + 1]):
                    shared += mark[pair_flights[j]]
                sym = size_p + size_q - 2 * shared
                if b == 0 or sym < res[a]:
                    res[a] = sym
            for j in range(pair_indptr[q], pair_indptr[q + 1]):
                mark[pair_flights[j]] = 0
    return out


cdef struct _Search:
    const i32* pair_indptr
    const i32* pair_flights
    const i32* cand_ptr
    const i32* cand
    i32* counts
    i32* stack
    Py_ssize_t depth
    Py_ssize_t num_flights
    i64 nodes
    i64 node_limit


cdef inline bint _fits(_Search* s, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(s.pair_indptr[p], s.pair_indptr[p + 1]):
        if s.counts[s.pair_flights[j]] != 0:
            return False
    return True


cdef inline void _bump(_Search* s, Py_ssize_t p, i32 d) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(s.pair_indptr[p], s.pair_indptr[p + 1]):
        s.counts[s.pair_flights[j]] += d


cdef int _exact_dfs(_Search* s) noexcept nogil:
    # 1 found, 0 exhausted, -1 node limit
    cdef Py_ssize_t f, k, p, best_f = -1, n, best_n = 0
    cdef int r
    if s.nodes >= s.node_limit:
        return -1
    s.nodes += 1
    for f in range(s.num_flights):
        if s.counts[f] != 0:
            continue
        n = 0
        for k in range(s.cand_ptr[f], s.cand_ptr[f + 1]):
            if _fits(s, s.cand[k]):
                n += 1
                if best_f >= 0 and n >= best_n:
                    break
        if best_f < 0 or n < best_n:
            best_f = f
            best_n = n
            if n == 0:
                return 0
    if best_f < 0:
        return 1
    for k in range(s.cand_ptr[best_f], s.cand_ptr[best_f + 1]):
        p = s.cand[k]
        if not _fits(s, p):
            continue
        _bump(s, p, 1)
        s.stack[s.depth] = <i32>p
        s.depth += 1
        r = _exact_dfs(s)
        if r != 0:
            return r
        s.depth -= 1
        _bump(s, p, -1)
    return 0


def exact_cover(const i32[::1] order, const i32[::1] pair_indptr, const i32[::1] pair_flights,
                Py_ssize_t num_flights, i64 node_limit):
    cdef Py_ssize_t k, j, p, f
    cand_ptr_arr = np.zeros(num_flights + 1, dtype=np.int32)
    cdef i32[::1] cand_ptr = cand_ptr_arr
    for k in range(order.shape[0]):
        p = order[k]
        for j in range(pair_indptr[p], pair_indptr[p + 1]):
            cand_ptr[pair_flights[j] + 1] += 1
    for f in range(num_flights):
        cand_ptr[f + 1] += cand_ptr[f]
    cand_arr = np.empty(cand_ptr[num_flights], dtype=np.int32)
    cdef i32[::1] cand = cand_arr
    fill_arr = cand_ptr_arr[:-1].copy()
    cdef i32[::1] fill = fill_arr
    for k in range(order.shape[0]):
        p = order[k]
        for j in range(pair_indptr[p], pair_indptr[p + 1]):
            f = pair_flights[j]
            cand[fill[f]] = <i32>p
            fill[f] += 1
    counts_arr = np.zeros(num_flights, dtype=np.int32)
    stack_arr = np.empty(num_flights + 1, dtype=np.int32)
    cdef i32[::1] counts = counts_arr
    cdef i32[::1] stack = stack_arr
    cdef _Search s
    cdef int status
    s.pair_indptr = &pair_indptr[0]
    s.pair_flights = &pair_flights[0] if pair_flights.shape[0] else NULL
    s.cand_ptr = &cand_ptr[0]
    s.cand = &cand[0] if cand.shape[0] else NULL
    s.counts = &counts[0] if num_flights else NULL
    s.stack = &stack[0]
    s.depth = 0
    s.num_flights = num_flights
    s.nodes = 0
    s.node_limit = node_limit
    with nogil:
        status = _exact_dfs(&s)
    picks = stack_arr[:s.depth].copy() if status == 1 else np.empty(0, dtype=np.int32)
    return picks, status
