"""Pure-Python set-cover kernels.

Reference twin of the compiled ``_kernels`` module: same signatures, same
in-place updates of ``counts``, same tie breaking.
"""

from __future__ import annotations

import numpy as np


def coverage_counts(pair_indptr, pair_flights, active, num_flights):
    counts = np.zeros(num_flights, dtype=np.int32)
    if len(active):
        idx = np.concatenate([pair_flights[pair_indptr[p]:pair_indptr[p + 1]] for p in active])
        np.add.at(counts, idx, 1)
    return counts


def _flights(pair_indptr, pair_flights):
    ptr = pair_indptr.tolist()
    flat = pair_flights.tolist()
    return lambda p: flat[ptr[p]:ptr[p + 1]]


def _qi_better(cost_a, new_a, cost_b, new_b):
    lhs, rhs = cost_a * new_b, cost_b * new_a
    if lhs != rhs:
        return lhs < rhs
    return cost_a < cost_b


def repair_cover(counts, costs, pair_indptr, pair_flights, flight_indptr, flight_pairs):
    flights = _flights(pair_indptr, pair_flights)
    cnt = counts.tolist()
    cost = costs.tolist()
    fptr = flight_indptr.tolist()
    fpairs = flight_pairs.tolist()
    picks = []
    for f in range(len(cnt)):
        if cnt[f]:
            continue
        best, best_new = -1, 0
        for p in fpairs[fptr[f]:fptr[f + 1]]:
            new = sum(1 for g in flights(p) if cnt[g] == 0)
            if best < 0 or _qi_better(cost[p], new, cost[best], best_new):
                best, best_new = p, new
        if best >= 0:
            for g in flights(best):
                cnt[g] += 1
            picks.append(best)
    counts[:] = cnt
    return np.array(picks, dtype=np.int32)


def drop_redundant(counts, pair_indptr, pair_flights, active):
    flights = _flights(pair_indptr, pair_flights)
    cnt = counts.tolist()
    keep = np.ones(len(active), dtype=np.uint8)
    for k, p in enumerate(active.tolist()):
        fl = flights(p)
        if all(cnt[g] >= 2 for g in fl):
            for g in fl:
                cnt[g] -= 1
            keep[k] = 0
    counts[:] = cnt
    return keep


def zero_deadhead_scan(counts, pair_indptr, pair_flights, order):
    flights = _flights(pair_indptr, pair_flights)
    cnt = counts.tolist()
    picks = []
    for p in order.tolist():
        fl = flights(p)
        if fl and all(cnt[g] == 0 for g in fl):
            for g in fl:
                cnt[g] += 1
            picks.append(p)
    counts[:] = cnt
    return np.array(picks, dtype=np.int32)


def _greedy(counts, costs, pair_indptr, pair_flights, candidates, better):
    flights = _flights(pair_indptr, pair_flights)
    cnt = counts.tolist()
    cost = costs.tolist()
    cands = [(p, flights(p)) for p in candidates.tolist()]
    picks = []
    while True:
        best, best_key = -1, None
        for p, fl in cands:
            new = sum(1 for g in fl if cnt[g] == 0)
            if new == 0:
                continue
            key = (cost[p], new, len(fl))
            if best < 0 or better(key, best_key):
                best, best_key = p, key
        if best < 0:
            break
        for g in flights(best):
            cnt[g] += 1
        picks.append(best)
    counts[:] = cnt
    return np.array(picks, dtype=np.int32)


def _fewer_deadheads(a, b):
    dh_a, dh_b = a[2] - a[1], b[2] - b[1]
    return dh_a < dh_b or (dh_a == dh_b and a[0] < b[0])


def min_deadhead_fill(counts, costs, pair_indptr, pair_flights, candidates):
    return _greedy(counts, costs, pair_indptr, pair_flights, candidates, _fewer_deadheads)


def qi_fill(counts, costs, pair_indptr, pair_flights, candidates):
    return _greedy(counts, costs, pair_indptr, pair_flights, candidates,
                   lambda a, b: _qi_better(a[0], a[1], b[0], b[1]))


def nearest_symdiff(pool, expressed, pair_indptr, pair_flights, num_flights):
    sizes = np.diff(pair_indptr)
    if len(expressed) == 0:
        return sizes[pool].astype(np.int64)

    def incidence(ids):
        m = np.zeros((len(ids), num_flights), dtype=np.int64)
        for r, p in enumerate(ids):
            m[r, pair_flights[pair_indptr[p]:pair_indptr[p + 1]]] = 1
        return m

    shared = incidence(pool) @ incidence(expressed).T
    sym = sizes[pool][:, None] + sizes[expressed][None, :] - 2 * shared
    return sym.min(axis=1).astype(np.int64)


def exact_cover(order, pair_indptr, pair_flights, num_flights, node_limit):
    flights = _flights(pair_indptr, pair_flights)
    cand = [[] for _ in range(num_flights)]
    for p in order.tolist():
        for g in flights(p):
            cand[g].append(p)
    cnt = [0] * num_flights
    stack = []
    nodes = 0

    def fits(p):
        return all(cnt[g] == 0 for g in flights(p))

    def dfs():
        nonlocal nodes
        if nodes >= node_limit:
            return -1
        nodes += 1
        best_f, best_n = -1, 0
        for f in range(num_flights):
            if cnt[f]:
                continue
            n = 0
            for p in cand[f]:
                if fits(p):
                    n += 1
                    if best_f >= 0 and n >= best_n:
                        break
            if best_f < 0 or n < best_n:
                best_f, best_n = f, n
                if n == 0:
                    return 0
        if best_f < 0:
            return 1
        for p in cand[best_f]:
            if not fits(p):
                continue
            for g in flights(p):
                cnt[g] += 1
            stack.append(p)
            r = dfs()
            if r:
                return r
            stack.pop()
            for g in flights(p):
                cnt[g] -= 1
        return 0

    status = dfs()
    picks = np.array(stack if status == 1 else [], dtype=np.int32)
    return picks, status
