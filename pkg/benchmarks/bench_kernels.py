"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--flights 50] [--repeat 20] [--generations 100]

Each kernel runs on the same inputs under both backends; outputs are
checked for equality before timings are reported. A full GA4 run under
each backend, in a fresh interpreter, follows.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from crewpair.ga.operators import dhd_min_initialize
from crewpair.kernels import backend_module
from crewpair.oracle import SyntheticSpec, generate_instance
from crewpair.pairings import enumerate_pairings


def cases(ap, rng):
    ids = np.arange(len(ap), dtype=np.int32)
    pop = dhd_min_initialize(ap, 2, rng)
    active = pop[0].active().astype(np.int32)
    partial = active[: len(active) // 2]
    pool = np.unique(np.concatenate([pop[0].pairings, pop[1].pairings])).astype(np.int32)
    order = rng.permutation(pool).astype(np.int32)
    F = ap.num_flights
    zeros = lambda: np.zeros(F, dtype=np.int32)

    def counts_of(sel):
        c = zeros()
        for p in sel:
            c[ap.flights_of(p)] += 1
        return c

    c_partial, c_head = counts_of(partial), counts_of(ids[:60])
    return {
        "coverage_counts": lambda k: k.coverage_counts(ap.pair_indptr, ap.pair_flights, active, F),
        "repair_cover": lambda k: k.repair_cover(c_partial.copy(), ap.costs, ap.pair_indptr, ap.pair_flights,
                                                 ap.flight_indptr, ap.flight_pairs),
        "drop_redundant": lambda k: k.drop_redundant(c_head.copy(), ap.pair_indptr, ap.pair_flights, ids[:60]),
        "zero_deadhead_scan": lambda k: k.zero_deadhead_scan(zeros(), ap.pair_indptr, ap.pair_flights,
                                                             rng_order(ids)),
        "min_deadhead_fill": lambda k: k.min_deadhead_fill(c_partial.copy(), ap.costs, ap.pair_indptr,
                                                           ap.pair_flights, ids),
        "qi_fill": lambda k: k.qi_fill(zeros(), ap.costs, ap.pair_indptr, ap.pair_flights, ids),
        "nearest_symdiff": lambda k: k.nearest_symdiff(pool, active, ap.pair_indptr, ap.pair_flights, F),
        "exact_cover": lambda k: k.exact_cover(order, ap.pair_indptr, ap.pair_flights, F, 100_000),
    }


_fixed = {}


def rng_order(ids):
    if "order" not in _fixed:
        _fixed["order"] = np.random.default_rng(7).permutation(ids).astype(np.int32)
    return _fixed["order"]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


_GA_RUN = """
import json, sys, time
from crewpair import kernels
from crewpair.ga.engine import GaConfig, run
from crewpair.oracle import SyntheticSpec, generate_instance
from crewpair.pairings import enumerate_pairings
flights, seed, gens = map(int, sys.argv[1:])
ap = enumerate_pairings(generate_instance(SyntheticSpec(flights, seed=seed)))
t = time.perf_counter()
rec = run(ap, GaConfig("GA4", generations=gens, seed=seed, dhd_penalty_cents=10_000))
print(json.dumps({"backend": kernels.BACKEND, "seconds": time.perf_counter() - t,
                  "record": rec.deterministic_view()}))
"""


def end_to_end(flights, seed, generations):
    out = {}
    for backend in ("python", "cython"):
        env = {**os.environ, "CREWPAIR_BACKEND": backend}
        proc = subprocess.run([sys.executable, "-c", _GA_RUN, str(flights), str(seed), str(generations)],
                              env=env, capture_output=True, text=True, check=True)
        out[backend] = json.loads(proc.stdout)
    if out["python"]["record"] != out["cython"]["record"]:
        raise SystemExit("GA runs differ between backends")
    tp, tc = out["python"]["seconds"], out["cython"]["seconds"]
    fitness = out["cython"]["record"]["fitness_cents"]
    print(f"\nGA4, {generations} generations (fitness {fitness} under both)")
    print(f"{'run':20s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    print(f"{'end_to_end':20s} {tp:10.3f} {tc:10.3f} {tp / tc:7.1f}x")


def main():
    ap_ = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap_.add_argument("--flights", type=int, default=50)
    ap_.add_argument("--seed", type=int, default=0)
    ap_.add_argument("--repeat", type=int, default=20)
    ap_.add_argument("--generations", type=int, default=100, help="GA generations for the end-to-end run")
    args = ap_.parse_args()

    allpairs = enumerate_pairings(generate_instance(SyntheticSpec(args.flights, seed=args.seed)))
    print(f"flights={allpairs.num_flights} pairings={len(allpairs)}")
    py, cy = backend_module("python"), backend_module("cython")
    table = cases(allpairs, np.random.default_rng(args.seed))
    print(f"{'kernel':20s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, call in table.items():
        if not same(call(py), call(cy)):
            raise SystemExit(f"{name}: backends disagree")
        tp, tc = timeit(lambda: call(py), args.repeat), timeit(lambda: call(cy), args.repeat)
        print(f"{name:20s} {tp * 1e3:10.3f} {tc * 1e3:10.3f} {tp / tc:7.1f}x")
    if args.generations > 0:
        end_to_end(args.flights, args.seed, args.generations)


if __name__ == "__main__":
    main()
