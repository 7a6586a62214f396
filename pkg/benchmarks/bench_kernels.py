"""Time the compiled and pure-Python kernels on the synthetic city.

    python benchmarks/bench_kernels.py [--repeat N] [--columns C --rows R]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from transit_assign import kernels
from transit_assign.network import INF
from transit_assign.preprocess import preprocess
from transit_assign.profiles import PenaltyParams, compute_profiles
from transit_assign.synthetic import synthetic_city


def best_of(repeat, fn):
    samples = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t)
    return min(samples), statistics.median(samples)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--columns", type=int, default=10)
    ap.add_argument("--rows", type=int, default=5)
    ap.add_argument("--destinations", type=int, default=10)
    args = ap.parse_args()

    net = synthetic_city(seed=0, columns=args.columns, rows=args.rows)
    art = preprocess(net)
    indptr, idx, w = art.net.walking_graph.csr()
    nv = art.net.walking_graph.num_vertices
    sources = np.linspace(0, nv - 1, args.destinations, dtype=np.int64)
    finals = [art.buckets.many_to_one(int(v)) for v in sources]
    pp = PenaltyParams()
    print(f"network: {art.net.num_stops} stops, {art.net.num_connections} connections, {nv} vertices")

    backends = kernels.backends()
    results = {}
    for name, impl in backends.items():
        def run_dijkstra(impl=impl):
            for s in sources:
                impl.dijkstra(indptr, idx, w, int(s), INF, None)

        def run_profiles(impl=impl):
            for fd in finals:
                compute_profiles(art.net, art.shortcuts, fd, pp, backend=impl)

        results[name] = {"dijkstra": best_of(args.repeat, run_dijkstra),
                         "profile_scan": best_of(args.repeat, run_profiles)}

    print(f"{'kernel':<14}{'backend':<10}{'best [ms]':>12}{'median [ms]':>14}")
    for kernel in ("dijkstra", "profile_scan"):
        for name in backends:
            best, med = results[name][kernel]
            print(f"{kernel:<14}{name:<10}{best * 1e3:>12.2f}{med * 1e3:>14.2f}")
        if "cython" in results:
            speedup = results["python"][kernel][0] / results["cython"][kernel][0]
            print(f"{kernel:<14}{'speedup':<10}{speedup:>12.1f}x")
    if "cython" not in backends:
        print("compiled extension not built; only the Python fallback was timed")


if __name__ == "__main__":
    main()
