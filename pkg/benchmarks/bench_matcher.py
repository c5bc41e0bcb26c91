"""Benchmark the path-enumeration kernel: compiled backend vs pure Python.

The DFS in canmatch._kernels is the package's hot loop. Both backends run
the identical function body, so outputs are asserted equal before timing.

    python benchmarks/bench_matcher.py [--repeats N] [--sigma S]

Set CANMATCH_NUMBA=0 to see the script degrade to python-vs-python.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from canmatch import _kernels
from canmatch.matcher import _graph_csr
from canmatch.simulate import make_synthetic_grid, sample_route

# (grid side, route nodes): graph sizes 100..484, queries 4..10 nodes
CASES = [(10, 4), (10, 8), (16, 6), (22, 6), (22, 10)]
MAX_COUNT = 200_000


def make_instance(side: int, q_nodes: int, seed: int, sigma: float):
    g = make_synthetic_grid(side, 250.0, 0.15, seed=seed)
    route = sample_route(g, q_nodes, seed=seed + 1)
    ids, indptr, nbrs, lens = _graph_csr(g)
    lut = {}
    for e in g.edges:
        lut[(e.u, e.v)] = e.length_m
        lut[(e.v, e.u)] = e.length_m
    rng = np.random.default_rng(seed + 2)
    # true route lengths, perturbed within sigma/2 so the route stays admitted
    wr = np.array(
        [lut[(u, v)] for u, v in zip(route.node_ids, route.node_ids[1:])]
    ) * rng.uniform(1 - sigma / 2, 1 + sigma / 2, size=q_nodes - 1)
    return len(ids), indptr, nbrs, lens, wr


def best_of(fn, args, out, repeats: int):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args, out)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="best-of repeats per case")
    ap.add_argument("--sigma", type=float, default=0.1, help="edge length tolerance")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    active = _kernels.backend()
    if active == "python":
        print("note: compiled backend unavailable or disabled; both columns run python")

    # compile outside the timed region
    warm = make_instance(4, 3, args.seed, args.sigma)
    out = np.empty(MAX_COUNT * 16, dtype=np.int64)
    _kernels.enumerate_matches(*warm[1:], args.sigma, MAX_COUNT, False, out)

    print(f"{'nodes':>6} {'q':>3} {'paths':>6} {'python':>10} {active:>10} {'speedup':>8}")
    speedups = []
    for side, q_nodes in CASES:
        n, indptr, nbrs, lens, wr = make_instance(side, q_nodes, args.seed, args.sigma)
        call = (indptr, nbrs, lens, wr, args.sigma, MAX_COUNT, False)
        t_py, r_py = best_of(_kernels.enumerate_matches_python, call, out.copy(), args.repeats)
        t_jit, r_jit = best_of(_kernels.enumerate_matches, call, out.copy(), args.repeats)
        assert r_py == r_jit, f"backends disagree on {side}x{side} q={q_nodes}"
        count = r_py[0]
        speedups.append(t_py / t_jit)
        print(
            f"{n:>6} {q_nodes:>3} {count:>6} {t_py * 1e3:>8.2f}ms {t_jit * 1e3:>8.2f}ms"
            f" {t_py / t_jit:>7.1f}x"
        )
    print(f"median speedup: {np.median(speedups):.1f}x")


if __name__ == "__main__":
    main()
