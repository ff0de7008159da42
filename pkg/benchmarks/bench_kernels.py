"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--sizes 50 200 500] [--p 0.3] [--repeat 3]

Each kernel is run on the same graph and RNG seed by both backends; the
outputs are checked for equality before timings are reported.
"""

import argparse
import time

import numpy as np

from dpmst._backend import available_backends, get_kernels
from dpmst.graph import erdos_renyi


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n, p, repeat, runs):
    g = erdos_renyi(n, p, 0.0, 10.0, seed=n)
    indptr, adj_edge, adj_node = g.csr
    order = np.lexsort((np.arange(g.n_edges), g.weights)).astype(np.int64)
    scale = 1.0 / (n - 1) / 2.0 * g.n_edges
    cases = {
        "components": lambda k: k.components(n, g.u, g.v),
        "prim": lambda k: k.prim_mst(n, indptr, adj_edge, adj_node, g.weights, 0),
        "kruskal": lambda k: k.kruskal_mst(n, g.u, g.v, order),
        "pamst_run": lambda k: k.pamst_run(n, g.u, g.v, indptr, adj_edge, g.weights, scale, 0,
                                           np.random.default_rng(1))[0],
        f"pamst_batch[{runs}]": lambda k: k.pamst_batch(n, g.u, g.v, indptr, adj_edge, g.weights,
                                                         scale, 0, np.random.default_rng(1), runs),
    }
    rows = []
    for name, fn in cases.items():
        times, outs = {}, {}
        for backend in available_backends():
            times[backend], outs[backend] = _time(lambda: fn(get_kernels(backend)), repeat)
        ref = outs["python"]
        same = all(np.array_equal(np.asarray(o), np.asarray(ref)) for o in outs.values())
        rows.append((n, g.n_edges, name, times.get("python"), times.get("compiled"), same))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 500])
    ap.add_argument("--p", type=float, default=0.3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--runs", type=int, default=20)
    args = ap.parse_args()
    if "compiled" not in available_backends():
        print("compiled extension not built; only the python backend is available")
    print(f"{'n':>5} {'|E|':>7} {'kernel':<16} {'python s':>10} {'compiled s':>11} {'speedup':>8} same")
    for n in args.sizes:
        for n_, e, name, tp, tc, same in bench(n, args.p, args.repeat, args.runs):
            sp = f"{tp / tc:8.1f}" if tc else "       -"
            tcs = f"{tc:11.5f}" if tc is not None else "          -"
            print(f"{n_:>5} {e:>7} {name:<16} {tp:>10.5f} {tcs} {sp} {same}")


if __name__ == "__main__":
    main()
