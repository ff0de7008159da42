"""Acceptance criteria 1-12, each run at its stated tolerance.

Every test records one PASS/FAIL line, printed together at the end of the
pytest run under "acceptance criteria".
"""

import io
import itertools
import json
import math
import time

import numpy as np
from scipy.stats import chisquare

from dpmst.bounds import (BoundInputs, crossover_alpha, lambert_w0, laplace_bound, laplace_sum_cdf,
                          pamst_bound, structure_preservation_prob)
from dpmst.cli import main
from dpmst.clustering import WeightedTree, dbmstclu
from dpmst.experiments import (ExperimentConfig, generate_shape_dataset, run_experiment,
                               trial_rng)
from dpmst.graph import Graph, erdos_renyi, mst_kruskal, mst_prim, tree_weight
from dpmst.mechanisms import (empirical_max_divergence, exponential_choice,
                              exponential_probabilities, laplace_noise)
from dpmst.pamst import (UtilityConfig, exact_output_distribution, pamst, pamst_errors,
                         pamst_sample_trees, w_star)
from helpers import k3, ref_greedy, spanning_trees

SEED = 0


# -- 1 -------------------------------------------------------------------------

def is_connected(n, edges):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(x) for x in range(n)}) == 1


def all_connected_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if len(chosen) >= n - 1 and is_connected(n, chosen):
            yield chosen


def brute_force_mst_weight(g):
    return min(math.fsum(g.weights[list(t)]) for t in spanning_trees(g))


def test_criterion_01_mst_oracles(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 501))
        p = min(1.0, max(0.05, 2 * math.log(n) / n))
        g = erdos_renyi(n, p, 0, 10, seed=rng)
        worst = max(worst, abs(tree_weight(mst_prim(g), g) - tree_weight(mst_kruskal(g), g)))
    small_bad = small_count = 0
    for n in range(1, 6):
        for edges in all_connected_graphs(n):
            ties = rng.random() < 0.5
            w = rng.integers(0, 4, len(edges)).astype(float) if ties else rng.random(len(edges))
            g = Graph(n, edges, w)
            best = brute_force_mst_weight(g) if n > 1 else 0.0
            small_count += 1
            small_bad += tree_weight(mst_prim(g), g) != best or tree_weight(mst_kruskal(g), g) != best
    for n in (6, 7):
        pairs = list(itertools.combinations(range(n), 2))
        for k in range(300):
            m = len(pairs) if k == 0 else int(rng.integers(n - 1, len(pairs) + 1))
            edges = []
            while not is_connected(n, edges):
                idx = sorted(rng.choice(len(pairs), m, replace=False).tolist())
                edges = [pairs[i] for i in idx]
            w = rng.integers(0, 4, m).astype(float) if k % 2 else rng.random(m)
            g = Graph(n, edges, w)
            best = brute_force_mst_weight(g)
            small_count += 1
            small_bad += tree_weight(mst_prim(g), g) != best or tree_weight(mst_kruskal(g), g) != best
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and small_bad == 0 and elapsed < 60
    criterion(1, ok, f"max |prim-kruskal|={worst:.2e} on 1000 ER graphs; "
                     f"{small_bad}/{small_count} small-graph mismatches; {elapsed:.1f}s")
    assert ok


# -- 2 -------------------------------------------------------------------------

def test_criterion_02_exponential_mechanism(criterion):
    rng = np.random.default_rng(SEED)
    cases = [([0.0, -1.0, -2.0], 1.0, 2.0),
             ([0.0, -0.5, -0.5, -3.0], 0.5, 1.0),
             ([1.0, 0.0, 0.3, -0.2, 0.9], 1.0, 3.0)]
    pvals = []
    for u, sens, eps in cases:
        draws = [exponential_choice(u, sens, eps, rng) for _ in range(10**5)]
        counts = np.bincount(draws, minlength=len(u))
        pvals.append(chisquare(counts, exponential_probabilities(u, sens, eps) * 10**5).pvalue)
    hits = sum(exponential_choice([0.0, -1.0], 1.0, 2.0, rng) == 0 for _ in range(10**5))
    p0 = hits / 10**5
    ok = min(pvals) > 0.001 and abs(p0 - 0.7311) <= 0.005
    criterion(2, ok, f"chi2 p-values {[round(float(p), 4) for p in pvals]}; P(index 0)={p0:.4f}")
    assert ok


# -- 3 -------------------------------------------------------------------------

def worst_neighbor(w, eps):
    """The corner of the l-inf ball of radius 1/2 with the largest exact divergence."""
    g = k3(*w)
    p = exact_output_distribution(g, eps)
    best, arg = -1.0, None
    for shift in itertools.product((-0.5, 0.0, 0.5), repeat=3):
        h = g.with_weights(np.asarray(w) + np.asarray(shift))
        q = exact_output_distribution(h, eps)
        d = max(abs(math.log(p[t] / q[t])) for t in p)
        if d > best:
            best, arg = d, h
    return g, arg, best


def tree_codes(runs):
    return ((1 << runs[:, 0]) | (1 << runs[:, 1])).tolist()


def test_criterion_03_privacy_audit(criterion):
    details, ok = [], True
    for eps in (0.5, 1.0):
        g, h, exact = worst_neighbor((1.0, 2.0, 3.0), eps)
        x = tree_codes(pamst_sample_trees(g, eps, UtilityConfig.raw(), 10**6, trial_rng(SEED, 0, f"x{eps}")))
        y = tree_codes(pamst_sample_trees(h, eps, UtilityConfig.raw(), 10**6, trial_rng(SEED, 0, f"y{eps}")))
        d = max(empirical_max_divergence(x, y), empirical_max_divergence(y, x))
        ok &= d <= eps + 0.05
        details.append(f"eps={eps}: empirical {d:.4f} (exact {exact:.4f})")
    criterion(3, ok, "; ".join(details))
    assert ok


# -- 4 -------------------------------------------------------------------------

def test_criterion_04_w_star_below_mst(criterion):
    rng = np.random.default_rng(SEED)
    violations, worst = 0, -math.inf
    for k in range(10**4):
        n = int(rng.integers(2, 101))
        p = min(1.0, max(float(rng.uniform(0.05, 1.0)), 2 * math.log(n) / n))
        g = erdos_renyi(n, p, 0, 10, seed=rng)
        if k % 3 == 0:
            g = g.with_weights(np.floor(g.weights))
        eps = float(10 ** rng.uniform(-2, 2))
        cfg = UtilityConfig.normalized(g) if k % 2 else UtilityConfig.raw()
        _, trace = pamst(g, eps, cfg, start=int(rng.integers(n)), rng=rng)
        gap = w_star(trace) - tree_weight(mst_prim(g), g)
        worst = max(worst, gap)
        violations += gap > 1e-9
    ok = violations == 0
    criterion(4, ok, f"{violations} violations in 10^4 runs; max w*-MST = {worst:.3g}")
    assert ok


# -- 5 -------------------------------------------------------------------------

def test_criterion_05_bound_coverage(criterion):
    gamma, eps, runs = 0.1, 1.0, 1000
    over = 0
    for t in range(runs):
        g = erdos_renyi(50, 0.5, 0, 10, seed=trial_rng(SEED, t, "coverage graph"))
        err = pamst_errors(g, eps, UtilityConfig.normalized(g), 1, trial_rng(SEED, t, "coverage run"))[0]
        over += err > pamst_bound(BoundInputs(50, g.n_edges, eps, gamma))
    limit = gamma + 3 * math.sqrt(gamma * (1 - gamma) / runs)
    ok = over / runs <= limit
    criterion(5, ok, f"fraction above bound {over / runs:.3f} <= {limit:.3f}")
    assert ok


# -- 6 -------------------------------------------------------------------------

def edge_counts(lo, hi):
    """Every count near the threshold, then a stride up to the complete graph."""
    near = range(lo, min(hi, lo + 200) + 1)
    far = np.unique(np.linspace(lo, hi, 200).round().astype(int)).tolist()
    return sorted(set(near) | set(far) | {hi})


def test_criterion_06_bound_ordering(criterion):
    bad, checked = [], 0
    for n in range(5, 201, 5):
        max_edges = n * (n + 1) // 2
        for gamma in (0.01, 0.05, 0.1, 0.5, 1.0):
            a_star = crossover_alpha(n, gamma)
            for eps in (0.1, 1.0):
                for alpha in (3.0, a_star):
                    lo = math.ceil(alpha * n)
                    for ne in edge_counts(lo, max_edges) if lo <= max_edges else ():
                        b = BoundInputs(n + 1, ne, eps, gamma)
                        checked += 1
                        if pamst_bound(b) > laplace_bound(b):
                            bad.append((n, gamma, eps, ne))
    ok = not bad
    criterion(6, ok, f"{len(bad)} counterexamples in {checked} checks")
    assert ok, bad[:5]


# -- 7 -------------------------------------------------------------------------

def test_criterion_07_lambert_w(criterion):
    xs = -1 / math.e + np.concatenate([[0.0], np.geomspace(1e-16, 1e6 + 1 / math.e, 10**4 - 1)])
    worst = max(abs(lambert_w0(x) * math.exp(lambert_w0(x)) - x) / max(1.0, abs(x))
                for x in xs.tolist())
    w1 = lambert_w0(1.0)
    ok = worst <= 1e-10 and abs(w1 - 0.5671432904) <= 1e-9
    criterion(7, ok, f"max scaled residual {worst:.2e}; W(1)={w1:.10f}")
    assert ok


# -- 8 -------------------------------------------------------------------------

def test_criterion_08_laplace_sums(criterion):
    rng = np.random.default_rng(SEED)
    s = np.sort(laplace_noise(1.0, 10**6, rng) + laplace_noise(1.0, 10**6, rng))
    ts = np.linspace(0, 20, 4001)
    ecdf_pos = np.searchsorted(s, ts, side="right") / s.size
    ecdf_neg = np.searchsorted(s, -ts, side="left") / s.size
    f = np.array([laplace_sum_cdf(t, 1.0) for t in ts])
    sup = float(max(np.max(np.abs(ecdf_pos - f)), np.max(np.abs(ecdf_neg - (1 - f)))))
    prob = structure_preservation_prob([10.0], [1, 1000], 1.0).probability
    ok = sup <= 0.005 and abs(prob - 0.8637) <= 0.005
    criterion(8, ok, f"sup distance {sup:.4f}; worked instance {prob:.4f}")
    assert ok


# -- 9 -------------------------------------------------------------------------

def test_criterion_09_error_table_trend(criterion):
    cfg = ExperimentConfig.from_dict({
        "kind": "error_table", "seed": SEED, "trials": 100, "epsilons": [0.1, 0.5, 1.0],
        "mechanisms": ["pamst", "laplace_mst"],
        "graph": {"n_nodes": 300, "densities": [0.1, 0.5, 0.9], "w_low": 0, "w_high": 10},
    })
    t0 = time.perf_counter()
    rows = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    cell = {(r.density, r.epsilon, r.mechanism): r for r in rows}
    dens, epss = (0.1, 0.5, 0.9), (0.1, 0.5, 1.0)
    separated = all(
        cell[p, e, "pamst"].mean_error + cell[p, e, "pamst"].ci_half_width
        < cell[p, e, "laplace_mst"].mean_error - cell[p, e, "laplace_mst"].ci_half_width
        for p in dens for e in epss)
    ratios = {e: max(cell[p, e, "laplace_mst"].mean_error for p in dens)
              / min(cell[p, e, "laplace_mst"].mean_error for p in dens) for e in epss}
    flat = all(r <= 1.5 for r in ratios.values())
    decreasing = all(cell[0.1, e, "pamst"].mean_error > cell[0.5, e, "pamst"].mean_error
                     > cell[0.9, e, "pamst"].mean_error for e in epss)
    ok = separated and flat and decreasing and elapsed < 600
    table = ", ".join(f"p={p},eps={e}: {cell[p, e, 'pamst'].mean_error:.3g}/"
                      f"{cell[p, e, 'laplace_mst'].mean_error:.4g}" for p in dens for e in epss)
    criterion(9, ok, f"CIs separated={separated}; laplace max/min "
                     f"{ {e: round(r, 4) for e, r in ratios.items()} }; pamst decreasing={decreasing}; "
                     f"{elapsed:.0f}s; pamst/laplace means [{table}]")
    assert ok


# -- 10 ------------------------------------------------------------------------

def test_criterion_10_dbmstclu(criterion):
    path = WeightedTree(3, [(0, 1), (1, 2)], [0.1, 0.9])
    res = dbmstclu(path)
    path_ok = res.cut_edges == (1,) and abs(res.dbcvi - 25 / 27) <= 1e-9
    rng = np.random.default_rng(SEED)
    mismatches = non_monotone = 0
    for k in range(2000):
        n = int(rng.integers(2, 9))
        edges = [(int(rng.integers(i)), i) for i in range(1, n)]
        w = rng.choice([0.25, 0.5, 1.0], n - 1) if k % 2 else rng.uniform(0.01, 1, n - 1)
        tree = WeightedTree(n, edges, w)
        got = dbmstclu(tree)
        mismatches += list(got.history) != ref_greedy(n, edges, w.tolist())
        vals = [v for _, v in got.history]
        non_monotone += any(b < a for a, b in zip(vals, vals[1:]))
    ok = path_ok and mismatches == 0 and non_monotone == 0
    criterion(10, ok, f"path (0.1, 0.9): cuts {list(res.cut_edges)}, final DBCVI {res.dbcvi:.6f}, "
                      f"history {[(e, round(v, 6)) for e, v in res.history]}; "
                      f"reference mismatches {mismatches}/2000; non-monotone runs {non_monotone}")
    assert ok


# -- 11 ------------------------------------------------------------------------

def test_criterion_11_clustering_pipeline(criterion):
    data = {"shape": "blobs", "n_points": 100, "noise_scale": 1.0, "separation": 40.0, "radius": 40.0}
    cfg = ExperimentConfig.from_dict({
        "kind": "clustering", "seed": SEED, "trials": 50, "epsilons": [1.0, 0.1],
        "mechanisms": ["pamst", "laplace_mst"], "data": data,
    })
    cloud = generate_shape_dataset("blobs", 100, 1.0, trial_rng(SEED, 0, "data"), separation=40.0)
    spread = max(float(np.sqrt(np.mean(np.sum((pts - pts.mean(axis=0)) ** 2, axis=1))))
                 for pts in (cloud.points[cloud.labels == c] for c in (0, 1)))
    a, b = cloud.points[cloud.labels == 0], cloud.points[cloud.labels == 1]
    gap = float(np.min(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)))
    rows = {(r.epsilon, r.mechanism): r for r in run_experiment(cfg)}
    frac = rows[1.0, "pamst"].frac_ari_ge_0_9
    low_p, low_l = rows[0.1, "pamst"].mean_ari, rows[0.1, "laplace_mst"].mean_ari
    ok = gap >= 10 * spread and frac >= 0.8 and low_p > low_l
    criterion(11, ok, f"gap/spread={gap / spread:.1f}; eps=1 fraction ARI>=0.9: {frac:.2f}; "
                      f"eps=0.1 mean ARI pamst {low_p:.3f} vs laplace {low_l:.3f}")
    assert ok


# -- 12 ------------------------------------------------------------------------

def test_criterion_12_determinism(criterion, tmp_path):
    configs = {
        "table": {"kind": "error_table", "seed": 7, "trials": 5, "epsilons": [0.5, 1.0],
                  "mechanisms": ["pamst", "laplace_mst"], "graph": {"n_nodes": 40, "densities": [0.2, 0.7]}},
        "clust": {"kind": "clustering", "seed": 7, "trials": 4, "epsilons": [1.0],
                  "mechanisms": ["pamst", "laplace_mst"],
                  "data": {"shape": "moons", "n_points": 40, "radius": 12.0, "noise_scale": 0.5}},
    }
    identical = True
    for name, body in configs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(body))
        outs = []
        for run, workers in enumerate(("1", "2")):
            csv_p, json_p = tmp_path / f"{name}{run}.csv", tmp_path / f"{name}{run}.json"
            code = main(["experiment", str(path), "--csv", str(csv_p), "--json", str(json_p),
                         "--workers", workers], io.StringIO())
            assert code == 0
            outs.append((csv_p.read_bytes(), json_p.read_bytes()))
        identical &= outs[0] == outs[1]
    criterion(12, identical, "error-table and clustering configs re-run byte-identical (CSV and JSON)")
    assert identical
