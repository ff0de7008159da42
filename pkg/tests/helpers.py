import itertools
import math

import numpy as np

from dpmst.graph import Graph


def k3(w01=1.0, w02=2.0, w12=3.0) -> Graph:
    return Graph(3, [(0, 1), (0, 2), (1, 2)], [w01, w02, w12])


def spanning_trees(g: Graph):
    """Every spanning tree of a small graph, as sorted edge-index tuples."""
    n = g.n_nodes
    for combo in itertools.combinations(range(g.n_edges), n - 1):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        ok = True
        for e in combo:
            ra, rb = find(int(g.u[e])), find(int(g.v[e]))
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            yield combo


def random_connected(rng: np.random.Generator, n: int, extra: int, integer: bool = False) -> Graph:
    """Random spanning tree plus ``extra`` random chords."""
    pairs = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        pairs.add((j, i))
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in pairs]
    rng.shuffle(all_pairs)
    pairs.update(all_pairs[:extra])
    pairs = sorted(pairs)
    order = rng.permutation(len(pairs))
    pairs = [pairs[i] for i in order]
    w = rng.integers(0, 5, len(pairs)).astype(float) if integer else rng.random(len(pairs)) * 10
    return Graph(n, pairs, w)


# DBMSTClu written straight from the definitions, sharing no code with the package

def ref_components(n, edges, cut):
    comp = list(range(n))

    def root(a):
        while comp[a] != a:
            a = comp[a]
        return a

    for i, (a, b) in enumerate(edges):
        if i not in cut:
            comp[root(a)] = root(b)
    groups = {}
    for x in range(n):
        groups.setdefault(root(x), []).append(x)
    return list(groups.values())


def ref_dbcvi(n, edges, w, cut):
    clusters = ref_components(n, edges, cut)
    terms = []
    for c in clusters:
        cs = set(c)
        if len(clusters) == 1:
            sep = 1.0
        else:
            sep = min(w[i] for i in cut if edges[i][0] in cs or edges[i][1] in cs)
        inner = [w[i] for i, (a, b) in enumerate(edges) if i not in cut and a in cs]
        disp = max(inner) if inner else 0.0
        top = max(sep, disp)
        v = 0.0 if top == 0 else (sep - disp) / top
        terms.append(len(c) / n * v)
    return math.fsum(terms)


def ref_greedy(n, edges, w):
    cut: list[int] = []
    current = -1.0
    history = []
    while current < 1.0 and len(cut) < len(edges):
        scores = [(ref_dbcvi(n, edges, w, set(cut) | {e}), e)
                  for e in range(len(edges)) if e not in cut]
        best = max(s for s, _ in scores)
        e = min(e for s, e in scores if s == best)
        if best < current:
            break
        cut.append(e)
        current = best
        history.append((e, best))
    return history
