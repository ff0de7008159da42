"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module; selected by
``dpmst._backend`` when the extension is missing or ``DPMST_BACKEND=python``.
Adjacency is passed in CSR form: ``indptr`` (n+1), and for each node the
incident edge ids ``adj_edge`` and opposite endpoints ``adj_node`` sorted by
edge id.
"""

import heapq

import numpy as np

from ._sampling import gumbel

NAME = "python"


def _find(parent: list, a: int) -> int:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def components(n: int, u: np.ndarray, v: np.ndarray) -> int:
    """Number of connected components of the graph on ``n`` nodes."""
    parent = list(range(n))
    count = n
    for a, b in zip(u.tolist(), v.tolist()):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


def prim_mst(n, indptr, adj_edge, adj_node, w, start=0):
    """Lazy Prim keyed on (weight, edge id); returns edges in insertion order."""
    if n <= 1:
        return np.empty(0, dtype=np.int64)
    indptr_l = indptr.tolist()
    adj_e = adj_edge.tolist()
    adj_n = adj_node.tolist()
    wl = w.tolist()
    in_tree = [False] * n
    in_tree[start] = True
    heap = []
    for k in range(indptr_l[start], indptr_l[start + 1]):
        heapq.heappush(heap, (wl[adj_e[k]], adj_e[k], adj_n[k]))
    out = []
    while heap and len(out) < n - 1:
        _, e, x = heapq.heappop(heap)
        if in_tree[x]:
            continue
        in_tree[x] = True
        out.append(e)
        for k in range(indptr_l[x], indptr_l[x + 1]):
            if not in_tree[adj_n[k]]:
                heapq.heappush(heap, (wl[adj_e[k]], adj_e[k], adj_n[k]))
    return np.asarray(out, dtype=np.int64)


def kruskal_mst(n, u, v, order):
    """Kruskal over edges visited in ``order``; returns accepted edge ids."""
    parent = list(range(n))
    ul, vl = u.tolist(), v.tolist()
    out = []
    for e in order.tolist():
        ra, rb = _find(parent, ul[e]), _find(parent, vl[e])
        if ra != rb:
            parent[ra] = rb
            out.append(e)
            if len(out) == n - 1:
                break
    return np.asarray(out, dtype=np.int64)


def pamst_run(n, u, v, indptr, adj_edge, w, scale, start, rng):
    """One PAMST run.

    Returns ``(chosen, range_sizes, range_mins)``, one entry per step. Each
    step draws one uniform per range edge, in ascending edge-id order.
    """
    n_edges = u.shape[0]
    in_s = np.zeros(n, dtype=bool)
    xor = np.zeros(n_edges, dtype=bool)
    chosen = np.empty(n - 1, dtype=np.int64)
    sizes = np.empty(n - 1, dtype=np.int64)
    mins = np.empty(n - 1, dtype=np.float64)
    in_s[start] = True
    xor[adj_edge[indptr[start]:indptr[start + 1]]] ^= True
    for step in range(n - 1):
        r = np.flatnonzero(xor)
        wr = w[r]
        m = wr.min()
        keys = scale * -np.abs(wr - m) + gumbel(rng, r.shape[0])
        e = int(r[int(np.argmax(keys))])
        chosen[step] = e
        sizes[step] = r.shape[0]
        mins[step] = m
        x = int(v[e]) if in_s[u[e]] else int(u[e])
        in_s[x] = True
        xor[adj_edge[indptr[x]:indptr[x + 1]]] ^= True
    return chosen, sizes, mins


def pamst_batch(n, u, v, indptr, adj_edge, w, scale, start, rng, n_runs):
    """``n_runs`` independent PAMST runs; row ``i`` holds run ``i``'s choices."""
    out = np.empty((n_runs, max(n - 1, 0)), dtype=np.int64)
    for i in range(n_runs):
        out[i] = pamst_run(n, u, v, indptr, adj_edge, w, scale, start, rng)[0]
    return out
