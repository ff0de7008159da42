"""DBMSTClu: greedy cutting of a weighted spanning tree by validity index.

A clustering is the forest left after removing ("cutting") tree edges.
For each cluster, SEP is the lightest cut edge touching it (1 when nothing
is cut) and DISP the heaviest edge inside it (0 for a singleton). The index
of the whole partition is the size-weighted mean of
``(SEP - DISP) / max(SEP, DISP)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Graph, TreeTopology

WEIGHT_FLOOR = 1e-9


@dataclass(frozen=True)
class WeightedTree:
    """Tree on nodes ``0..n_nodes-1``; local edge ``i`` is ``edges[i]``.

    Weights must lie in (0, 1]. ``edge_ids`` maps local edges back to the
    parent graph when the tree came from one.
    """

    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray
    edge_ids: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if e.shape[0] != self.n_nodes - 1 or w.shape[0] != e.shape[0]:
            raise ValueError(f"a tree on {self.n_nodes} nodes needs {self.n_nodes - 1} weighted edges")
        if e.size and (e.min() < 0 or e.max() >= self.n_nodes):
            raise ValueError("tree edge endpoint out of range")
        if not np.all((w > 0) & (w <= 1)):
            raise ValueError("tree weights must lie in (0, 1]; see WeightedTree.from_raw")
        parent = list(range(self.n_nodes))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in e.tolist():
            ra, rb = find(a), find(b)
            if ra == rb:
                raise ValueError("edges contain a cycle")
            parent[ra] = rb
        e.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "weights", w)
        if self.edge_ids is not None:
            ids = np.asarray(self.edge_ids, dtype=np.int64).reshape(-1)
            ids.flags.writeable = False
            object.__setattr__(self, "edge_ids", ids)

    @classmethod
    def from_raw(cls, n_nodes: int, edges, weights, edge_ids=None,
                 floor: float = WEIGHT_FLOOR) -> WeightedTree:
        """Clamp weights to ``floor`` and divide by their maximum."""
        w = np.maximum(np.asarray(weights, dtype=np.float64), floor)
        if w.size:
            w = w / w.max()
        return cls(n_nodes, edges, w, edge_ids)

    @classmethod
    def from_topology(cls, g: Graph, t: TreeTopology, weights=None) -> WeightedTree:
        """Tree edges of ``g`` with ``weights`` aligned to ``t`` (default: true weights)."""
        idx = t.as_array()
        w = g.weights[idx] if weights is None else np.asarray(weights, dtype=np.float64)
        pairs = np.column_stack([g.u[idx], g.v[idx]])
        return cls.from_raw(g.n_nodes, pairs, w, idx)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class ClusterPartition:
    labels: np.ndarray
    cut_edges: tuple[int, ...]
    dbcvi: float
    history: tuple[tuple[int, float], ...] = field(default=())

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def clusters(self) -> list[frozenset[int]]:
        out: list[set[int]] = [set() for _ in range(self.n_clusters)]
        for node, c in enumerate(self.labels.tolist()):
            out[c].add(node)
        return [frozenset(c) for c in out]

    def subtree_edges(self, tree: WeightedTree) -> list[frozenset[int]]:
        cut = set(self.cut_edges)
        out: list[set[int]] = [set() for _ in range(self.n_clusters)]
        for i, (a, _) in enumerate(tree.edges.tolist()):
            if i not in cut:
                out[self.labels[a]].add(i)
        return [frozenset(s) for s in out]

    def to_dict(self) -> dict:
        return {
            "dbcvi": self.dbcvi,
            "n_clusters": self.n_clusters,
            "cut_edges": list(self.cut_edges),
            "history": [{"edge": e, "dbcvi": d} for e, d in self.history],
            "labels": self.labels.tolist(),
        }


def _label_components(n: int, edges: np.ndarray, cut: set[int]) -> np.ndarray:
    """Canonical labels: clusters numbered by their smallest node."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, (a, b) in enumerate(edges.tolist()):
        if i not in cut:
            adj[a].append(b)
            adj[b].append(a)
    labels = np.full(n, -1, dtype=np.int64)
    k = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = k
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if labels[y] < 0:
                    labels[y] = k
                    stack.append(y)
        k += 1
    labels.flags.writeable = False
    return labels


def initial_partition(tree: WeightedTree) -> ClusterPartition:
    labels = np.zeros(tree.n_nodes, dtype=np.int64)
    labels.flags.writeable = False
    p = ClusterPartition(labels, (), 0.0)
    return ClusterPartition(labels, (), dbcvi(p, tree))


def perform_cut(partition: ClusterPartition, edge: int, tree: WeightedTree) -> ClusterPartition:
    """Remove tree edge ``edge``, splitting its cluster in two."""
    if not 0 <= edge < tree.n_edges:
        raise ValueError(f"{edge} is not an edge of the tree")
    if edge in partition.cut_edges:
        raise ValueError(f"edge {edge} is already cut")
    cut = partition.cut_edges + (edge,)
    labels = _label_components(tree.n_nodes, tree.edges, set(cut))
    p = ClusterPartition(labels, cut, 0.0, partition.history)
    return ClusterPartition(labels, cut, dbcvi(p, tree), partition.history)


def separation(cluster: int, partition: ClusterPartition, tree: WeightedTree) -> float:
    if partition.n_clusters == 1:
        return 1.0
    lab = partition.labels
    touching = [
        tree.weights[e] for e in partition.cut_edges
        if lab[tree.edges[e, 0]] == cluster or lab[tree.edges[e, 1]] == cluster
    ]
    return float(min(touching))


def dispersion(cluster: int, partition: ClusterPartition, tree: WeightedTree) -> float:
    inside = partition.subtree_edges(tree)[cluster]
    if not inside:
        return 0.0
    return float(max(tree.weights[e] for e in inside))


def validity_index(sep: float, disp: float) -> float:
    if sep < 0 or disp < 0:
        raise ValueError("SEP and DISP are non-negative")
    top = max(sep, disp)
    if top == 0.0:
        return 0.0
    return (sep - disp) / top


def _contribution(size: int, n: int, sep: float, disp: float) -> float:
    return (size / n) * validity_index(sep, disp)


def dbcvi(partition: ClusterPartition, tree: WeightedTree) -> float:
    n = tree.n_nodes
    sizes = np.bincount(partition.labels, minlength=partition.n_clusters)
    return math.fsum(
        _contribution(int(sizes[c]), n, separation(c, partition, tree), dispersion(c, partition, tree))
        for c in range(partition.n_clusters)
    )


class _Forest:
    """Mutable working state of the greedy loop."""

    def __init__(self, tree: WeightedTree):
        self.tree = tree
        self.n = tree.n_nodes
        self.w = tree.weights.tolist()
        self.ends = tree.edges.tolist()
        self.adj: list[dict[int, int]] = [{} for _ in range(self.n)]
        for i, (a, b) in enumerate(self.ends):
            self.adj[a][b] = i
            self.adj[b][a] = i
        self.cut_min = [math.inf] * self.n
        self.cut: list[int] = []

    def apply(self, e: int) -> None:
        a, b = self.ends[e]
        del self.adj[a][b]
        del self.adj[b][a]
        self.cut_min[a] = min(self.cut_min[a], self.w[e])
        self.cut_min[b] = min(self.cut_min[b], self.w[e])
        self.cut.append(e)

    def clusters(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            out.append(comp)
        return out

    def summary(self, comp: list[int], k: int) -> tuple[float, float]:
        """(SEP, DISP) of one cluster of a ``k``-cluster partition."""
        sep = 1.0 if k == 1 else min(self.cut_min[x] for x in comp)
        disp = 0.0
        for x in comp:
            for y, e in self.adj[x].items():
                if self.w[e] > disp:
                    disp = self.w[e]
        return sep, disp

    def splits(self, comp: list[int]):
        """Yield ``(edge, (size, sep, disp) per side)`` for every edge of a cluster.

        Rerooting pass: subtree aggregates bottom-up, complements top-down.
        """
        root = min(comp)
        order, parent, pedge = [root], {root: -1}, {root: -1}
        i = 0
        while i < len(order):
            x = order[i]
            i += 1
            for y, e in self.adj[x].items():
                if y != parent[x]:
                    parent[y] = x
                    pedge[y] = e
                    order.append(y)
        children: dict[int, list[int]] = {x: [] for x in order}
        for x in order[1:]:
            children[parent[x]].append(x)
        size, dmax, dsep = {}, {}, {}
        for x in reversed(order):
            s, m, c = 1, -math.inf, self.cut_min[x]
            for ch in children[x]:
                s += size[ch]
                m = max(m, self.w[pedge[ch]], dmax[ch])
                c = min(c, dsep[ch])
            size[x], dmax[x], dsep[x] = s, m, c
        omax, osep = {root: -math.inf}, {root: math.inf}
        for x in order:
            kids = children[x]
            if not kids:
                continue
            up_m = omax[x] if pedge[x] < 0 else max(omax[x], self.w[pedge[x]])
            up_s = min(osep[x], self.cut_min[x])
            vals_m = [max(self.w[pedge[ch]], dmax[ch]) for ch in kids]
            vals_s = [dsep[ch] for ch in kids]
            pre_m, pre_s = [-math.inf], [math.inf]
            for vm, vs in zip(vals_m, vals_s):
                pre_m.append(max(pre_m[-1], vm))
                pre_s.append(min(pre_s[-1], vs))
            suf_m, suf_s = -math.inf, math.inf
            for j in range(len(kids) - 1, -1, -1):
                ch = kids[j]
                omax[ch] = max(up_m, pre_m[j], suf_m)
                osep[ch] = min(up_s, pre_s[j], suf_s)
                suf_m = max(suf_m, vals_m[j])
                suf_s = min(suf_s, vals_s[j])
        total = len(comp)
        for x in order[1:]:
            e = pedge[x]
            we = self.w[e]
            a = (size[x], min(dsep[x], we), max(dmax[x], 0.0))
            b = (total - size[x], min(osep[x], we), max(omax[x], 0.0))
            yield e, a, b


def dbmstclu(tree: WeightedTree, *, strict: bool = False) -> ClusterPartition:
    """Greedy DBCVI-maximizing tree cutting.

    Each round evaluates every uncut edge and keeps the first (lowest index)
    maximizer. The cut is applied when its index is ``>=`` the current one
    (``>`` with ``strict=True``); the running value starts at -1 and the
    loop ends when nothing qualifies or the index reaches 1.
    """
    n = tree.n_nodes
    forest = _Forest(tree)
    history: list[tuple[int, float]] = []
    split = -1.0
    while split < 1.0 and len(forest.cut) < tree.n_edges:
        comps = forest.clusters()
        k = len(comps)
        parts = [(len(c), *forest.summary(c, k)) for c in comps]
        contribs = [_contribution(s, n, sp, dp) for s, sp, dp in parts]
        best_e, best_v = -1, -math.inf
        candidates = []
        for ci, comp in enumerate(comps):
            rest = contribs[:ci] + contribs[ci + 1:]
            for e, a, b in forest.splits(comp):
                candidates.append((e, rest, a, b))
        candidates.sort(key=lambda c: c[0])
        for e, rest, a, b in candidates:
            v = math.fsum(rest + [_contribution(a[0], n, a[1], a[2]),
                                  _contribution(b[0], n, b[1], b[2])])
            if v > best_v:
                best_e, best_v = e, v
        if best_e < 0 or best_v < split or (strict and best_v == split):
            break
        forest.apply(best_e)
        split = best_v
        history.append((best_e, best_v))
    cut = tuple(forest.cut)
    labels = _label_components(n, tree.edges, set(cut))
    p = ClusterPartition(labels, cut, 0.0)
    return ClusterPartition(labels, cut, dbcvi(p, tree), tuple(history))


# -- serialization -----------------------------------------------------------

def write_partition_csv(partition: ClusterPartition, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["node", "cluster"])
        for node, c in enumerate(partition.labels.tolist()):
            out.writerow([node, c])


def partition_to_json(partition: ClusterPartition, extra: dict | None = None) -> str:
    d = partition.to_dict()
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True)


def labels_from_clusters(n: int, clusters: Sequence[Sequence[int]]) -> np.ndarray:
    labels = np.full(n, -1, dtype=np.int64)
    for k, c in enumerate(clusters):
        labels[list(c)] = k
    if np.any(labels < 0):
        raise ValueError("clusters do not cover every node")
    return labels
