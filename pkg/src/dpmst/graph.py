"""Graphs, spanning-tree topologies, generators and deterministic MST baselines.

Edge identity is the construction index. Every tie-break in the package
(MST order, exponential-mechanism range order) falls back to it, so runs are
reproducible even on integer test weights where ties are common.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from ._backend import kernels


class GraphError(ValueError):
    """Base class for invalid graph input."""


class GraphFormatError(GraphError):
    """Malformed edge-list or point-cloud document."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    """Raised when a graph that must be connected has several components.

    ``min_radius`` is set by :func:`epsilon_graph`: the smallest radius that
    would have produced a connected graph.
    """

    def __init__(self, message: str, components: int, min_radius: float | None = None):
        super().__init__(message)
        self.components = components
        self.min_radius = min_radius


class NotSpanningTreeError(GraphError):
    pass


class GenerationError(GraphError):
    """A random generator exhausted its retry budget."""


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Graph:
    """Immutable simple, undirected, connected weighted graph.

    Parameters
    ----------
    n_nodes : int
        Nodes are ``0 .. n_nodes-1``.
    edges : sequence of (u, v) pairs or an (E, 2) integer array
        Edge ``i`` is ``edges[i]``; the order is kept for tie-breaking.
    weights : sequence of float
        ``weights[i]`` is the weight of edge ``i``. Negative values are
        accepted so sanitized graphs can be represented.
    check_connected : bool
        Skip the connectivity check only when the topology is known to be
        connected already (e.g. reweighting an existing graph).
    """

    __slots__ = ("_n", "_u", "_v", "_w", "__dict__")

    def __init__(self, n_nodes: int, edges, weights, *, check_connected: bool = True):
        n_nodes = int(n_nodes)
        if n_nodes < 1:
            raise GraphError("a graph needs at least one node")
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pairs.shape[0]:
            raise GraphError(f"{pairs.shape[0]} edges but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)):
            raise GraphError("edge weights must be finite")
        u = np.ascontiguousarray(pairs[:, 0])
        v = np.ascontiguousarray(pairs[:, 1])
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n_nodes):
            raise GraphError(f"edge endpoint out of range for {n_nodes} nodes")
        loops = np.flatnonzero(u == v)
        if loops.size:
            raise SelfLoopError(f"edge {loops[0]} is a self-loop on node {u[loops[0]]}")
        keys = np.minimum(u, v) * n_nodes + np.maximum(u, v)
        _, first, counts = np.unique(keys, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = keys == keys[first[np.argmax(counts > 1)]]
            i, j = np.flatnonzero(dup)[:2]
            raise DuplicateEdgeError(f"edges {i} and {j} join the same pair ({u[i]}, {v[i]})")
        for arr in (u, v, w):
            arr.flags.writeable = False
        self._n, self._u, self._v, self._w = n_nodes, u, v, w
        if check_connected:
            c = kernels.components(n_nodes, u, v)
            if c != 1:
                raise DisconnectedGraphError(f"graph has {c} connected components", c)

    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return self._u.shape[0]

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def v(self) -> np.ndarray:
        return self._v

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self._u.tolist(), self._v.tolist()))

    @property
    def alpha(self) -> float:
        """Density ``|E| / (|V| - 1)``."""
        return self.n_edges / (self.n_nodes - 1)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, adj_edge, adj_node)`` with each node's edges in id order."""
        E = self.n_edges
        node = np.concatenate([self._u, self._v])
        other = np.concatenate([self._v, self._u])
        eid = np.concatenate([np.arange(E), np.arange(E)])
        order = np.lexsort((eid, node))
        indptr = np.zeros(self._n + 1, dtype=np.int64)
        np.add.at(indptr, node + 1, 1)
        indptr = np.cumsum(indptr)
        adj_edge = np.ascontiguousarray(eid[order], dtype=np.int64)
        adj_node = np.ascontiguousarray(other[order], dtype=np.int64)
        return indptr, adj_edge, adj_node

    def with_weights(self, weights) -> Graph:
        """Same topology, new weights; the input graph is untouched."""
        g = Graph(self._n, np.column_stack([self._u, self._v]), weights, check_connected=False)
        if "csr" in self.__dict__:
            g.__dict__["csr"] = self.__dict__["csr"]
        return g

    def same_topology(self, other: Graph) -> bool:
        return (
            self._n == other._n
            and np.array_equal(self._u, other._u)
            and np.array_equal(self._v, other._v)
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.same_topology(other) and np.array_equal(self._w, other._w)

    __hash__ = None

    def __repr__(self):
        return f"Graph(n_nodes={self._n}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class TreeTopology:
    """Edge subset of a parent graph forming a spanning tree.

    Build through :meth:`from_edges`, which validates against the graph.
    ``edge_indices`` is kept sorted.
    """

    edge_indices: tuple[int, ...]
    n_nodes: int

    @classmethod
    def from_edges(cls, g: Graph, edges: Iterable[int]) -> TreeTopology:
        idx = tuple(sorted(int(e) for e in edges))
        if not is_spanning_tree(g, idx):
            raise NotSpanningTreeError(
                f"{len(idx)} edges do not form a spanning tree of {g.n_nodes} nodes"
            )
        return cls(idx, g.n_nodes)

    def __iter__(self):
        return iter(self.edge_indices)

    def __len__(self):
        return len(self.edge_indices)

    def __contains__(self, e):
        return e in set(self.edge_indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.edge_indices, dtype=np.int64)


def is_spanning_tree(g: Graph, edges: Sequence[int]) -> bool:
    idx = np.asarray(list(edges), dtype=np.int64)
    if idx.shape[0] != g.n_nodes - 1:
        return False
    if idx.size and (idx.min() < 0 or idx.max() >= g.n_edges):
        return False
    if np.unique(idx).shape[0] != idx.shape[0]:
        return False
    u = np.ascontiguousarray(g.u[idx])
    v = np.ascontiguousarray(g.v[idx])
    return kernels.components(g.n_nodes, u, v) == 1


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise GraphError("points must be a non-empty (N, d) array")
        if not np.all(np.isfinite(pts)):
            raise GraphError("point coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64).reshape(-1)
            if lab.shape[0] != pts.shape[0]:
                raise GraphError("one label per point is required")
            lab.flags.writeable = False
            object.__setattr__(self, "labels", lab)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


# -- ingestion ---------------------------------------------------------------

def parse_graph(text: str, *, allow_negative: bool = False) -> Graph:
    """Parse an edge-list document.

    The first non-comment line is ``n <node_count>``; each following line is
    ``u v w``. ``#`` starts a comment. Edge order is file order.
    """
    n_nodes = None
    edges, weights = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_nodes is None:
            if len(parts) != 2 or parts[0] != "n":
                raise GraphFormatError(f"line {lineno}: expected header 'n <node_count>'")
            try:
                n_nodes = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad node count {parts[1]!r}") from None
            if n_nodes < 1:
                raise GraphFormatError(f"line {lineno}: node count must be positive")
            continue
        if len(parts) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v w', got {line!r}")
        try:
            a, b, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: cannot parse {line!r}") from None
        if not (0 <= a < n_nodes and 0 <= b < n_nodes):
            raise GraphFormatError(f"line {lineno}: node index out of range [0, {n_nodes})")
        if not math.isfinite(w) or (w < 0 and not allow_negative):
            raise GraphFormatError(f"line {lineno}: weight must be finite and non-negative")
        if a == b:
            raise SelfLoopError(f"line {lineno}: self-loop on node {a}")
        edges.append((a, b))
        weights.append(w)
    if n_nodes is None:
        raise GraphFormatError("missing 'n <node_count>' header")
    return Graph(n_nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2), weights)


def read_graph(path, *, allow_negative: bool = False) -> Graph:
    return parse_graph(Path(path).read_text(), allow_negative=allow_negative)


def format_graph(g: Graph) -> str:
    """Edge-list text; floats use the shortest round-tripping repr."""
    lines = [f"n {g.n_nodes}"]
    lines += [f"{a} {b} {w!r}" for a, b, w in zip(g.u.tolist(), g.v.tolist(), g.weights.tolist())]
    return "\n".join(lines) + "\n"


def write_graph(g: Graph, path) -> None:
    Path(path).write_text(format_graph(g))


def read_point_cloud(path, *, has_labels: bool | None = None) -> PointCloud:
    """Read a CSV point cloud, one point per row.

    A header row is optional; a last header column named ``label`` marks the
    label column. Without a header, ``has_labels`` decides (default: no).
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise GraphFormatError(f"{path}: no points")
    header = None
    try:
        float(rows[0][0])
    except ValueError:
        header, rows = [c.strip().lower() for c in rows[0]], rows[1:]
    if has_labels is None:
        has_labels = bool(header) and header[-1] == "label"
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None
    if len({len(r) for r in data}) != 1:
        raise GraphFormatError(f"{path}: rows have differing column counts")
    arr = np.asarray(data, dtype=np.float64)
    if has_labels:
        lab = arr[:, -1]
        if not np.all(lab == np.round(lab)):
            raise GraphFormatError(f"{path}: label column must hold integers")
        return PointCloud(arr[:, :-1], lab.astype(np.int64))
    return PointCloud(arr)


def write_point_cloud(cloud: PointCloud, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        head = [f"x{i}" for i in range(cloud.dim)]
        out.writerow(head + (["label"] if cloud.labels is not None else []))
        for i, p in enumerate(cloud.points.tolist()):
            row = [repr(x) for x in p]
            if cloud.labels is not None:
                row.append(str(int(cloud.labels[i])))
            out.writerow(row)


# -- generators --------------------------------------------------------------

def erdos_renyi(
    n: int,
    p: float,
    w_low: float = 0.0,
    w_high: float = 1.0,
    seed=None,
    *,
    max_attempts: int = 10_000,
) -> Graph:
    """Connected G(n, p) graph with i.i.d. uniform [w_low, w_high) weights.

    The whole graph is redrawn until it is connected. Edges are ordered by
    the (i, j), i < j, pair order.
    """
    if n < 2:
        raise ValueError("erdos_renyi needs n >= 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if not w_low < w_high:
        raise ValueError("w_low must be below w_high")
    rng = _as_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    pairs = np.column_stack([iu, iv]).astype(np.int64)
    for _ in range(max_attempts):
        keep = rng.random(pairs.shape[0]) < p
        w = w_low + (w_high - w_low) * rng.random(int(keep.sum()))
        sub = pairs[keep]
        if kernels.components(n, np.ascontiguousarray(sub[:, 0]), np.ascontiguousarray(sub[:, 1])) == 1:
            return Graph(n, sub, w, check_connected=False)
    raise GenerationError(
        f"no connected G({n}, {p}) graph in {max_attempts} attempts: expected degree "
        f"p*(n-1) = {p * (n - 1):.3g}, connectivity needs roughly ln(n) = {math.log(n):.3g} "
        f"(p >= {math.log(n) / n:.3g})"
    )


def _connecting_radius(dist: np.ndarray, n: int) -> float:
    """Largest edge of the complete-graph MST: the bottleneck connecting radius."""
    iu, iv = np.triu_indices(n, 1)
    order = np.argsort(dist, kind="stable").astype(np.int64)
    tree = kernels.kruskal_mst(n, iu.astype(np.int64), iv.astype(np.int64), order)
    return float(dist[tree].max()) if tree.size else 0.0


def epsilon_graph(cloud: PointCloud, radius: float) -> Graph:
    """Threshold graph: edge (i, j) iff the Euclidean distance is <= radius."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    n = len(cloud)
    dist = pdist(cloud.points)
    keep = dist <= radius
    iu, iv = np.triu_indices(n, 1)
    pairs = np.column_stack([iu[keep], iv[keep]]).astype(np.int64)
    c = kernels.components(n, np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1]))
    if c != 1:
        r_min = _connecting_radius(dist, n)
        raise DisconnectedGraphError(
            f"epsilon-graph at radius {radius!r} has {c} components; "
            f"radius >= {r_min!r} connects it",
            c,
            r_min,
        )
    return Graph(n, pairs, dist[keep], check_connected=False)


def sketch_binary_dataset(vectors, edge_spec) -> Graph:
    """Co-occurrence graph over M binary variables.

    ``w(i, j)`` counts the records where variables ``i`` and ``j`` are both 1.
    """
    z = np.asarray(vectors)
    if z.ndim != 2:
        raise GraphError("vectors must form an (N, M) array")
    if not np.all((z == 0) | (z == 1)):
        raise GraphError("vectors must be binary")
    pairs = np.asarray(list(edge_spec), dtype=np.int64).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise GraphError("edge_spec is empty")
    zb = z.astype(bool)
    weights = np.count_nonzero(zb[:, pairs[:, 0]] & zb[:, pairs[:, 1]], axis=0).astype(np.float64)
    return Graph(z.shape[1], pairs, weights)


# -- spanning trees ----------------------------------------------------------

def mst_prim(g: Graph, start: int = 0) -> TreeTopology:
    """Minimum spanning tree; ties broken by lowest edge index."""
    indptr, adj_edge, adj_node = g.csr
    edges = kernels.prim_mst(g.n_nodes, indptr, adj_edge, adj_node, g.weights, start)
    return TreeTopology(tuple(sorted(edges.tolist())), g.n_nodes)


def mst_kruskal(g: Graph) -> TreeTopology:
    """Kruskal over the (weight, edge index) order; same tree as :func:`mst_prim`."""
    order = np.lexsort((np.arange(g.n_edges), g.weights)).astype(np.int64)
    edges = kernels.kruskal_mst(g.n_nodes, g.u, g.v, order)
    return TreeTopology(tuple(sorted(edges.tolist())), g.n_nodes)


def tree_weight(t: TreeTopology, g: Graph) -> float:
    idx = t.as_array()
    if idx.size and (idx.min() < 0 or idx.max() >= g.n_edges):
        raise GraphError(f"tree references edges outside [0, {g.n_edges})")
    return math.fsum(g.weights[idx].tolist())


def approximation_error(g: Graph, t: TreeTopology) -> float:
    """True weight of ``t`` minus the true MST weight (always >= 0)."""
    if not is_spanning_tree(g, t.edge_indices):
        raise NotSpanningTreeError("tree does not span the graph")
    return tree_weight(t, g) - tree_weight(mst_prim(g), g)


class XorRange(NamedTuple):
    edges: np.ndarray
    """Edge ids with exactly one endpoint in the node set, ascending."""
    outside: np.ndarray
    """For each edge, its endpoint outside the node set."""


def xor_incident_edges(g: Graph, s: Iterable[int]) -> XorRange:
    members = np.zeros(g.n_nodes, dtype=bool)
    idx = np.asarray(list(s), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n_nodes):
        raise GraphError("node set references unknown nodes")
    members[idx] = True
    k = int(members.sum())
    if k == 0 or k == g.n_nodes:
        raise GraphError("node set must be a non-empty proper subset of V")
    in_u, in_v = members[g.u], members[g.v]
    edges = np.flatnonzero(in_u != in_v)
    outside = np.where(in_u[edges], g.v[edges], g.u[edges])
    return XorRange(edges, outside)
