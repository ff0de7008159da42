"""Private approximate MST by repeated exponential-mechanism edge selection.

The tree is grown Prim-style from a start node. At every step the range is
the set of edges with exactly one endpoint in the current node set, and one
edge is drawn with utility ``-|w(r) - min w|`` at budget ``eps / (|V|-1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._backend import kernels
from .graph import Graph, TreeTopology, mst_prim, tree_weight, xor_incident_edges
from .mechanisms import BudgetLedger, exponential_probabilities, laplace_noise


@dataclass(frozen=True)
class UtilityConfig:
    """Sensitivity of the utility: 1 for raw weights, ``1/|E|`` normalized."""

    sensitivity: float = 1.0

    def __post_init__(self):
        if not self.sensitivity > 0:
            raise ValueError("utility sensitivity must be positive")

    @classmethod
    def raw(cls) -> UtilityConfig:
        return cls(1.0)

    @classmethod
    def normalized(cls, g: Graph) -> UtilityConfig:
        return cls(1.0 / g.n_edges)


@dataclass(frozen=True)
class PamstStep:
    range_size: int
    range_min_weight: float
    chosen_edge: int
    chosen_weight: float

    @property
    def utility(self) -> float:
        return -abs(self.chosen_weight - self.range_min_weight)


@dataclass
class PamstTrace:
    steps: list[PamstStep]
    per_step_epsilon: float
    epsilon: float
    sensitivity: float
    start: int = 0
    meta: dict = field(default_factory=dict)

    def range_sizes(self) -> np.ndarray:
        return np.array([s.range_size for s in self.steps], dtype=np.int64)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["steps"] = [asdict(s) for s in self.steps]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> PamstTrace:
        d = json.loads(text)
        d["steps"] = [PamstStep(**s) for s in d["steps"]]
        return cls(**d)


def step_utilities(g: Graph, edges) -> np.ndarray:
    idx = np.asarray(edges, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise ValueError("range must be non-empty")
    w = g.weights[idx]
    return -np.abs(w - w.min())


def _scale(eps: float, n_nodes: int, cfg: UtilityConfig) -> float:
    return (eps / (n_nodes - 1)) / (2.0 * cfg.sensitivity)


def pamst(
    g: Graph,
    eps: float,
    cfg: UtilityConfig | None = None,
    start: int = 0,
    rng: np.random.Generator | None = None,
    ledger: BudgetLedger | None = None,
) -> tuple[TreeTopology, PamstTrace]:
    """Run PAMST once; returns the tree topology and the per-step trace."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    cfg = cfg or UtilityConfig()
    if not 0 <= start < g.n_nodes:
        raise ValueError(f"start node {start} out of range")
    rng = rng if rng is not None else np.random.default_rng()
    n = g.n_nodes
    per_step = eps / (n - 1) if n > 1 else eps
    if n == 1:
        chosen = np.empty(0, dtype=np.int64)
        sizes, mins = chosen, np.empty(0)
    else:
        indptr, adj_edge, _ = g.csr
        chosen, sizes, mins = kernels.pamst_run(
            n, g.u, g.v, indptr, adj_edge, g.weights, _scale(eps, n, cfg), start, rng
        )
    w = g.weights
    steps = [
        PamstStep(int(s), float(m), int(e), float(w[e]))
        for s, m, e in zip(sizes.tolist(), mins.tolist(), chosen.tolist())
    ]
    if ledger is not None:
        ledger.record(eps, 0.0, "pamst topology")
    tree = TreeTopology(tuple(sorted(chosen.tolist())), n)
    return tree, PamstTrace(steps, per_step, eps, cfg.sensitivity, start)


def pamst_sample_trees(
    g: Graph,
    eps: float,
    cfg: UtilityConfig | None,
    n_runs: int,
    rng: np.random.Generator,
    start: int = 0,
) -> np.ndarray:
    """``n_runs`` independent trees as an ``(n_runs, |V|-1)`` edge-id array.

    Rows are in selection order. Same stream usage as ``n_runs`` calls to
    :func:`pamst`.
    """
    cfg = cfg or UtilityConfig()
    if not eps > 0:
        raise ValueError("eps must be positive")
    indptr, adj_edge, _ = g.csr
    return kernels.pamst_batch(
        g.n_nodes, g.u, g.v, indptr, adj_edge, g.weights,
        _scale(eps, g.n_nodes, cfg), start, rng, int(n_runs),
    )


def pamst_errors(g: Graph, eps: float, cfg: UtilityConfig | None, n_runs: int,
                 rng: np.random.Generator, start: int = 0) -> np.ndarray:
    """Approximation error of each of ``n_runs`` PAMST trees."""
    trees = pamst_sample_trees(g, eps, cfg, n_runs, rng, start)
    best = tree_weight(mst_prim(g), g)
    weights = np.array([math.fsum(row) for row in g.weights[trees].tolist()])
    return weights - best


def w_star(trace: PamstTrace) -> float:
    """Sum of the per-step range minima; never above the MST weight."""
    return math.fsum(s.range_min_weight for s in trace.steps)


def release_weighted_tree(
    g: Graph,
    t: TreeTopology,
    eps_weights: float,
    rng: np.random.Generator,
    ledger: BudgetLedger | None = None,
) -> tuple[TreeTopology, np.ndarray]:
    """Laplace(1/eps_weights) noise on the tree's |V|-1 weights only.

    Returned weights align with ``t.edge_indices``.
    """
    if not eps_weights > 0:
        raise ValueError("eps_weights must be positive")
    if len(t) != g.n_nodes - 1:
        raise ValueError("tree does not span the graph")
    idx = t.as_array()
    noisy = g.weights[idx] + laplace_noise(1.0 / eps_weights, idx.shape[0], rng)
    if ledger is not None:
        ledger.record(eps_weights, 0.0, "tree weights")
    return t, noisy


def exact_output_distribution(g: Graph, eps: float, cfg: UtilityConfig | None = None,
                              start: int = 0) -> dict[tuple[int, ...], float]:
    """Exact PAMST output law over tree topologies, by full path enumeration.

    Exponential in |V|; intended for graphs of a handful of nodes.
    """
    cfg = cfg or UtilityConfig()
    n = g.n_nodes
    if n > 9:
        raise ValueError("exact enumeration is limited to 9 nodes")
    step_eps = eps / (n - 1)
    out: dict[tuple[int, ...], float] = {}

    def walk(nodes: frozenset, edges: tuple, prob: float):
        if len(nodes) == n:
            key = tuple(sorted(edges))
            out[key] = out.get(key, 0.0) + prob
            return
        rng_edges, outside = xor_incident_edges(g, nodes)
        p = exponential_probabilities(step_utilities(g, rng_edges), cfg.sensitivity, step_eps)
        for e, x, pe in zip(rng_edges.tolist(), outside.tolist(), p.tolist()):
            if pe > 0:
                walk(nodes | {x}, edges + (e,), prob * pe)

    walk(frozenset([start]), (), 1.0)
    return out


def expected_error_exact(g: Graph, eps: float, cfg: UtilityConfig | None = None,
                         start: int = 0) -> float:
    best = tree_weight(mst_prim(g), g)
    dist = exact_output_distribution(g, eps, cfg, start)
    return math.fsum(p * (math.fsum(g.weights[list(t)].tolist()) - best) for t, p in dist.items())
