"""Seeded Monte-Carlo harness: error tables, shape datasets, clustering pipeline.

Every trial owns a random stream derived from ``(seed, trial, tag)``, where the
tag names the mechanism and its parameters. Adding a mechanism or an epsilon
therefore never changes the draws of the others, and results do not depend
on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np
from sklearn.metrics import adjusted_rand_score

from ._version import __version__
from .clustering import ClusterPartition, WeightedTree, dbmstclu
from .graph import (Graph, PointCloud, epsilon_graph, erdos_renyi, mst_prim,
                    read_point_cloud, tree_weight)
from .mechanisms import BudgetLedger, graph_laplace
from .pamst import UtilityConfig, pamst, pamst_errors, release_weighted_tree

MECHANISMS = ("pamst", "laplace_mst")
RNG_NAME = "PCG64"


def load_schema() -> dict:
    text = resources.files("dpmst").joinpath("experiment.schema.json").read_text()
    return json.loads(text)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        try:
            jsonschema.Draft7Validator(load_schema()).validate(d)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {where}: {exc.message}") from None
        return cls(json.loads(json.dumps(d)))

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(d)

    def __getitem__(self, key):
        return self.raw[key]

    def get(self, key, default=None):
        return self.raw.get(key, default)

    @property
    def kind(self) -> str:
        return self.raw["kind"]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def trials(self) -> int:
        return self.raw["trials"]

    @property
    def epsilons(self) -> list[float]:
        return [float(e) for e in self.raw["epsilons"]]

    @property
    def mechanisms(self) -> list[str]:
        return list(self.raw["mechanisms"])

    @property
    def normalize(self) -> bool:
        return self.raw.get("normalize", True)

    def config_hash(self) -> str:
        """SHA-256 of the canonical config, ignoring output paths."""
        body = {k: v for k, v in self.raw.items() if k != "outputs"}
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def trial_rng(seed: int, trial: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence([seed, trial, zlib.crc32(tag.encode())])
    return np.random.Generator(np.random.PCG64(ss))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DPMST_WORKERS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    workers = workers or worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mean_ci(values: Sequence[float]) -> tuple[float, float, float]:
    """Mean, sample sd and 95% normal half-width; sd is 0 for one value."""
    k = len(values)
    mean = math.fsum(values) / k
    if k == 1:
        return mean, 0.0, 0.0
    sd = math.sqrt(math.fsum((x - mean) ** 2 for x in values) / (k - 1))
    return mean, sd, 1.96 * sd / math.sqrt(k)


@dataclass(frozen=True)
class ErrorTableRow:
    density: float
    epsilon: float
    mechanism: str
    mean_error: float
    ci_half_width: float
    sd: float
    trials: int
    ci_defined: bool
    mst_cost_min: float
    mst_cost_max: float


def laplace_mst_error(g: Graph, eps: float, rng: np.random.Generator) -> float:
    noisy = graph_laplace(g, eps, rng)
    return tree_weight(mst_prim(noisy), g) - tree_weight(mst_prim(g), g)


def run_error_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[ErrorTableRow]:
    """Approximation error of each mechanism on fresh ER graphs, per (p, eps)."""
    if cfg.kind != "error_table":
        raise ConfigError("run_error_experiment needs kind 'error_table'")
    gs = cfg["graph"]
    n = gs["n_nodes"]
    w_low, w_high = gs.get("w_low", 0.0), gs.get("w_high", 10.0)
    rows = []
    for p in gs["densities"]:
        p = float(p)

        def one_trial(t: int) -> tuple[float, dict]:
            g = erdos_renyi(n, p, w_low, w_high, trial_rng(cfg.seed, t, f"graph:p={p!r}"))
            best = tree_weight(mst_prim(g), g)
            out = {}
            for eps in cfg.epsilons:
                for mech in cfg.mechanisms:
                    rng = trial_rng(cfg.seed, t, f"{mech}:p={p!r}:eps={eps!r}")
                    if mech == "pamst":
                        ucfg = UtilityConfig.normalized(g) if cfg.normalize else UtilityConfig.raw()
                        out[eps, mech] = float(pamst_errors(g, eps, ucfg, 1, rng)[0])
                    else:
                        out[eps, mech] = laplace_mst_error(g, eps, rng)
            return best, out

        results = _map(one_trial, list(range(cfg.trials)), workers)
        costs = [r[0] for r in results]
        for eps in cfg.epsilons:
            for mech in cfg.mechanisms:
                errs = [r[1][eps, mech] for r in results]
                mean, sd, half = _mean_ci(errs)
                rows.append(ErrorTableRow(p, eps, mech, mean, half, sd, cfg.trials,
                                          cfg.trials > 1, min(costs), max(costs)))
    return rows


# -- shapes and clustering ---------------------------------------------------

def generate_shape_dataset(shape: str, n: int, noise_scale: float = 1.0, seed=None,
                           *, separation: float = 20.0) -> PointCloud:
    """Two labelled 2-D shapes sampled uniformly, then Gaussian-perturbed.

    ``blobs``: discs of radius 2 whose centres are ``separation`` apart.
    ``moons``: interleaved half circles of radius 10.
    ``circles``: concentric circles of radius 10 and 20.
    Label 0 gets ``n // 2`` points, label 1 the rest.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    if noise_scale < 0:
        raise ValueError("noise_scale must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sizes = (n // 2, n - n // 2)
    parts = []
    for label, m in enumerate(sizes):
        if shape == "blobs":
            r = 2.0 * np.sqrt(rng.random(m))
            a = 2 * np.pi * rng.random(m)
            pts = np.column_stack([r * np.cos(a) + label * separation, r * np.sin(a)])
        elif shape == "moons":
            t = np.pi * rng.random(m)
            if label == 0:
                pts = 10.0 * np.column_stack([np.cos(t), np.sin(t)])
            else:
                pts = 10.0 * np.column_stack([1 - np.cos(t), 0.5 - np.sin(t)])
        elif shape == "circles":
            a = 2 * np.pi * rng.random(m)
            rad = 10.0 * (label + 1)
            pts = rad * np.column_stack([np.cos(a), np.sin(a)])
        else:
            raise ValueError(f"unknown shape {shape!r}")
        parts.append(pts)
    pts = np.vstack(parts)
    if noise_scale > 0:
        pts = pts + rng.normal(0.0, noise_scale, pts.shape)
    labels = np.repeat([0, 1], sizes)
    return PointCloud(pts, labels)


@dataclass(frozen=True)
class PipelineResult:
    partition: ClusterPartition
    tree: WeightedTree
    ledger: BudgetLedger
    metrics: dict


def private_tree(g: Graph, eps: float, mechanism: str, rng: np.random.Generator,
                 *, normalize: bool = True, ledger: BudgetLedger | None = None) -> WeightedTree:
    """Release a weighted spanning tree of ``g`` under total budget ``eps``.

    ``pamst``: topology at eps/2, then Laplace weights at eps/2.
    ``laplace_mst``: sanitize every edge at eps, then take the MST.
    ``exact``: no privacy; the true MST.
    """
    if mechanism == "pamst":
        ucfg = UtilityConfig.normalized(g) if normalize else UtilityConfig.raw()
        t, _ = pamst(g, eps / 2, ucfg, rng=rng, ledger=ledger)
        t, w = release_weighted_tree(g, t, eps / 2, rng, ledger=ledger)
        return WeightedTree.from_topology(g, t, w)
    if mechanism == "laplace_mst":
        noisy = graph_laplace(g, eps, rng, ledger=ledger)
        t = mst_prim(noisy)
        return WeightedTree.from_topology(g, t, noisy.weights[t.as_array()])
    if mechanism == "exact":
        return WeightedTree.from_topology(g, mst_prim(g))
    raise ValueError(f"unknown mechanism {mechanism!r}")


def run_clustering_pipeline(data: PointCloud | Graph, eps: float, mechanism: str,
                            rng: np.random.Generator, *, radius: float | None = None,
                            labels=None, normalize: bool = True,
                            strict: bool = False) -> PipelineResult:
    """Points (or a graph) to a private tree, then DBMSTClu on it."""
    if isinstance(data, PointCloud):
        if radius is None:
            raise ValueError("a point cloud needs an epsilon-graph radius")
        g = epsilon_graph(data, radius)
        if labels is None:
            labels = data.labels
    else:
        g = data
    ledger = BudgetLedger()
    tree = private_tree(g, eps, mechanism, rng, normalize=normalize, ledger=ledger)
    part = dbmstclu(tree, strict=strict)
    metrics: dict[str, Any] = {
        "dbcvi": part.dbcvi,
        "n_clusters": part.n_clusters,
        "n_cuts": len(part.cut_edges),
    }
    if labels is not None:
        metrics["ari"] = float(adjusted_rand_score(np.asarray(labels), part.labels))
    if ledger.entries:
        metrics["epsilon_spent"] = ledger.total().epsilon
    return PipelineResult(part, tree, ledger, metrics)


@dataclass(frozen=True)
class ClusteringRow:
    epsilon: float
    mechanism: str
    trials: int
    mean_ari: float
    ari_ci_half_width: float
    frac_ari_ge_0_9: float
    mean_dbcvi: float
    mean_clusters: float


def load_clustering_data(cfg: ExperimentConfig) -> PointCloud:
    d = cfg["data"]
    if "points" in d:
        return read_point_cloud(d["points"])
    return generate_shape_dataset(d["shape"], d["n_points"], d.get("noise_scale", 1.0),
                                  trial_rng(cfg.seed, 0, "data"),
                                  separation=d.get("separation", 20.0))


def run_clustering_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[ClusteringRow]:
    if cfg.kind != "clustering":
        raise ConfigError("run_clustering_experiment needs kind 'clustering'")
    d = cfg["data"]
    cloud = load_clustering_data(cfg)
    g = epsilon_graph(cloud, d["radius"])
    rows = []
    for eps in cfg.epsilons:
        for mech in cfg.mechanisms:
            def one(t: int) -> dict:
                rng = trial_rng(cfg.seed, t, f"{mech}:eps={eps!r}")
                res = run_clustering_pipeline(g, eps, mech, rng, labels=cloud.labels,
                                              normalize=cfg.normalize,
                                              strict=d.get("strict", False))
                return res.metrics

            ms = _map(one, list(range(cfg.trials)), workers)
            aris = [m.get("ari", math.nan) for m in ms]
            mean_ari, _, half = _mean_ci(aris)
            rows.append(ClusteringRow(
                eps, mech, cfg.trials, mean_ari, half,
                sum(a >= 0.9 for a in aris) / len(aris),
                math.fsum(m["dbcvi"] for m in ms) / len(ms),
                math.fsum(m["n_clusters"] for m in ms) / len(ms),
            ))
    return rows


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list:
    if cfg.kind == "error_table":
        return run_error_experiment(cfg, workers)
    return run_clustering_experiment(cfg, workers)


# -- output ------------------------------------------------------------------

def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows: Sequence) -> str:
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0])]
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(names)
    for r in rows:
        out.writerow([_cell(getattr(r, k)) for k in names])
    return buf.getvalue()


def results_document(rows: Sequence, cfg: ExperimentConfig) -> dict:
    return {
        "config": cfg.raw,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "rng": RNG_NAME,
        "rows": [asdict(r) for r in rows],
    }


def emit_results(rows: Sequence, fmt: str, path, cfg: ExperimentConfig) -> None:
    """Write rows as CSV or JSON. Output depends only on (config, seed)."""
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = json.dumps(results_document(rows, cfg), indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(text)
