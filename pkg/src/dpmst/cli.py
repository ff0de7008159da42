"""Command-line interface: ``dpmst <command> ...`` (or ``python -m dpmst``).

Exit status is 0 on success, 1 on a usage error and 2 on bad input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .bounds import BoundInputs, compare_bounds
from .clustering import partition_to_json, write_partition_csv
from .experiments import (ConfigError, ExperimentConfig, emit_results, run_clustering_pipeline,
                          rows_to_csv, run_experiment)
from .graph import (GraphError, approximation_error, epsilon_graph, format_graph, mst_kruskal,
                    mst_prim, read_graph, read_point_cloud, tree_weight)
from .mechanisms import BudgetLedger, graph_laplace
from .pamst import UtilityConfig, pamst, release_weighted_tree, w_star

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
        return
    width = max(len(k) for k in obj)
    for k, v in obj.items():
        out.write(f"{k:<{width}}  {v}\n")


def cmd_mst(args, out) -> int:
    g = read_graph(args.graph, allow_negative=True)
    t = mst_prim(g) if args.algorithm == "prim" else mst_kruskal(g)
    _emit({"edges": list(t.edge_indices), "weight": tree_weight(t, g)}, args.format, out)
    return EXIT_OK


def cmd_sanitize(args, out) -> int:
    g = read_graph(args.graph)
    noisy = graph_laplace(g, args.eps, np.random.default_rng(args.seed))
    text = format_graph(noisy)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_pamst(args, out) -> int:
    g = read_graph(args.graph, allow_negative=True)
    rng = np.random.default_rng(args.seed)
    cfg = UtilityConfig.normalized(g) if args.normalize else UtilityConfig.raw()
    ledger = BudgetLedger()
    t, trace = pamst(g, args.eps, cfg, start=args.start, rng=rng, ledger=ledger)
    res = {
        "edges": list(t.edge_indices),
        "weight": tree_weight(t, g),
        "mst_weight": tree_weight(mst_prim(g), g),
        "approximation_error": approximation_error(g, t),
        "w_star": w_star(trace),
        "sensitivity": cfg.sensitivity,
    }
    if args.release_weights is not None:
        _, w = release_weighted_tree(g, t, args.release_weights, rng, ledger=ledger)
        res["released_weights"] = w.tolist()
    res["budget"] = ledger.to_dict()
    if args.trace:
        Path(args.trace).write_text(trace.to_json() + "\n")
    _emit(res, args.format, out)
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    b = BoundInputs(args.nodes, args.edges, args.eps, args.gamma)
    _emit(compare_bounds(b), args.format, out)
    return EXIT_OK


def _looks_like_graph(path: Path) -> bool:
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                return line.split()[0] == "n"
    return False


def cmd_cluster(args, out) -> int:
    path = Path(args.input)
    kind = args.input_kind
    if kind == "auto":
        kind = "graph" if _looks_like_graph(path) else "points"
    labels = None
    if kind == "graph":
        data = read_graph(path)
    else:
        if args.radius is None:
            raise UsageError("cluster: --radius is required for point input")
        cloud = read_point_cloud(path)
        labels = cloud.labels
        data = epsilon_graph(cloud, args.radius)
    res = run_clustering_pipeline(data, args.eps, args.mechanism, np.random.default_rng(args.seed),
                                  labels=labels, strict=args.strict)
    if args.labels_out:
        write_partition_csv(res.partition, args.labels_out)
    if args.json:
        extra = {"metrics": res.metrics, "budget": res.ledger.to_dict(), "seed": args.seed}
        Path(args.json).write_text(partition_to_json(res.partition, extra) + "\n")
    summary = dict(res.metrics)
    summary["cut_edges"] = list(res.partition.cut_edges)
    _emit(summary, args.format, out)
    return EXIT_OK


def cmd_experiment(args, out) -> int:
    cfg = ExperimentConfig.load(args.config)
    rows = run_experiment(cfg, args.workers)
    outputs = dict(cfg.get("outputs", {}))
    if args.csv:
        outputs["csv"] = args.csv
    if args.json:
        outputs["json"] = args.json
    for fmt, path in sorted(outputs.items()):
        emit_results(rows, fmt, path, cfg)
    if not outputs:
        out.write(rows_to_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dpmst", description="Private minimum spanning trees and MST clustering.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fmt(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("mst", help="exact minimum spanning tree of an edge-list graph")
    sp.add_argument("graph")
    sp.add_argument("--algorithm", choices=("prim", "kruskal"), default="prim")
    fmt(sp)
    sp.set_defaults(func=cmd_mst)

    sp = sub.add_parser("sanitize", help="add Laplace(1/eps) noise to every edge weight")
    sp.add_argument("graph")
    sp.add_argument("--eps", type=_positive, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_sanitize)

    sp = sub.add_parser("pamst", help="private approximate MST topology")
    sp.add_argument("graph")
    sp.add_argument("--eps", type=_positive, required=True)
    sp.add_argument("--normalize", action="store_true", help="utility sensitivity 1/|E| instead of 1")
    sp.add_argument("--release-weights", type=_positive, metavar="EPS2",
                    help="also release the tree weights with Laplace(1/EPS2) noise")
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--trace", help="write the per-step trace as JSON")
    fmt(sp)
    sp.set_defaults(func=cmd_pamst)

    sp = sub.add_parser("bounds", help="compare the Laplace and PAMST error bounds")
    sp.add_argument("--nodes", type=int, required=True)
    sp.add_argument("--edges", type=int, required=True)
    sp.add_argument("--eps", type=_positive, required=True)
    sp.add_argument("--gamma", type=_positive, default=0.05)
    fmt(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("cluster", help="private tree release followed by DBMSTClu")
    sp.add_argument("--input", required=True, help="point CSV or edge-list graph")
    sp.add_argument("--input-kind", choices=("auto", "points", "graph"), default="auto")
    sp.add_argument("--radius", type=_positive)
    sp.add_argument("--eps", type=_positive, default=1.0)
    sp.add_argument("--mechanism", choices=("pamst", "laplace_mst", "exact"), default="pamst")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--strict", action="store_true", help="accept only strictly improving cuts")
    sp.add_argument("--labels-out", help="CSV of node,cluster")
    sp.add_argument("--json", help="partition and metrics as JSON")
    fmt(sp)
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("experiment", help="run a JSON experiment configuration")
    sp.add_argument("config")
    sp.add_argument("--csv")
    sp.add_argument("--json")
    sp.add_argument("--workers", type=int, default=None, help="default: $DPMST_WORKERS or 1")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, ConfigError, ValueError, OSError) as exc:
        print(f"dpmst: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
