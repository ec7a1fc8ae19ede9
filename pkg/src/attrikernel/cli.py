"""Command line entry point: ``run``, ``cluster`` and ``rank``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .clustering import kmeans, spectral_partition
from .datasets import DatasetError
from .evaluation import KMEANS, adjusted_rand_index, rank_options, table_from_rows
from .experiment import (
    ConfigError,
    _parse_option,
    cell_adjacency,
    fig1_csv,
    load_config,
    resolve_dataset,
    run_experiment,
    table2_csv,
)
from .graph import GraphError
from .kernels import Kernel, compute_kernel

EXIT_OK = 0
EXIT_CELL_FAILURES = 1
EXIT_BAD_INPUT = 2

log = logging.getLogger("attrikernel")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    if args.jobs:
        cfg.jobs = args.jobs
    result = run_experiment(cfg)
    n_cells = len(result.cells)
    print(f"evaluated {n_cells} cells; reports in {cfg.output}")
    if result.ranks is not None and result.ranks.pairs:
        kern, opt, mean = result.ranks.pairs[0]
        print(f"top pair: {Kernel.parse(kern).label} + {opt} (average rank {mean:.3f})")
    if result.failures:
        for c in result.failures:
            print(f"FAILED {c.dataset}/{c.kernel or '-'}/{c.option}: {c.error}", file=sys.stderr)
        return EXIT_CELL_FAILURES
    return EXIT_OK


def _cmd_cluster(args) -> int:
    graph = resolve_dataset(args.dataset, args.data_dir)
    option = _parse_option(args.similarity)
    if args.k is not None:
        k = args.k
    elif graph.labels is not None:
        k = graph.num_classes
    else:
        raise ConfigError("--k is required when the dataset has no labels")

    if option == KMEANS:
        if graph.attributes is None:
            raise ConfigError("dataset has no attributes for k-means")
        part = kmeans(graph.attributes, k, seed=args.seed, restarts=args.restarts)
    else:
        if args.alpha is None:
            raise ConfigError("--alpha is required for kernel clustering")
        A = cell_adjacency(graph, option, args.beta)
        K = compute_kernel(args.kernel, A, args.alpha)
        part = spectral_partition(K, k, seed=args.seed, restarts=args.restarts)

    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", encoding="utf-8")
    try:
        out.write("node,cluster\n")
        for i, c in enumerate(part.labels):
            out.write(f"{i},{int(c)}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if graph.labels is not None:
        print(f"ARI {adjusted_rand_index(graph.labels, part.labels):.6f}", file=sys.stderr)
    return EXIT_OK


def _cmd_rank(args) -> int:
    try:
        with open(args.table, encoding="utf-8", newline="") as fh:
            table = table_from_rows(csv.DictReader(fh))
    except (OSError, KeyError) as exc:
        raise ConfigError(f"cannot read score table: {exc}") from None
    ranks = rank_options(
        table,
        include_no=not args.exclude_no,
        include_kmeans=not args.exclude_kmeans,
        missing="worst" if args.failed_last else "error",
    )
    for kern, per in ranks.per_kernel.items():
        parts = ", ".join(f"{o} {m:.3f}±{s:.3f}" for o, (m, s) in per.items())
        print(f"{Kernel.parse(kern).label}: {parts}")
    print()
    print("rank  pair                     average rank")
    for i, (kern, opt, mean) in enumerate(ranks.pairs[: args.top], 1):
        print(f"{i:>4}  {Kernel.parse(kern).label + ' + ' + opt:<24} {mean:.3f}")
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for kern in ranks.per_kernel:
            (out / f"fig1_{kern}.csv").write_text(fig1_csv(ranks, kern), encoding="utf-8")
        (out / "table2.csv").write_text(table2_csv(ranks), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrikernel",
        description="Proximity kernels for attributed networks and spectral community detection.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a full experiment grid from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--output", help="override the config's output directory")
    run.add_argument("--jobs", type=int, help="worker processes per dataset")
    run.set_defaults(func=_cmd_run)

    cl = sub.add_parser("cluster", help="cluster one dataset with one kernel")
    cl.add_argument("--dataset", required=True, help="benchmark name, .content file or canonical graph file")
    cl.add_argument("--data-dir", default=".", help="where benchmark names are looked up")
    cl.add_argument("--kernel", default="fe", choices=[k.value for k in Kernel])
    cl.add_argument("--similarity", default="CS", help="MC, CS, JS, MS, ES, No or k-means")
    cl.add_argument("--beta", type=float, default=0.5)
    cl.add_argument("--alpha", type=float)
    cl.add_argument("--k", type=int)
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--restarts", type=int, default=10)
    cl.add_argument("--output", help="assignment CSV (default stdout)")
    cl.set_defaults(func=_cmd_cluster)

    rk = sub.add_parser("rank", help="average ranks from an existing score table CSV")
    rk.add_argument("--table", required=True, help="CSV with dataset,kernel,option,ari columns")
    rk.add_argument("--exclude-no", action="store_true")
    rk.add_argument("--exclude-kmeans", action="store_true")
    rk.add_argument("--failed-last", action="store_true", help="rank failed cells last instead of erroring")
    rk.add_argument("--top", type=int, default=8)
    rk.add_argument("--output", help="directory for fig1_<kernel>.csv and table2.csv")
    rk.set_defaults(func=_cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DatasetError, GraphError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
