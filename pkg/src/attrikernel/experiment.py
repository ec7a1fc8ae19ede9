"""Grid-search experiment harness and report writers.

One *cell* is a (dataset, kernel, option) triple, where the option is an
attribute similarity measure, ``"No"`` (plain structure) or ``"k-means"``
(attributes only). For every cell the kernel parameter is swept over a
grid and the best ARI against the ground-truth labels is kept.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import platform
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .clustering import kmeans, spectral_partition
from .datasets import DESCRIPTORS, BENCHMARKS, load_canonical, load_citation, load_named
from .evaluation import (
    KMEANS,
    NO,
    SIMILARITY_OPTIONS,
    RankSummary,
    ScoreTable,
    adjusted_rand_index,
    rank_options,
)
from .graph import Graph
from .kernels import Kernel, compute_kernel
from .similarity import fuse, similarity_matrix

log = logging.getLogger(__name__)

KERNELS = tuple(k.value for k in Kernel)
OPTIONS = SIMILARITY_OPTIONS + (NO, KMEANS)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    datasets: list[str] = field(default_factory=lambda: list(BENCHMARKS))
    data_dir: str = "."
    kernels: list[str] = field(default_factory=lambda: list(KERNELS))
    options: list[str] = field(default_factory=lambda: list(OPTIONS))
    beta: float = 0.5
    #: Explicit parameter grid per kernel; kernels absent here use the defaults.
    grids: dict[str, list[float]] = field(default_factory=dict)
    seed: int = 0
    restarts: int = 10
    output: str = "results"
    jobs: int = 1
    fe_diagonal_correction: bool = True
    rank_include_no: bool = True
    rank_include_kmeans: bool = True

    def validate(self) -> "ExperimentConfig":
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.datasets:
            raise ConfigError("no datasets selected")
        try:
            self.kernels = [Kernel.parse(k).value for k in self.kernels]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.options = [_parse_option(o) for o in self.options]
        grids = {}
        for name, grid in self.grids.items():
            try:
                kern = Kernel.parse(name)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            grid = [float(a) for a in grid]
            if not grid:
                raise ConfigError(f"empty parameter grid for {kern.value}")
            if any(not (a > 0 and math.isfinite(a)) for a in grid):
                raise ConfigError(f"grid for {kern.value} must be positive")
            if kern is Kernel.PAGERANK and any(a >= 1 for a in grid):
                raise ConfigError("PageRank grid must lie inside (0, 1)")
            grids[kern.value] = grid
        self.grids = grids
        if self.restarts < 1 or self.jobs < 1:
            raise ConfigError("restarts and jobs must be >= 1")
        return self


def _parse_option(name: str) -> str:
    key = str(name).strip()
    low = key.lower()
    if low in ("no", "none", "plain"):
        return NO
    if low in ("k-means", "kmeans"):
        return KMEANS
    if key.upper() in SIMILARITY_OPTIONS:
        return key.upper()
    raise ConfigError(f"unknown similarity option {name!r}")


_LOGSPACE = re.compile(r"^\s*logspace\(\s*([^,]+),\s*([^,]+),\s*(\d+)\s*\)\s*$")


def parse_grid(text: str) -> list[float]:
    """``"0.1, 0.5, 1"`` or ``"logspace(0.01, 20, 10)"``."""
    m = _LOGSPACE.match(text)
    if m:
        lo, hi, num = float(m.group(1)), float(m.group(2)), int(m.group(3))
        return [float(v) for v in np.geomspace(lo, hi, num)]
    return [float(v) for v in text.replace(",", " ").split()]


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def _as_bool(value: str) -> bool:
    low = value.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def load_config(path) -> ExperimentConfig:
    """Read a ``key = value`` config file.

    A leading ``[experiment]`` section header is optional. Parameter grids
    use ``alpha.<kernel> = ...`` keys. Relative ``data_dir`` and ``output``
    paths resolve against the config file's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not re.search(r"^\s*\[", text, flags=re.M):
        text = "[experiment]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")
    sec = parser["experiment"]
    cfg = ExperimentConfig()
    try:
        for key, value in sec.items():
            if key == "datasets":
                cfg.datasets = _split(value)
            elif key == "data_dir":
                cfg.data_dir = str((path.parent / value).resolve())
            elif key == "kernels":
                cfg.kernels = _split(value)
            elif key in ("options", "similarities"):
                cfg.options = _split(value)
            elif key == "beta":
                cfg.beta = float(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "restarts":
                cfg.restarts = int(value)
            elif key == "jobs":
                cfg.jobs = int(value)
            elif key == "output":
                cfg.output = str((path.parent / value).resolve())
            elif key == "fe_diagonal_correction":
                cfg.fe_diagonal_correction = _as_bool(value)
            elif key == "rank_include_no":
                cfg.rank_include_no = _as_bool(value)
            elif key == "rank_include_kmeans":
                cfg.rank_include_kmeans = _as_bool(value)
            elif key.startswith("alpha."):
                cfg.grids[key[len("alpha."):]] = parse_grid(value)
            else:
                raise ConfigError(f"{path}: unknown key {key!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    return cfg.validate()


def default_grid(kernel, A: np.ndarray) -> list[float]:
    """Parameter grid used when the config does not give one."""
    kernel = Kernel.parse(kernel)
    if kernel is Kernel.PAGERANK:
        return [round(0.05 + 0.1 * i, 2) for i in range(10)]
    if kernel is Kernel.FREE_ENERGY:
        return [float(v) for v in np.geomspace(0.01, 20, 10)]
    if kernel is Kernel.SCCT:
        return [float(v) for v in np.geomspace(0.1, 30, 8)]
    # Max degree bounds the spectral radius of A; 2 * max degree bounds L's.
    bound = float(A.sum(axis=1).max()) if A.size else 0.0
    if kernel is Kernel.HEAT:
        bound *= 2
    top = 700.0 / bound if bound > 0 else 100.0
    top = max(min(top, 1e3), 0.02)
    return [float(v) for v in np.geomspace(0.01, top, 12)]


@dataclass
class GridPoint:
    alpha: float
    ari: float | None
    error: str = ""
    shifted: bool = False


@dataclass
class CellResult:
    dataset: str
    kernel: str  # "" for the k-means baseline
    option: str
    ari: float | None
    alpha: float | None
    seed: int
    points: list[GridPoint] = field(default_factory=list)
    error: str = ""

    @property
    def failed(self) -> bool:
        return self.ari is None


class CellError(RuntimeError):
    """Every grid point of a cell failed."""


def cell_seed(master: int, dataset: str, kernel: str, option: str) -> int:
    return zlib.crc32(f"{master}|{dataset}|{kernel}|{option}".encode("utf-8"))


def _labels_of(graph: Graph) -> np.ndarray:
    if graph.labels is None:
        raise ConfigError(f"dataset {graph.name!r} has no ground-truth labels")
    return graph.labels


def cell_adjacency(graph: Graph, option: str, beta: float, cache: dict | None = None) -> np.ndarray:
    """Adjacency seen by the kernels for ``option`` (fused unless ``"No"``)."""
    if option == NO:
        return np.array(graph.adjacency)
    if graph.attributes is None:
        raise ConfigError(f"dataset {graph.name!r} has no attributes for option {option}")
    key = (option, beta)
    if cache is not None and key in cache:
        return cache[key]
    A = fuse(graph.adjacency, similarity_matrix(graph.attributes, option), beta)
    if cache is not None:
        cache[key] = A
    return A


def run_cell(
    graph: Graph,
    kernel: str,
    option: str,
    config: ExperimentConfig,
    cache: dict | None = None,
) -> CellResult:
    """Best ARI over the kernel's parameter grid for one cell.

    Failing grid points are recorded with their reason and skipped; the
    lowest parameter wins ties. Raises :class:`CellError` if every point
    fails.
    """
    option = _parse_option(option)
    labels = _labels_of(graph)
    k = int(np.unique(labels).size)
    name = graph.name

    if option == KMEANS:
        if graph.attributes is None:
            raise ConfigError(f"dataset {name!r} has no attributes for k-means")
        seed = cell_seed(config.seed, name, "", KMEANS)
        part = kmeans(graph.attributes, k, seed=seed, restarts=config.restarts)
        ari = adjusted_rand_index(labels, part.labels)
        return CellResult(name, "", KMEANS, ari, None, seed)

    kern = Kernel.parse(kernel)
    seed = cell_seed(config.seed, name, kern.value, option)
    A = cell_adjacency(graph, option, config.beta, cache)
    grid = config.grids.get(kern.value) or default_grid(kern, A)
    extra = {"diagonal_correction": config.fe_diagonal_correction} if kern is Kernel.FREE_ENERGY else {}

    points = []
    for alpha in grid:
        try:
            K = compute_kernel(kern, A, alpha, **extra)
            part = spectral_partition(K, k, seed=seed, restarts=config.restarts)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            points.append(GridPoint(alpha, None, f"{type(exc).__name__}: {exc}"))
            continue
        points.append(GridPoint(alpha, adjusted_rand_index(labels, part.labels), shifted=part.shifted))

    scored = [p for p in points if p.ari is not None]
    if not scored:
        raise CellError(
            f"{name}/{kern.value}/{option}: all {len(points)} grid points failed "
            f"(first: {points[0].error if points else 'empty grid'})"
        )
    best = max(scored, key=lambda p: (p.ari, -p.alpha))
    return CellResult(name, kern.value, option, best.ari, best.alpha, seed, points)


def _safe_cell(graph, kernel, option, config, cache=None) -> CellResult:
    try:
        return run_cell(graph, kernel, option, config, cache)
    except CellError as exc:
        seed = cell_seed(config.seed, graph.name, kernel, option)
        return CellResult(graph.name, kernel, option, None, None, seed, error=str(exc))


def resolve_dataset(entry: str, data_dir) -> Graph:
    """A benchmark name, a ``.content`` file, or a canonical graph file."""
    if entry.lower() in DESCRIPTORS:
        return load_named(entry.lower(), data_dir)
    path = Path(entry)
    if not path.is_absolute():
        path = Path(data_dir) / path
    if path.suffix == ".content":
        return load_citation(path, path.with_suffix(".cites"), name=path.stem)
    return load_canonical(path)


@dataclass
class ExperimentResult:
    table: ScoreTable
    ranks: RankSummary | None
    cells: list[CellResult]
    files: dict[str, Path]

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if c.failed]


def _cell_jobs(config: ExperimentConfig) -> list[tuple[str, str]]:
    jobs = []
    for option in config.options:
        if option == KMEANS:
            jobs.append(("", KMEANS))
        else:
            jobs.extend((kern, option) for kern in config.kernels)
    return jobs


def evaluate(config: ExperimentConfig, graphs: dict[str, Graph] | None = None) -> list[CellResult]:
    """Run every cell of the grid; results come back in a fixed order."""
    config.validate()
    cells: list[CellResult] = []
    for entry in config.datasets:
        graph = graphs[entry] if graphs and entry in graphs else resolve_dataset(entry, config.data_dir)
        if not graph.name:
            graph = Graph(graph.adjacency, graph.attributes, graph.labels, name=entry)
        jobs = _cell_jobs(config)
        log.info("%s: n=%d m=%d, %d cells", graph.name, graph.n, graph.m, len(jobs))
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(_safe_cell, graph, kern, opt, config) for kern, opt in jobs]
                cells.extend(f.result() for f in futures)
        else:
            cache: dict = {}
            for kern, opt in jobs:
                cells.append(_safe_cell(graph, kern, opt, config, cache))
    return cells


def score_table(cells: list[CellResult]) -> ScoreTable:
    table = ScoreTable()
    for c in cells:
        table.set(c.dataset, c.kernel, c.option, math.nan if c.failed else c.ari, c.alpha)
    return table


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _csv(rows: list[list[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def table1_csv(cells: list[CellResult]) -> str:
    rows = [["dataset", "kernel", "option", "ari", "alpha", "status"]]
    for c in cells:
        rows.append([c.dataset, c.kernel, c.option, _num(c.ari), _num(c.alpha), "failed" if c.failed else "ok"])
    return _csv(rows)


def grid_csv(cells: list[CellResult]) -> str:
    rows = [["dataset", "kernel", "option", "alpha", "ari", "affinity_shift", "error"]]
    for c in cells:
        for p in c.points:
            rows.append([c.dataset, c.kernel, c.option, _num(p.alpha), _num(p.ari), int(p.shifted), p.error])
    return _csv(rows)


def table1_markdown(table: ScoreTable) -> str:
    options = [o for o in table.options() if o != KMEANS]
    out = []
    for ds in table.datasets:
        out.append(f"### {ds}\n")
        out.append("| Prox. measure | " + " | ".join(options) + " |")
        out.append("|---" * (len(options) + 1) + "|")
        for kern in table.kernels:
            vals = [table.scores.get((ds, kern, o), math.nan) for o in options]
            finite = [v for v in vals if not math.isnan(v)]
            top = max(finite) if finite else None
            cells = []
            for v in vals:
                if math.isnan(v):
                    cells.append("fail")
                else:
                    s = f"{v:.3f}"
                    cells.append(f"**{s}**" if v == top else s)
            out.append(f"| {Kernel.parse(kern).label} | " + " | ".join(cells) + " |")
        km = table.scores.get((ds, "", KMEANS))
        if km is not None:
            out.append(f"| k-means | {'fail' if math.isnan(km) else f'{km:.3f}'} |" + " |" * (len(options) - 1))
        out.append("")
    return "\n".join(out)


def fig1_csv(ranks: RankSummary, kernel: str) -> str:
    rows = [["option", "mean_rank", "std_rank"]]
    for opt, (mean, std) in ranks.per_kernel[kernel].items():
        rows.append([opt, repr(mean), repr(std)])
    return _csv(rows)


def table2_csv(ranks: RankSummary) -> str:
    rows = [["rank", "kernel", "option", "average_rank"]]
    for i, (kern, opt, mean) in enumerate(ranks.pairs, 1):
        rows.append([i, kern, opt, repr(mean)])
    return _csv(rows)


def summarize(table: ScoreTable, config: ExperimentConfig) -> RankSummary | None:
    if not table.kernels:
        return None
    return rank_options(
        table,
        include_no=config.rank_include_no,
        include_kmeans=config.rank_include_kmeans,
        missing="worst",
    )


def write_reports(
    cells: list[CellResult], config: ExperimentConfig, out_dir
) -> tuple[ScoreTable, RankSummary | None, dict[str, Path]]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = score_table(cells)
    ranks = summarize(table, config)
    files: dict[str, str] = {
        "table1.csv": table1_csv(cells),
        "grid.csv": grid_csv(cells),
        "table1.md": table1_markdown(table),
    }
    if ranks is not None:
        for kern in ranks.per_kernel:
            files[f"fig1_{kern}.csv"] = fig1_csv(ranks, kern)
        files["table2.csv"] = table2_csv(ranks)
    manifest = {
        "config": asdict(config),
        "versions": {
            "attrikernel": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "cells": [
            {
                "dataset": c.dataset,
                "kernel": c.kernel,
                "option": c.option,
                "seed": c.seed,
                "grid": [p.alpha for p in c.points],
                "failed_points": sum(p.ari is None for p in c.points),
                "affinity_shift": any(p.shifted for p in c.points),
                "error": c.error,
            }
            for c in cells
        ],
        "failed_cells": sum(c.failed for c in cells),
    }
    files["run.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    paths = {}
    for name, text in files.items():
        p = out / name
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths[name] = p
    return table, ranks, paths


def run_experiment(config: ExperimentConfig, graphs: dict[str, Graph] | None = None) -> ExperimentResult:
    """Evaluate the full grid and write every report into ``config.output``."""
    cells = evaluate(config, graphs)
    table, ranks, paths = write_reports(cells, config, config.output)
    for c in cells:
        if c.failed:
            log.error("cell failed: %s", c.error)
    return ExperimentResult(table, ranks, cells, paths)
