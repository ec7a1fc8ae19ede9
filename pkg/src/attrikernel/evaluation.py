"""Partition agreement (Rand / adjusted Rand) and rank aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

NO = "No"
KMEANS = "k-means"
SIMILARITY_OPTIONS = ("MC", "CS", "JS", "MS", "ES")
ALL_OPTIONS = SIMILARITY_OPTIONS + (NO, KMEANS)


def _labels(p) -> np.ndarray:
    return np.asarray(getattr(p, "labels", p)).ravel()


def _pair_counts(p1, p2) -> tuple[int, int, int, int]:
    """``(same-in-both, same-in-p1, same-in-p2, total)`` pair counts."""
    a, b = _labels(p1), _labels(p2)
    if a.shape != b.shape:
        raise ValueError(f"partition lengths differ ({a.size} vs {b.size})")
    n = a.size
    if n < 2:
        raise ValueError("need at least two elements")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def pairs(x):
        return int(sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x)))

    return pairs(table), pairs(table.sum(axis=1)), pairs(table.sum(axis=0)), n * (n - 1) // 2


def rand_index(p1, p2) -> float:
    both, same1, same2, total = _pair_counts(p1, p2)
    agree_diff = total - same1 - same2 + both
    return (both + agree_diff) / total


def adjusted_rand_index(p1, p2) -> float:
    """Hubert-Arabie ARI from the contingency table.

    Computed as a single division of exact integers. When both partitions
    are trivial (the denominator vanishes) the result is 1 if they agree
    and 0 otherwise.
    """
    both, same1, same2, total = _pair_counts(p1, p2)
    num = 2 * (total * both - same1 * same2)
    den = total * (same1 + same2) - 2 * same1 * same2
    if den == 0:
        return 1.0 if _same_partition(p1, p2) else 0.0
    return num / den


def _same_partition(p1, p2) -> bool:
    a, b = _labels(p1), _labels(p2)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    pairs = set(zip(ia.tolist(), ib.tolist()))
    return len(pairs) == len(set(ia.tolist())) == len(set(ib.tolist()))


@dataclass
class ScoreTable:
    """Best ARI (and best parameter) per ``(dataset, kernel, option)``.

    ``option`` is a similarity code, ``"No"`` or ``"k-means"``. The k-means
    score belongs to the dataset alone; store it under any kernel (or
    ``kernel=""``) and :func:`rank_options` replicates it per kernel.
    """

    scores: dict[tuple[str, str, str], float] = field(default_factory=dict)
    params: dict[tuple[str, str, str], float | None] = field(default_factory=dict)

    def set(self, dataset: str, kernel: str, option: str, ari: float, alpha=None) -> None:
        if option == KMEANS:
            kernel = ""
        if not (math.isnan(ari) or -1.0 - 1e-12 <= ari <= 1.0 + 1e-12):
            raise ValueError(f"ARI {ari} outside [-1, 1]")
        self.scores[(dataset, kernel, option)] = float(ari)
        self.params[(dataset, kernel, option)] = alpha

    def get(self, dataset: str, kernel: str, option: str) -> float:
        if option == KMEANS:
            kernel = ""
        return self.scores[(dataset, kernel, option)]

    @property
    def datasets(self) -> list[str]:
        return list(dict.fromkeys(k[0] for k in self.scores))

    @property
    def kernels(self) -> list[str]:
        return list(dict.fromkeys(k[1] for k in self.scores if k[1]))

    def options(self, include_no: bool = True, include_kmeans: bool = True) -> list[str]:
        present = {k[2] for k in self.scores}
        wanted = [o for o in ALL_OPTIONS if o in present]
        wanted += sorted(present - set(ALL_OPTIONS))
        if not include_no:
            wanted = [o for o in wanted if o != NO]
        if not include_kmeans:
            wanted = [o for o in wanted if o != KMEANS]
        return wanted


@dataclass
class RankSummary:
    """Per-kernel option ranks and the global (kernel, option) pair ranking.

    ``per_kernel[kernel][option] = (mean rank, std of rank)`` across
    datasets. ``pairs`` lists ``(kernel, option, mean rank)`` best first.
    """

    per_kernel: dict[str, dict[str, tuple[float, float]]]
    pairs: list[tuple[str, str, float]]
    datasets: list[str]


def _ranks(values: Sequence[float], missing: str) -> np.ndarray:
    v = np.array(values, dtype=float)
    if np.isnan(v).any():
        if missing == "error":
            raise ValueError("score table has failed cells; cannot rank")
        v = np.where(np.isnan(v), -np.inf, v)
    return rankdata(-v, method="average")


def rank_options(
    table: ScoreTable,
    include_no: bool = True,
    include_kmeans: bool = True,
    missing: str = "error",
) -> RankSummary:
    """Average ranks of options per kernel and of (kernel, option) pairs.

    Within each dataset the options of one kernel are ranked by ARI,
    descending, with tied values sharing their average rank. The pair
    ranking pools every (kernel, option) cell of a dataset, with the
    k-means score entered once per kernel, and averages ranks across
    datasets. Failed cells (NaN) raise unless ``missing="worst"``.
    """
    datasets = table.datasets
    kernels = table.kernels
    options = table.options(include_no, include_kmeans)
    if not datasets or not kernels or not options:
        raise ValueError("score table is empty")

    def cell(ds, kern, opt):
        try:
            return table.get(ds, kern, opt)
        except KeyError:
            raise ValueError(f"missing cell ({ds}, {kern}, {opt})") from None

    per_kernel: dict[str, dict[str, tuple[float, float]]] = {}
    for kern in kernels:
        ranks = np.array(
            [_ranks([cell(ds, kern, o) for o in options], missing) for ds in datasets]
        )
        per_kernel[kern] = {
            o: (float(ranks[:, j].mean()), float(ranks[:, j].std())) for j, o in enumerate(options)
        }

    keys = [(kern, o) for kern in kernels for o in options]
    pooled = np.array([_ranks([cell(ds, kern, o) for kern, o in keys], missing) for ds in datasets])
    means = pooled.mean(axis=0)
    order = sorted(
        (i for i, (_, o) in enumerate(keys) if o != KMEANS), key=lambda i: (means[i], i)
    )
    pairs = [(keys[i][0], keys[i][1], float(means[i])) for i in order]
    return RankSummary(per_kernel=per_kernel, pairs=pairs, datasets=datasets)


def table_from_rows(rows: Iterable[Mapping[str, object]]) -> ScoreTable:
    """Build a :class:`ScoreTable` from dict rows with dataset/kernel/option/ari."""
    table = ScoreTable()
    for row in rows:
        ari = row.get("ari", "")
        value = float("nan") if ari in ("", None, "nan", "fail") else float(ari)
        alpha = row.get("alpha")
        alpha = None if alpha in ("", None) else float(alpha)
        table.set(str(row["dataset"]), str(row.get("kernel", "")), str(row["option"]), value, alpha)
    return table
