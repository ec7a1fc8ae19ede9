"""Undirected weighted attributed graphs and their derived matrices.

All matrices are dense ``numpy`` arrays. Functions that derive matrices
accept either a :class:`Graph` or a raw adjacency matrix, so the same code
path serves plain and attribute-fused adjacencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph input (bad index, weight, or shape)."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Symmetric weighted graph with optional node attributes and labels.

    Build instances with :func:`build_graph`; the constructor does not
    validate its inputs.
    """

    adjacency: np.ndarray
    attributes: np.ndarray | None = None
    labels: np.ndarray | None = None
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def m(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    @property
    def d(self) -> int:
        return 0 if self.attributes is None else self.attributes.shape[1]

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            raise GraphError("graph has no labels")
        return int(np.unique(self.labels).size)

    def edges(self) -> list[tuple[int, int, float]]:
        """Upper-triangular edge list ``(i, j, w)`` with ``i < j``."""
        rows, cols = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(rows, cols)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)

        return (
            same(self.adjacency, other.adjacency)
            and same(self.attributes, other.attributes)
            and same(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]


def build_graph(
    edges: Iterable[Sequence[float]],
    n: int | None = None,
    attributes=None,
    labels=None,
    name: str = "",
) -> Graph:
    """Build a symmetric graph from an edge list.

    Each edge is ``(i, j)`` or ``(i, j, w)``; a missing weight means 1.
    Reciprocal or duplicate edges collapse to their maximum weight and
    self-loops are dropped. When ``n`` is omitted it is taken from the
    attribute or label row count, else from the largest node index.
    """
    edge_list = [tuple(e) for e in edges]
    if attributes is not None:
        attributes = np.array(attributes, dtype=float)
        if attributes.ndim != 2:
            raise GraphError("attributes must be a 2-D array")
        if not np.all(np.isfinite(attributes)):
            raise GraphError("attributes must be finite")
    if labels is not None:
        labels = np.array(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise GraphError("labels must be a 1-D sequence")

    if n is None:
        if attributes is not None:
            n = attributes.shape[0]
        elif labels is not None:
            n = labels.shape[0]
        else:
            n = 1 + max((max(int(e[0]), int(e[1])) for e in edge_list), default=-1)
    if n < 0:
        raise GraphError("node count must be nonnegative")
    if attributes is not None and attributes.shape[0] != n:
        raise GraphError(f"attribute rows ({attributes.shape[0]}) != node count ({n})")
    if labels is not None and labels.shape[0] != n:
        raise GraphError(f"label count ({labels.shape[0]}) != node count ({n})")

    A = np.zeros((n, n))
    for e in edge_list:
        if len(e) not in (2, 3):
            raise GraphError(f"edge must be (i, j) or (i, j, w), got {e!r}")
        i, j = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) == 3 else 1.0
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
        if not (w > 0 and np.isfinite(w)):
            raise GraphError(f"edge ({i}, {j}) has nonpositive or non-finite weight {w}")
        if i == j:
            continue
        if w > A[i, j]:
            A[i, j] = A[j, i] = w

    return Graph(
        adjacency=_frozen(A),
        attributes=None if attributes is None else _frozen(attributes),
        labels=None if labels is None else _frozen(labels),
        name=name,
    )


def as_adjacency(g) -> np.ndarray:
    """Return the adjacency of a :class:`Graph`, or validate a square matrix."""
    if isinstance(g, Graph):
        return g.adjacency
    A = np.asarray(g, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {A.shape}")
    return A


def degrees(g) -> np.ndarray:
    return as_adjacency(g).sum(axis=1)


def degree_matrix(g) -> np.ndarray:
    return np.diag(degrees(g))


def laplacian(g) -> np.ndarray:
    A = as_adjacency(g)
    return np.diag(A.sum(axis=1)) - A


def markov(g, isolated: str = "uniform") -> np.ndarray:
    """Row-stochastic transition matrix ``D^-1 A``.

    Rows of zero-degree nodes become uniform (``1/n``) under the default
    ``isolated="uniform"`` policy; ``isolated="error"`` rejects them.
    """
    A = as_adjacency(g)
    deg = A.sum(axis=1)
    zero = deg <= 0
    if zero.any():
        if isolated == "error":
            raise GraphError(f"zero-degree node {int(np.argmax(zero))} has no transitions")
        if isolated != "uniform":
            raise ValueError(f"unknown isolated-node policy {isolated!r}")
    safe = np.where(zero, 1.0, deg)
    P = A / safe[:, None]
    if zero.any():
        P[zero] = 1.0 / A.shape[0]
    return P


def cost_matrix(g) -> np.ndarray:
    """Edge costs ``1/a_ij``; non-edges hold ``inf`` (no finite cost)."""
    A = as_adjacency(g)
    C = np.full(A.shape, np.inf)
    mask = A > 0
    C[mask] = 1.0 / A[mask]
    return C
