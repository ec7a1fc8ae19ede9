"""k-means and Shi-Malik spectral partitioning."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .numerics import DEBUG, NumericalError, check_symmetric, smallest_eigenpairs

log = logging.getLogger(__name__)

MAX_ITER = 300


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster id per node, ids in ``[0, k)``.

    ``inertia`` is set by :func:`kmeans`; ``shifted`` records whether
    :func:`spectral_partition` had to shift a kernel with negative entries.
    """

    labels: np.ndarray
    k: int
    inertia: float | None = None
    shifted: bool = False

    def __len__(self) -> int:
        return self.labels.shape[0]


def _sq_dist(X: np.ndarray, X_sq: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = X_sq[:, None] - 2.0 * (X @ centers.T) + np.einsum("ij,ij->i", centers, centers)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(X: np.ndarray, X_sq: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    closest = _sq_dist(X, X_sq, X[idx])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        closest = np.minimum(closest, _sq_dist(X, X_sq, X[[nxt]])[:, 0])
    return X[idx].copy()


def _lloyd(X: np.ndarray, X_sq: np.ndarray, centers: np.ndarray, max_iter: int):
    k = centers.shape[0]
    labels = None
    inertia = np.inf
    for _ in range(max_iter):
        dist = _sq_dist(X, X_sq, centers)
        # argmin returns the lowest cluster id on ties.
        new = np.argmin(dist, axis=1)
        new_inertia = float(dist[np.arange(X.shape[0]), new].sum())
        if DEBUG and new_inertia > inertia * (1 + 1e-9) + 1e-12:
            raise NumericalError(f"k-means inertia increased: {inertia} -> {new_inertia}")
        inertia = new_inertia
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
    dist = _sq_dist(X, X_sq, centers)
    labels = np.argmin(dist, axis=1)
    # Direct residuals avoid the cancellation in the expanded distance.
    resid = X - centers[labels]
    return labels, float(np.einsum("ij,ij->", resid, resid))


def kmeans(points, k: int, seed: int = 0, restarts: int = 10, max_iter: int = MAX_ITER) -> Partition:
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts`` runs.

    Restart ``r`` draws from ``numpy.random.default_rng([seed, r])``; the
    lowest-inertia run wins, ties going to the earliest restart.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("kmeans needs a non-empty n x p point matrix")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    X_sq = np.einsum("ij,ij->i", X, X)

    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeans_pp(X, X_sq, k, rng)
        labels, inertia = _lloyd(X, X_sq, centers, max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return Partition(labels=best[0].astype(np.int64), k=k, inertia=best[1])


def affinity_from_kernel(K) -> tuple[np.ndarray, bool]:
    """Nonnegative affinity for spectral clustering.

    A kernel with negative entries is shifted by its global minimum and its
    diagonal is zeroed. Nonnegative kernels are used unchanged. The result
    is divided by its largest entry. Returns ``(W, shifted)``.
    """
    W = check_symmetric(K, tol=1e-9, what="kernel").copy()
    W = (W + W.T) / 2
    shifted = False
    lo = float(W.min()) if W.size else 0.0
    if lo < 0:
        W -= lo
        np.fill_diagonal(W, 0.0)
        shifted = True
    top = float(W.max()) if W.size else 0.0
    if not top > 0:
        raise ValueError("kernel has zero total affinity")
    return W / top, shifted


def spectral_embedding(K, k: int) -> tuple[np.ndarray, bool]:
    """Rows of the first ``k`` generalized eigenvectors of ``(D - W, D)``."""
    W, shifted = affinity_from_kernel(K)
    deg = W.sum(axis=1)
    if not np.all(deg > 0):
        raise ValueError(f"node {int(np.argmin(deg))} has zero affinity degree")
    L = np.diag(deg) - W
    _, V = smallest_eigenpairs(L, k, B=deg)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    # Deterministic sign: largest-magnitude entry of each vector positive.
    pivot = np.argmax(np.abs(V), axis=0)
    V *= np.sign(V[pivot, np.arange(V.shape[1])])
    return V, shifted


def spectral_partition(K, k: int, seed: int = 0, restarts: int = 10) -> Partition:
    """Shi-Malik normalized-cut clustering of a kernel or affinity matrix."""
    if k < 2:
        raise ValueError("spectral partition needs k >= 2")
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or k > K.shape[0]:
        raise ValueError(f"k={k} exceeds the number of nodes")
    V, shifted = spectral_embedding(K, k)
    if shifted:
        log.debug("kernel had negative entries; shifted by its minimum")
    part = kmeans(V, k, seed=seed, restarts=restarts)
    return Partition(labels=part.labels, k=k, inertia=part.inertia, shifted=shifted)
