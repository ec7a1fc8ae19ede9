"""Attribute similarity measures and their fusion into the adjacency matrix.

Pairwise functions (``cosine_similarity`` etc.) work on two vectors and
serve as the readable reference. :func:`similarity_matrix` computes all
pairs at once; for binary attributes it works from sparse dot products,
which gives exactly the same numbers as the pairwise functions.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist


class Similarity(str, Enum):
    MC = "MC"  # matching coefficient
    CS = "CS"  # cosine
    JS = "JS"  # extended Jaccard
    MS = "MS"  # Manhattan
    ES = "ES"  # Euclidean

    @classmethod
    def parse(cls, name) -> "Similarity":
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper()
        aliases = {
            "MATCHING": "MC",
            "COSINE": "CS",
            "JACCARD": "JS",
            "MANHATTAN": "MS",
            "EUCLIDEAN": "ES",
        }
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown similarity measure {name!r}") from None


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"attribute vectors differ in length ({x.size} vs {y.size})")
    return x, y


def matching_coefficient(x, y) -> float:
    x, y = _pair(x, y)
    if x.size == 0:
        raise ValueError("matching coefficient needs d >= 1")
    return float(np.count_nonzero(x == y)) / x.size


def cosine_similarity(x, y) -> float:
    """Cosine of the angle between ``x`` and ``y``; 0 if either is all-zero."""
    x, y = _pair(x, y)
    denom = np.sqrt(float(x @ x) * float(y @ y))
    if denom == 0:
        return 0.0
    return min(1.0, max(-1.0, float(x @ y) / denom))


def extended_jaccard(x, y) -> float:
    x, y = _pair(x, y)
    dot = float(x @ y)
    denom = float(x @ x) + float(y @ y) - dot
    if denom == 0:
        return 0.0
    return dot / denom


def manhattan_similarity(x, y) -> float:
    x, y = _pair(x, y)
    return 1.0 / (1.0 + float(np.sum(np.abs(x - y))))


def euclidean_similarity(x, y) -> float:
    x, y = _pair(x, y)
    return 1.0 / (1.0 + float(np.sqrt(np.sum((x - y) ** 2))))


PAIRWISE = {
    Similarity.MC: matching_coefficient,
    Similarity.CS: cosine_similarity,
    Similarity.JS: extended_jaccard,
    Similarity.MS: manhattan_similarity,
    Similarity.ES: euclidean_similarity,
}


def _is_binary(F: np.ndarray) -> bool:
    return bool(np.all((F == 0) | (F == 1)))


def similarity_matrix(F, measure) -> np.ndarray:
    """Pairwise similarity ``S[i, j] = measure(F[i], F[j])`` for all node pairs."""
    measure = Similarity.parse(measure)
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise ValueError(f"attribute matrix must be n x d with n, d >= 1, got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("attribute matrix has non-finite entries")
    n, d = F.shape
    binary = _is_binary(F)

    if binary:
        Fs = sp.csr_matrix(F)
        dot = (Fs @ Fs.T).toarray()
    else:
        dot = F @ F.T
        dot = (dot + dot.T) / 2
    sq = np.diag(dot).copy()

    if measure is Similarity.CS:
        denom = np.sqrt(np.outer(sq, sq))
        S = np.divide(dot, denom, out=np.zeros_like(dot), where=denom > 0)
        np.clip(S, -1.0, 1.0, out=S)
    elif measure is Similarity.JS:
        denom = sq[:, None] + sq[None, :] - dot
        S = np.divide(dot, denom, out=np.zeros_like(dot), where=denom != 0)
    elif measure is Similarity.MC:
        if binary:
            agree = d - sq[:, None] - sq[None, :] + 2 * dot
        else:
            agree = np.empty((n, n))
            for i in range(n):
                agree[i] = np.count_nonzero(F == F[i], axis=1)
        S = agree / d
    elif measure is Similarity.MS:
        if binary:
            dist = sq[:, None] + sq[None, :] - 2 * dot
        else:
            dist = cdist(F, F, metric="cityblock")
        S = 1.0 / (1.0 + dist)
    else:
        if binary:
            dist = np.sqrt(sq[:, None] + sq[None, :] - 2 * dot)
        else:
            dist = cdist(F, F, metric="euclidean")
        S = 1.0 / (1.0 + dist)
    return S


def fuse(A, S, beta: float) -> np.ndarray:
    """Blend structure and attributes: ``beta * A + (1 - beta) * S``.

    Every node pair is blended, including non-adjacent ones; the diagonal
    is set to zero.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    A = np.asarray(A, dtype=float)
    S = np.asarray(S, dtype=float)
    if A.shape != S.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: A {A.shape}, S {S.shape}")
    As = beta * A + (1.0 - beta) * S
    np.fill_diagonal(As, 0.0)
    return As
