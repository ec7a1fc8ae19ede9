"""Proximity measures on (possibly attribute-fused) adjacency matrices.

Every kernel function takes an adjacency matrix (or :class:`Graph`) and a
parameter ``alpha`` and returns a dense symmetric ``n x n`` array.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .graph import as_adjacency, cost_matrix, laplacian, markov
from .numerics import (
    NumericalError,
    check_symmetric,
    double_center,
    inverse,
    sym_expm,
)

#: Entries with smaller magnitude are set to exactly zero.
CLAMP = 1e-14


class Kernel(str, Enum):
    COMMUNICABILITY = "communicability"
    HEAT = "heat"
    PAGERANK = "pagerank"
    FREE_ENERGY = "fe"
    SCCT = "scct"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, name) -> "Kernel":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "comm": "communicability",
            "c": "communicability",
            "h": "heat",
            "pr": "pagerank",
            "page_rank": "pagerank",
            "free_energy": "fe",
            "sigmoid_commute_time": "scct",
        }
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown kernel {name!r}") from None


_LABELS = {
    Kernel.COMMUNICABILITY: "Communicability",
    Kernel.HEAT: "Heat",
    Kernel.PAGERANK: "PR",
    Kernel.FREE_ENERGY: "FE",
    Kernel.SCCT: "SCCT",
}


def _positive(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0 and np.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    return alpha


def _clean(K: np.ndarray) -> np.ndarray:
    K = (K + K.T) / 2
    K[np.abs(K) < CLAMP] = 0.0
    return K


def communicability(A, alpha: float) -> np.ndarray:
    """``exp(alpha A)``; raises if ``alpha * lambda_max(A)`` exceeds 700."""
    alpha = _positive(alpha)
    A = check_symmetric(as_adjacency(A), what="adjacency")
    return _clean(sym_expm(alpha * A))


def heat(A, alpha: float) -> np.ndarray:
    alpha = _positive(alpha)
    A = check_symmetric(as_adjacency(A), what="adjacency")
    return _clean(sym_expm(-alpha * laplacian(A)))


def pagerank_raw(A, alpha: float) -> np.ndarray:
    """Unsymmetrised ``(I - alpha P)^-1``."""
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"PageRank alpha must lie in (0, 1), got {alpha}")
    P = markov(as_adjacency(A))
    n = P.shape[0]
    return inverse(np.eye(n) - alpha * P)


def pagerank_kernel(A, alpha: float) -> np.ndarray:
    K = pagerank_raw(A, alpha)
    return _clean(K)


class FreeEnergy(NamedTuple):
    """Intermediate and final matrices of the free-energy construction."""

    W: np.ndarray
    Z: np.ndarray
    S: np.ndarray  # expected-cost matrix; exposed for inspection only
    Phi: np.ndarray
    distance: np.ndarray
    kernel: np.ndarray


def free_energy_details(
    A, alpha: float, C=None, diagonal_correction: bool = True
) -> FreeEnergy:
    alpha = _positive(alpha)
    A = check_symmetric(as_adjacency(A), what="adjacency")
    n = A.shape[0]
    P = markov(A)
    C = cost_matrix(A) if C is None else np.asarray(C, dtype=float)
    if C.shape != A.shape:
        raise ValueError(f"cost matrix shape {C.shape} != adjacency shape {A.shape}")

    edge = A > 0
    W = np.zeros_like(P)
    W[edge] = np.exp(-alpha * C[edge]) * P[edge]
    Z = inverse(np.eye(n) - W)

    bad = ~(Z > 0)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise NumericalError(
            f"free energy undefined: node {j} is unreachable from node {i} (z={Z[i, j]:.3g})"
        )

    CW = np.zeros_like(W)
    CW[edge] = C[edge] * W[edge]
    S = (Z @ CW) / Z

    if diagonal_correction:
        Phi = -np.log(Z / np.diag(Z)[None, :]) / alpha
        np.fill_diagonal(Phi, 0.0)
    else:
        Phi = np.log(Z) / alpha
    if not np.all(np.isfinite(Phi)):
        raise NumericalError("free energy potentials are not finite")
    Delta = (Phi + Phi.T) / 2
    if diagonal_correction:
        Delta = np.maximum(Delta, 0.0)
    return FreeEnergy(W, Z, S, Phi, Delta, _clean(distance_to_kernel(Delta, strict=False)))


def free_energy(A, alpha: float, C=None, diagonal_correction: bool = True):
    """Free-energy distance and its kernel; returns ``(distance, kernel)``.

    With ``diagonal_correction`` (default) the potentials are
    ``-log(z_ij / z_jj) / alpha``, giving a zero-diagonal distance.
    Without it they are ``log(z_ij) / alpha`` taken literally.
    """
    fe = free_energy_details(A, alpha, C, diagonal_correction)
    return fe.distance, fe.kernel


def fe_kernel(A, alpha: float, diagonal_correction: bool = True) -> np.ndarray:
    return free_energy(A, alpha, diagonal_correction=diagonal_correction)[1]


def cct_kernel(A) -> np.ndarray:
    """Corrected commute-time kernel (no sigmoid)."""
    A = check_symmetric(as_adjacency(A), what="adjacency")
    n = A.shape[0]
    d = A.sum(axis=1)
    if not np.all(d > 0):
        raise NumericalError(f"corrected commute time needs positive degrees (node {int(np.argmin(d))})")
    vol = float(d.sum())
    s = 1.0 / np.sqrt(d)
    M = s[:, None] * (A - np.outer(d, d) / vol) * s[None, :]
    M = (M + M.T) / 2
    inner = M @ inverse(np.eye(n) - M) @ M
    K = s[:, None] * inner * s[None, :]
    K = double_center((K + K.T) / 2) * -2.0
    return (K + K.T) / 2


def scct(A, alpha: float) -> np.ndarray:
    """Sigmoid of the CCT kernel scaled by its entrywise standard deviation."""
    alpha = _positive(alpha)
    K = cct_kernel(A)
    sigma = float(np.std(K))
    if not sigma > 0:
        raise NumericalError("corrected commute-time kernel is constant (sigma = 0)")
    out = expit(alpha * K / sigma)
    out = (out + out.T) / 2
    # Saturated entries would round to exactly 0 or 1; keep them inside the
    # open interval. The floor is the clamp threshold so clamping never zeros them.
    return np.clip(out, CLAMP, np.nextafter(1.0, 0.0))


def distance_to_kernel(Delta, strict: bool = True) -> np.ndarray:
    """``K = -1/2 H Delta H`` for a symmetric zero-diagonal distance matrix."""
    Delta = check_symmetric(Delta, tol=1e-9, what="distance matrix")
    if strict and np.any(np.diag(Delta) != 0):
        raise ValueError("distance matrix must have a zero diagonal")
    return double_center(Delta)


def compute_kernel(kernel, A, alpha: float, **options) -> np.ndarray:
    """Dispatch by :class:`Kernel` name."""
    kernel = Kernel.parse(kernel)
    if kernel is Kernel.COMMUNICABILITY:
        return communicability(A, alpha)
    if kernel is Kernel.HEAT:
        return heat(A, alpha)
    if kernel is Kernel.PAGERANK:
        return pagerank_kernel(A, alpha)
    if kernel is Kernel.FREE_ENERGY:
        return fe_kernel(A, alpha, **options)
    return scct(A, alpha)
