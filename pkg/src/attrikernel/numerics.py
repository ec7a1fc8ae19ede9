"""Dense linear algebra with explicit accuracy guards."""

from __future__ import annotations

import os

import numpy as np
import scipy.linalg as sla

#: Residual self-checks on every call when ATTRIKERNEL_DEBUG is set.
DEBUG = bool(os.environ.get("ATTRIKERNEL_DEBUG"))

SYMMETRY_TOL = 1e-10
COND_LIMIT = 1e12
#: Largest eigenvalue fed to ``exp``; ``exp(709.8)`` overflows float64.
MAX_EXPONENT = 700.0


class NumericalError(ArithmeticError):
    """A computation would return non-finite or untrustworthy values."""


class SingularMatrixError(NumericalError):
    pass


def check_square(M, what: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be square, got shape {M.shape}")
    return M


def check_symmetric(M, tol: float = SYMMETRY_TOL, what: str = "matrix") -> np.ndarray:
    """Return ``M`` as a float array, raising if ``|M - M^T|`` exceeds ``tol``.

    The tolerance is relative to ``max(1, max|M|)``.
    """
    M = check_square(M, what)
    if M.size:
        scale = max(1.0, float(np.max(np.abs(M))))
        gap = float(np.max(np.abs(M - M.T)))
        if not gap <= tol * scale:
            raise ValueError(f"{what} is not symmetric (max asymmetry {gap:.3g})")
    return M


def _finite(M: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(M)):
        raise NumericalError(f"{what} produced non-finite entries")
    return M


def sym_expm(M) -> np.ndarray:
    """Matrix exponential of a symmetric matrix via ``V exp(L) V^T``."""
    M = check_symmetric(M)
    M = (M + M.T) / 2
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if w.size and w[-1] > MAX_EXPONENT:
        raise NumericalError(
            f"largest eigenvalue {w[-1]:.4g} exceeds the overflow guard {MAX_EXPONENT}"
        )
    E = (V * np.exp(w)) @ V.T
    return _finite((E + E.T) / 2, "sym_expm")


def inverse(M, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Inverse through an LU factorisation, refusing ill-conditioned input.

    The 1-norm condition number is estimated from the factorisation
    (LAPACK ``gecon``); anything above ``cond_limit`` raises
    :class:`SingularMatrixError`.
    """
    M = check_square(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    _finite(M, "inverse input")
    lu, piv, info = sla.lapack.dgetrf(M)
    if info > 0:
        raise SingularMatrixError(f"matrix is exactly singular (zero pivot {info})")
    anorm = float(np.max(np.sum(np.abs(M), axis=0)))
    rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    if not rcond * cond_limit >= 1.0:
        cond = np.inf if rcond == 0 else 1.0 / rcond
        raise SingularMatrixError(f"condition number {cond:.3g} exceeds {cond_limit:.0e}")
    Minv = sla.lu_solve((lu, piv), np.eye(n))
    _finite(Minv, "inverse")
    if DEBUG:
        resid = float(np.max(np.abs(M @ Minv - np.eye(n))))
        if resid > 1e-8:
            raise NumericalError(f"inverse residual {resid:.3g} exceeds 1e-8")
    return Minv


def smallest_eigenpairs(M, k: int, B=None) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` algebraically smallest eigenpairs of ``M v = lambda B v``.

    ``B`` is an optional positive diagonal metric given either as a vector
    or a diagonal matrix. Eigenvalues come back ascending; eigenvectors are
    the columns of the second result and are ``B``-orthonormal.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    M = (M + M.T) / 2
    b = None
    if B is not None:
        B = np.asarray(B, dtype=float)
        b = np.diag(B).copy() if B.ndim == 2 else B.copy()
        if b.shape != (n,) or not np.all(b > 0):
            raise ValueError("metric B must be positive diagonal")
    try:
        if b is None:
            w, V = sla.eigh(M, subset_by_index=[0, k - 1])
        else:
            # Reduce to a standard symmetric problem with B^-1/2 M B^-1/2.
            s = 1.0 / np.sqrt(b)
            N = s[:, None] * M * s[None, :]
            w, U = sla.eigh((N + N.T) / 2, subset_by_index=[0, k - 1])
            V = s[:, None] * U
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if DEBUG:
        Bv = V if b is None else b[:, None] * V
        resid = np.linalg.norm(M @ V - Bv * w, axis=0)
        bound = 1e-8 * max(1.0, float(np.linalg.norm(M, 2)))
        if np.any(resid > bound):
            raise NumericalError(f"eigen residual {resid.max():.3g} exceeds {bound:.3g}")
    return w, V


def double_center(D) -> np.ndarray:
    """``-1/2 H D H`` with the centering matrix ``H = I - 11^T/n``."""
    D = check_square(D)
    if D.shape[0] == 0:
        return D.copy()
    row = D.mean(axis=1, keepdims=True)
    col = D.mean(axis=0, keepdims=True)
    return -0.5 * (D - row - col + D.mean())
