"""Dense symmetric linear algebra shared by every bound.

Cholesky failure is the canonical "outside the domain" signal: the bound
modules catch :class:`NotPositiveDefinite` (or test ``in_domain`` flags)
instead of inspecting eigenvalues themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

EPS = np.finfo(float).eps


class NotSymmetric(ValueError):
    pass


class NotPositiveDefinite(ValueError):
    pass


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues sorted non-increasing with matching orthonormal columns."""

    lambdas: np.ndarray
    Q: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.Q * self.lambdas) @ self.Q.T


def _check_symmetric(X, rtol=1e-10):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {X.shape}")
    scale = max(np.abs(X).max(initial=0.0), 1.0)
    if np.abs(X - X.T).max(initial=0.0) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (X + X.T)


def sym_eig(X) -> SpectralData:
    """Full eigendecomposition of a symmetric matrix, descending order."""
    X = _check_symmetric(X)
    w, V = np.linalg.eigh(X)
    return SpectralData(w[::-1].copy(), V[:, ::-1].copy())


def jacobi_eig(X, tol=1e-12, max_sweeps=100) -> SpectralData:
    """Cyclic Jacobi eigensolver.

    Slow (pure Python rotations) but independent of LAPACK; the test suite
    uses it to cross-check :func:`sym_eig`.  Sweeps stop once the
    off-diagonal Frobenius norm drops below ``tol * ||X||_F``.
    """
    A = _check_symmetric(X).copy()
    n = A.shape[0]
    V = np.eye(n)
    target = tol * max(np.linalg.norm(A), EPS)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                # rotate rows/columns p, q
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - sn * Aq
                A[:, q] = sn * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - sn * Aq
                A[q, :] = sn * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - sn * Vq
                V[:, q] = sn * Vp + c * Vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return SpectralData(w[order], V[:, order])


def rank_threshold(lam_max, n):
    return max(n, 1) * EPS * max(lam_max, 0.0)


def numeric_rank(X) -> int:
    """Number of eigenvalues above ``n * eps * lambda_max``."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0
    lam = np.linalg.eigvalsh(0.5 * (X + X.T))
    return int(np.sum(lam > rank_threshold(lam[-1], X.shape[0])))


def cholesky(X) -> np.ndarray:
    """Lower Cholesky factor, raising :class:`NotPositiveDefinite`.

    Pivots with ``L_ii^2 <= n * eps * max(diag X)`` count as failure: such a
    matrix is singular to working precision even if LAPACK completes.
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NotPositiveDefinite("non-finite entries")
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if X.size and np.min(np.diag(L)) ** 2 <= rank_threshold(float(np.max(np.diag(X))), X.shape[0]):
        raise NotPositiveDefinite("matrix is numerically singular")
    return L


def ldet_pd(X) -> float:
    """log det of a positive definite matrix via Cholesky."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0.0
    L = cholesky(X)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def solve_pd(X, B) -> np.ndarray:
    """Solve ``X Y = B`` for positive definite ``X``."""
    L = cholesky(X)
    return sla.cho_solve((L, True), np.asarray(B, dtype=float))


def inv_pd(X) -> np.ndarray:
    """Symmetric inverse of a positive definite matrix."""
    Y = solve_pd(X, np.eye(np.asarray(X).shape[0]))
    return 0.5 * (Y + Y.T)
