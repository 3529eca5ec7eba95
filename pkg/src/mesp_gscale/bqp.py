"""Evaluation of the g-scaled BQP bound at supplied lifted points.

    f(x, X; ups) = ldet((Diag(ups) C Diag(ups)) o X + Diag(e - x)) - 2 sum_i x_i log ups_i

Maximizing over the lifted set P(n, s) needs an SDP solver and is not
provided; this module evaluates the objective, its gradient and Hessian in
``log ups`` at given points, and builds integer lifts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .gamma import OutsideDomain
from .instance import scale_matrix


def in_lifted_set(x, X, s, tol=1e-8) -> bool:
    """Membership in P(n, s): ``X - x x^T`` PSD, ``diag(X) = x``, ``e^T x = s``, ``X e = s x``."""
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.shape != (x.shape[0], x.shape[0]) or np.abs(X - X.T).max(initial=0) > tol:
        return False
    if np.abs(np.diag(X) - x).max() > tol or abs(x.sum() - s) > tol:
        return False
    if np.abs(X.sum(axis=1) - s * x).max() > tol:
        return False
    R = X - np.outer(x, x)
    return bool(np.linalg.eigvalsh(0.5 * (R + R.T))[0] >= -tol)


@dataclass(frozen=True)
class BqpPoint:
    x: np.ndarray
    X: np.ndarray
    s: int

    @property
    def in_P(self) -> bool:
        return in_lifted_set(self.x, self.X, self.s)


def bqp_lift_integer(x01) -> BqpPoint:
    x = np.asarray(x01, dtype=float)
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("integer lift needs a 0/1 vector")
    s = int(x.sum())
    if not 0 < s < x.shape[0]:
        raise ValueError(f"cardinality {s} is not strictly between 0 and n")
    return BqpPoint(x, np.outer(x, x), s)


def bqp_matrix(C, pt: BqpPoint, ups) -> np.ndarray:
    M = scale_matrix(C, ups) * pt.X
    M[np.diag_indices_from(M)] += 1.0 - pt.x
    return 0.5 * (M + M.T)


def _ups(inst, ups):
    return np.ones(inst.n) if ups is None else np.asarray(ups, dtype=float)


def bqp_value(inst, pt: BqpPoint, ups=None):
    """Objective value, or ``None`` when the matrix argument is not PD."""
    ups = _ups(inst, ups)
    if pt.s != inst.s:
        raise ValueError(f"point has cardinality {pt.s}, instance has s={inst.s}")
    try:
        ld = spectral.ldet_pd(bqp_matrix(inst.C, pt, ups))
    except spectral.NotPositiveDefinite:
        return None
    return ld - 2.0 * float(pt.x @ np.log(ups))


def _finv(inst, pt, ups):
    try:
        return spectral.inv_pd(bqp_matrix(inst.C, pt, ups))
    except spectral.NotPositiveDefinite:
        raise OutsideDomain("point is outside the BQP domain") from None


def bqp_grad_logups(inst, pt: BqpPoint, ups=None) -> np.ndarray:
    ups = _ups(inst, ups)
    Finv = _finv(inst, pt, ups)
    xc = pt.x - 1.0
    return 2.0 * (np.diag(Finv) * xc - xc)


def bqp_hess_logups(inst, pt: BqpPoint, ups=None) -> np.ndarray:
    ups = _ups(inst, ups)
    Finv = _finv(inst, pt, ups)
    w = 1.0 - pt.x
    H = 4.0 * np.diag(w * np.diag(Finv)) - 4.0 * (w[:, None] * (Finv * Finv) * w[None, :])
    return 0.5 * (H + H.T)
