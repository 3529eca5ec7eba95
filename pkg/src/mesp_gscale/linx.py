"""The g-scaled linx bound.

    f(x; ups) = 1/2 ldet(M(x)) - sum_i x_i log ups_i,
    M(x)      = Diag(ups) C Diag(x) C Diag(ups) + Diag(e - x).

Points where ``M(x)`` is not positive definite are outside the domain; the
evaluators report this through ``in_domain`` rather than raising, so line
searches can back off.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .gamma import OutsideDomain


@dataclass
class LinxEval:
    value: float
    F_mat: np.ndarray
    Finv: np.ndarray = None
    in_domain: bool = True


def linx_matrix(C, x, ups) -> np.ndarray:
    Ct = ups[:, None] * C
    M = (Ct * x) @ Ct.T
    M[np.diag_indices_from(M)] += 1.0 - x
    return 0.5 * (M + M.T)


def _args(inst, x, ups):
    x = np.asarray(x, dtype=float)
    ups = np.ones(inst.n) if ups is None else np.asarray(ups, dtype=float)
    if np.any(ups <= 0):
        raise ValueError("scaling vector must be positive")
    return x, ups


def linx_value(inst, x, ups=None) -> LinxEval:
    x, ups = _args(inst, x, ups)
    M = linx_matrix(inst.C, x, ups)
    try:
        L = spectral.cholesky(M)
    except spectral.NotPositiveDefinite:
        return LinxEval(-np.inf, M, None, False)
    value = float(np.sum(np.log(np.diag(L)))) - float(x @ np.log(ups))
    Linv = np.linalg.inv(L)
    return LinxEval(value, M, Linv.T @ Linv, True)


def _require(ev):
    if not ev.in_domain:
        raise OutsideDomain("x is outside the linx domain")
    return ev.Finv


def linx_grad_x(inst, x, ups=None) -> np.ndarray:
    x, ups = _args(inst, x, ups)
    Finv = _require(linx_value(inst, x, ups))
    Ct = ups[:, None] * inst.C
    quad = np.einsum("ji,jk,ki->i", Ct, Finv, Ct)
    return 0.5 * (quad - np.diag(Finv)) - np.log(ups)


def linx_grad_logups(inst, x, ups=None) -> np.ndarray:
    """Gradient in ``log ups``: ``diag(M^-1) * (x - e) - (x - e)``."""
    x, ups = _args(inst, x, ups)
    Finv = _require(linx_value(inst, x, ups))
    xc = x - 1.0
    return np.diag(Finv) * xc - xc


def linx_hess_logups(inst, x, ups=None) -> np.ndarray:
    x, ups = _args(inst, x, ups)
    Finv = _require(linx_value(inst, x, ups))
    w = 1.0 - x
    H = 2.0 * np.diag(w * np.diag(Finv)) - 2.0 * (w[:, None] * (Finv * Finv) * w[None, :])
    return 0.5 * (H + H.T)


class LinxObjective:
    """Value, x-gradient and exact line search for the relaxation solver."""

    name = "linx"

    def __init__(self, inst, ups=None):
        self.inst = inst
        self.ups = np.ones(inst.n) if ups is None else np.asarray(ups, dtype=float)
        self.Ct = self.ups[:, None] * inst.C
        self.logups = np.log(self.ups)

    def _chol(self, x):
        return spectral.cholesky(linx_matrix(self.inst.C, x, self.ups))

    def value(self, x) -> float:
        try:
            L = self._chol(x)
        except spectral.NotPositiveDefinite:
            return -np.inf
        return float(np.sum(np.log(np.diag(L))) - x @ self.logups)

    def value_grad(self, x):
        try:
            L = self._chol(x)
        except spectral.NotPositiveDefinite:
            raise OutsideDomain("x is outside the linx domain") from None
        Linv = np.linalg.inv(L)
        Finv = Linv.T @ Linv
        W = Linv @ self.Ct
        g = 0.5 * (np.sum(W * W, axis=0) - np.diag(Finv)) - self.logups
        return float(np.sum(np.log(np.diag(L))) - x @ self.logups), g

    def grad_logups(self, x):
        return linx_grad_logups(self.inst, x, self.ups)

    def line_search(self, x, d, tmax):
        """Exact maximizer of ``t -> f(x + t d)`` on ``[0, tmax]``.

        Along a segment ``M(x + t d) = M(x) + t D`` with ``D`` symmetric, so
        with ``mu = eig(L^-1 D L^-T)`` the objective is
        ``1/2 sum log(1 + t mu) - t d^T log(ups)`` up to a constant.
        """
        L = self._chol(x)
        D = (self.Ct * d) @ self.Ct.T
        D[np.diag_indices_from(D)] -= d
        Linv = np.linalg.inv(L)
        mu = np.linalg.eigvalsh(Linv @ (0.5 * (D + D.T)) @ Linv.T)
        c = float(d @ self.logups)
        # stay strictly inside 1 + t mu > 0
        neg = mu < 0
        if np.any(neg):
            tmax = min(tmax, 0.999999 * float(np.min(-1.0 / mu[neg])))

        def dphi(t):
            return 0.5 * float(np.sum(mu / (1.0 + t * mu))) - c

        return _maximize_concave_1d(dphi, tmax, lambda t: -0.5 * float(np.sum((mu / (1.0 + t * mu)) ** 2)))


def _maximize_concave_1d(dphi, tmax, d2phi=None, tol=1e-15, max_iter=200):
    """Root of a decreasing derivative on ``[0, tmax]`` (safeguarded Newton)."""
    if tmax <= 0:
        return 0.0
    if dphi(tmax) >= 0:
        return tmax
    if dphi(0.0) <= 0:
        return 0.0
    lo, hi = 0.0, tmax
    t = 0.5 * tmax
    for _ in range(max_iter):
        g = dphi(t)
        if g > 0:
            lo = t
        else:
            hi = t
        if hi - lo <= tol * max(1.0, hi):
            break
        tn = None
        if d2phi is not None:
            h = d2phi(t)
            if h < 0:
                tn = t - g / h
        if tn is None or not lo < tn < hi:
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= tol * max(1.0, t):
            t = tn
            break
        t = tn
    return t
