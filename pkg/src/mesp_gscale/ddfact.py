"""The g-scaled factorization (DDFact) bound.

With ``C = F F^T`` (``F`` is n x k),

    Fx(x; ups) = F^T Diag(ups * x) F,
    f(x; ups)  = Gamma_s(Fx) - sum_i x_i log ups_i.

The generalized gradient in ``x`` and the gradient in ``ups`` both go
through ``G = F Q Diag(beta) Q^T F^T`` where ``(Q, beta)`` come from the
kernel in :mod:`mesp_gscale.gamma`.  Zero eigenvalues receive the tail
weight, which is what makes the ``x``-gradient exact along feasible
directions at boundary points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .gamma import GammaEval, OutsideDomain, gamma_s, gamma_s_unchecked
from .instance import Factorization, factorize


@dataclass
class DdfactEval:
    value: float
    Fx: np.ndarray
    gamma_eval: GammaEval = None
    in_domain: bool = True


def ddfact_matrix(F, x, ups) -> np.ndarray:
    M = (F.T * (ups * x)) @ F
    return 0.5 * (M + M.T)


def _args(inst, fac, x, ups):
    fac = factorize(inst) if fac is None else fac
    x = np.asarray(x, dtype=float)
    ups = np.ones(inst.n) if ups is None else np.asarray(ups, dtype=float)
    if np.any(ups <= 0):
        raise ValueError("scaling vector must be positive")
    return fac, x, ups


def ddfact_value(inst, fac: Factorization = None, x=None, ups=None) -> DdfactEval:
    fac, x, ups = _args(inst, fac, x, ups)
    Fx = ddfact_matrix(fac.F, x, ups)
    if np.any(x < 0):
        return DdfactEval(-np.inf, Fx, None, False)
    try:
        phi, ge = gamma_s(Fx, inst.s)
    except OutsideDomain:
        return DdfactEval(-np.inf, Fx, None, False)
    return DdfactEval(phi - float(x @ np.log(ups)), Fx, ge, True)


def _G_diag(F, ge):
    FQ = F @ ge.Q
    return np.einsum("ij,j,ij->i", FQ, ge.beta, FQ)


def _require(ev):
    if not ev.in_domain:
        raise OutsideDomain("x is outside the DDFact domain")
    return ev.gamma_eval


def ddfact_gen_grad_x(inst, fac=None, x=None, ups=None) -> np.ndarray:
    fac, x, ups = _args(inst, fac, x, ups)
    ge = _require(ddfact_value(inst, fac, x, ups))
    return ups * _G_diag(fac.F, ge) - np.log(ups)


def ddfact_grad_ups(inst, fac=None, x=None, ups=None) -> np.ndarray:
    """Gradient in ``ups`` (not log-coordinates)."""
    fac, x, ups = _args(inst, fac, x, ups)
    ge = _require(ddfact_value(inst, fac, x, ups))
    return x * _G_diag(fac.F, ge) - x / ups


def ddfact_grad_logups(inst, fac=None, x=None, ups=None) -> np.ndarray:
    fac, x, ups = _args(inst, fac, x, ups)
    return ups * ddfact_grad_ups(inst, fac, x, ups)


class DdfactObjective:
    name = "ddfact"

    def __init__(self, inst, ups=None, fac=None):
        self.inst = inst
        self.fac = factorize(inst) if fac is None else fac
        self.F = self.fac.F
        self.ups = np.ones(inst.n) if ups is None else np.asarray(ups, dtype=float)
        self.logups = np.log(self.ups)

    def _eval(self, x):
        if np.any(x < 0):
            raise OutsideDomain("negative component")
        return gamma_s_unchecked(ddfact_matrix(self.F, x, self.ups), self.inst.s)

    def value(self, x) -> float:
        try:
            phi, _ = self._eval(x)
        except OutsideDomain:
            return -np.inf
        return phi - float(x @ self.logups)

    def value_grad(self, x):
        phi, ge = self._eval(x)
        g = self.ups * _G_diag(self.F, ge) - self.logups
        return phi - float(x @ self.logups), g

    def grad_logups(self, x):
        _, ge = self._eval(x)
        return x * (self.ups * _G_diag(self.F, ge)) - x

    def line_search(self, x, d, tmax):
        """Root of the (monotone, continuous) directional derivative."""

        def dphi(t):
            try:
                _, g = self.value_grad(np.maximum(x + t * d, 0.0))
            except OutsideDomain:
                return -1e300
            return float(g @ d)

        if tmax <= 0:
            return 0.0
        hi = dphi(tmax)
        if hi >= 0:
            return tmax
        lo = dphi(0.0)
        if lo <= 0:
            return 0.0
        return brentq(dphi, 0.0, tmax, xtol=1e-13, rtol=1e-12, maxiter=200)
