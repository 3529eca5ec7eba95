"""Choosing the scaling vector.

``z(psi)`` is the relaxation optimum at ``ups = exp(psi)``.  For any maximizer
``x*`` of the relaxation, the ``psi``-gradient of the objective at ``x*`` is a
subgradient of ``z`` (linx: ``z`` is convex in ``psi``).  We minimize
``z`` with BFGS using that subgradient, and tune the scalar o-scaling
``ups = gamma * e`` with a safeguarded Newton iteration.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .relax import RelaxationResult, make_objective, solve_relaxation

log = logging.getLogger(__name__)


class ScalingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalingVector:
    ups: np.ndarray

    def __post_init__(self):
        ups = np.asarray(self.ups, dtype=float)
        if ups.ndim != 1 or not np.all(np.isfinite(ups)) or not np.all(ups > 0):
            raise ValueError("scaling vector entries must be positive and finite")
        object.__setattr__(self, "ups", ups)

    @classmethod
    def from_psi(cls, psi):
        return cls(np.exp(np.asarray(psi, dtype=float)))

    @classmethod
    def ones(cls, n, gamma=1.0):
        return cls(np.full(n, float(gamma)))

    @property
    def psi(self) -> np.ndarray:
        return np.log(self.ups)


def _as_ups(inst, ups):
    if ups is None:
        return np.ones(inst.n)
    if isinstance(ups, ScalingVector):
        return ups.ups
    return np.asarray(ups, dtype=float)


def subgrad_z(inst, bound, ups, rr: RelaxationResult, fac=None) -> np.ndarray:
    """Subgradient of ``psi -> z(psi)`` in log-coordinates, taken at ``rr.x_star``."""
    if not rr.converged:
        raise ScalingError(f"relaxation not converged (gap {rr.fw_gap:.3g})")
    obj = make_objective(inst, bound, _as_ups(inst, ups), fac)
    return obj.grad_logups(rr.x_star)


def evaluate_z(inst, bound, ups, tol=1e-8, warm=None, fac=None, max_iter=5000):
    """``(z, subgradient, RelaxationResult)`` at ``ups``; ``z`` is the certified bound."""
    ups = _as_ups(inst, ups)
    rr = solve_relaxation(inst, bound, ups, tol=tol, max_iter=max_iter, warm=warm, fac=fac)
    obj = make_objective(inst, bound, ups, fac)
    return rr.valid_ub, obj.grad_logups(rr.x_star), rr


@dataclass
class BfgsStep:
    psi: np.ndarray
    z: float
    grad_norm: float


@dataclass
class BfgsResult:
    scaling: ScalingVector
    z: float
    trace: list = field(default_factory=list)
    status: str = ""
    relaxation: RelaxationResult = None

    def __iter__(self):
        yield self.scaling
        yield self.trace


def bfgs_optimize_scaling(inst, bound, ups0=None, max_steps=10, grad_tol=1e-6, tol=1e-8,
                          fac=None, c1=1e-4, c2=0.9, max_ls=30) -> BfgsResult:
    """Minimize ``z(psi)`` by BFGS with a weak-Wolfe bracketing line search.

    Returns the best point seen, so the result never has a larger bound
    than the starting point.  Curvature pairs with ``y^T s <= 1e-12`` are
    skipped.
    """
    ups0 = _as_ups(inst, ups0)
    psi = np.log(ups0)
    z, g, rr = evaluate_z(inst, bound, ups0, tol=tol, fac=fac)
    trace = [BfgsStep(psi.copy(), z, float(np.abs(g).max()))]
    best = (z, psi.copy(), rr)
    n = inst.n
    H = np.eye(n)
    status = "max steps"
    for step in range(max_steps):
        if np.abs(g).max() <= grad_tol:
            status = "gradient tolerance"
            break
        p = -H @ g
        slope = float(g @ p)
        if slope >= 0:
            H = np.eye(n)
            p = -g
            slope = float(g @ p)
        lo, hi, t = 0.0, np.inf, 1.0
        accepted = None
        for _ in range(max_ls):
            psi_t = psi + t * p
            try:
                z_t, g_t, rr_t = evaluate_z(inst, bound, np.exp(psi_t), tol=tol, warm=rr, fac=fac)
            except Exception as exc:  # inner failure: shrink the step
                log.debug("inner solve failed at t=%g: %s", t, exc)
                hi = t
                t = 0.5 * (lo + hi)
                continue
            if z_t < best[0]:
                best = (z_t, psi_t.copy(), rr_t)
            if z_t > z + c1 * t * slope:
                hi = t
            elif float(g_t @ p) < c2 * slope:
                lo = t
            else:
                accepted = (psi_t, z_t, g_t, rr_t)
                break
            t = 2.0 * lo if hi == np.inf else 0.5 * (lo + hi)
        if accepted is None:
            status = "line search failure"
            break
        psi_new, z_new, g_new, rr_new = accepted
        s_vec = psi_new - psi
        y = g_new - g
        sy = float(s_vec @ y)
        if sy > 1e-12:
            if step == 0:
                H = (sy / float(y @ y)) * np.eye(n)
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s_vec, y)
            H = V @ H @ V.T + rho * np.outer(s_vec, s_vec)
        psi, z, g, rr = psi_new, z_new, g_new, rr_new
        trace.append(BfgsStep(psi.copy(), z, float(np.abs(g).max())))
    else:
        if np.abs(g).max() <= grad_tol:
            status = "gradient tolerance"
    z_best, psi_best, rr_best = best
    return BfgsResult(ScalingVector.from_psi(psi_best), z_best, trace, status, rr_best)


@dataclass
class OScalingResult:
    gamma: float
    z: float
    derivative: float = 0.0
    iterations: int = 0
    note: str = ""
    relaxation: RelaxationResult = None

    def __iter__(self):
        yield self.gamma
        yield self.z


def newton_oscaling(inst, bound, gamma0=1.0, deriv_tol=1e-10, tol=1e-12, max_iter=100,
                    fac=None) -> OScalingResult:
    """Optimize the scalar in ``ups = gamma * e`` by Newton's method on ``log gamma``.

    ``dz/dgamma = e^T g / gamma`` with ``g`` the log-coordinate subgradient.  The
    second derivative in ``t = log gamma`` is taken as ``e^T H e`` with ``H`` the
    log-coordinate Hessian at the current relaxation solution.  Steps that
    leave the current sign-change bracket, or come with non-positive
    curvature, are replaced by bisection.

    DDFact is invariant under o-scaling, so for it ``gamma0`` comes back
    untouched with ``note="scale-invariant"``.
    """
    from .linx import linx_hess_logups

    if bound == "ddfact":
        z, _, rr = evaluate_z(inst, bound, np.full(inst.n, gamma0), tol=tol, fac=fac)
        return OScalingResult(gamma0, z, 0.0, 0, "scale-invariant", rr)
    if bound != "linx":
        raise ValueError(f"o-scaling by Newton is only available for linx, not {bound!r}")

    e = np.ones(inst.n)
    t = np.log(gamma0)
    lo, hi = -np.inf, np.inf
    rr = None
    z = np.nan
    dz_dt = np.nan
    for it in range(1, max_iter + 1):
        ups = np.exp(t) * e
        z, g, rr = evaluate_z(inst, bound, ups, tol=tol, warm=rr, fac=fac)
        dz_dt = float(g.sum())
        if abs(dz_dt) / np.exp(t) <= deriv_tol:
            return OScalingResult(float(np.exp(t)), z, dz_dt / np.exp(t), it, "derivative tolerance", rr)
        if dz_dt > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
        if np.isfinite(lo) and np.isfinite(hi) and hi - lo <= 1e-13 * max(1.0, abs(t)):
            return OScalingResult(float(np.exp(t)), z, dz_dt / np.exp(t), it, "bracket collapsed", rr)
        d2 = float(e @ linx_hess_logups(inst, rr.x_star, ups) @ e)
        t_new = t - dz_dt / d2 if d2 > 0 else None
        if t_new is None or not lo < t_new < hi:
            if np.isfinite(lo) and np.isfinite(hi):
                t_new = 0.5 * (lo + hi)
            else:
                t_new = t - np.sign(dz_dt) * 1.0
        t = t_new
    raise ScalingError(f"Newton o-scaling did not converge: |dz/dgamma| = {abs(dz_dt) / np.exp(t):.3g}")
