"""Frank-Wolfe with away steps for the linx and DDFact relaxations.

Both objectives are concave in ``x`` over the polytope
``{e^T x = s, 0 <= x <= e, A x <= b}``, so every iterate yields a certified
upper bound ``f(x) + max_v g^T (v - x)`` (the Frank-Wolfe gap).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .ddfact import DdfactObjective
from .gamma import OutsideDomain
from .linx import LinxObjective
from .polytope import InfeasiblePolytope, Polytope, lmo  # noqa: F401  (re-export)

log = logging.getLogger(__name__)

BOUNDS = ("linx", "ddfact")


class RelaxationError(RuntimeError):
    pass


@dataclass
class DualCertificate:
    """KKT multipliers for ``x >= 0`` (upsilon), ``x <= e`` (nu), ``e^T x = s`` (tau), ``A x <= b`` (pi)."""

    upsilon: np.ndarray
    nu: np.ndarray
    tau: float
    pi: np.ndarray
    stationarity: float = 0.0
    complementarity: float = 0.0
    ub: float = np.inf
    usable: bool = True


@dataclass
class RelaxationResult:
    x_star: np.ndarray
    value: float
    valid_ub: float
    fw_gap: float
    grad: np.ndarray
    iterations: int
    bound: str
    ups: np.ndarray
    converged: bool
    duals: DualCertificate = None
    vertices: np.ndarray = field(default=None, repr=False)
    weights: np.ndarray = field(default=None, repr=False)


def make_objective(inst, bound, ups=None, fac=None):
    if bound == "linx":
        return LinxObjective(inst, ups)
    if bound == "ddfact":
        return DdfactObjective(inst, ups, fac)
    raise ValueError(f"unknown bound {bound!r}; expected one of {BOUNDS}")


def _key(v):
    return tuple(np.round(v, 10))


def _start(obj, P, inst, rng):
    """A vertex (or short vertex mixture) inside the objective's domain."""
    tried = []
    scores = [np.diag(inst.C).copy()] + [rng.standard_normal(inst.n) for _ in range(2 * inst.n)]
    for sc in scores:
        v = P.lmo(sc)
        tried.append(v)
        if np.isfinite(obj.value(v)):
            return [v], [1.0]
    uniq = {_key(v): v for v in tried}
    V = list(uniq.values())
    x = np.mean(V, axis=0)
    if np.isfinite(obj.value(x)):
        return V, [1.0 / len(V)] * len(V)
    raise RelaxationError("could not find a feasible starting point inside the objective domain")


def solve_relaxation(inst, bound="linx", ups=None, tol=1e-8, max_iter=5000, warm=None,
                     fac=None, seed=0, steps="pairwise") -> RelaxationResult:
    """Maximize the linx or DDFact objective by Frank-Wolfe with an active set.

    ``steps`` selects pairwise steps (weight moves from the worst active
    vertex to the oracle vertex; the default) or classical away steps.

    ``warm`` may be a previous :class:`RelaxationResult` on the same polytope;
    its active set is reused when it lies in the new objective's domain.

    ``valid_ub`` is the smallest ``f(x_k) + gap_k`` seen over the run, each
    of which bounds the relaxation optimum by concavity.
    """
    P = Polytope.of(inst)
    if not P.is_nonempty():
        raise InfeasiblePolytope("relaxation is infeasible")
    obj = make_objective(inst, bound, ups, fac)
    rng = np.random.default_rng(seed)

    V, W = None, None
    if warm is not None and warm.vertices is not None:
        xw = warm.weights @ warm.vertices
        if np.isfinite(obj.value(xw)):
            V, W = list(warm.vertices), list(warm.weights)
    if V is None:
        V, W = _start(obj, P, inst, rng)
    index = {_key(v): i for i, v in enumerate(V)}
    W = np.array(W, dtype=float)
    x = W @ np.array(V)

    best_ub = np.inf
    it = 0
    val, g = obj.value_grad(x)
    gap = np.inf
    # With side constraints each LMO call is an LP.  Vertices found so far
    # are cached and reused while they still offer at least half of the
    # last certified gap; only true LMO calls update the bound or stop.
    lazy = P.m > 0
    cache = {_key(v): v for v in V}
    phi = np.inf
    certified = True
    while True:
        v_fw = None
        if lazy and np.isfinite(phi) and it < max_iter:
            Vc = np.array(list(cache.values()))
            sc = Vc @ g
            j = int(np.argmax(sc))
            if sc[j] - g @ x >= 0.5 * phi:
                v_fw = Vc[j]
        if v_fw is None:
            v_fw = P.lmo(g)
            gap = max(float(g @ (v_fw - x)), 0.0)
            best_ub = min(best_ub, val + gap)
            phi = gap
            if lazy:
                cache.setdefault(_key(v_fw), v_fw)
            if gap <= tol or it >= max_iter:
                break
            certified = True
        else:
            gap = float(g @ (v_fw - x))
            certified = False
        it += 1
        Vm = np.array(V)
        active = np.flatnonzero(W > 0)
        a = active[np.argmin(Vm[active] @ g)]
        gap_away = float(g @ (x - Vm[a]))
        if steps == "pairwise" and len(active) > 1 and _key(Vm[a]) != _key(v_fw):
            d = v_fw - Vm[a]
            tmax = W[a]
            kind = "pair"
        elif steps == "away" and gap < gap_away and len(active) > 1:
            d = x - Vm[a]
            tmax = W[a] / (1.0 - W[a])
            kind = "away"
        else:
            d = v_fw - x
            tmax = 1.0
            kind = "fw"
        try:
            t = obj.line_search(x, d, tmax)
        except OutsideDomain:
            t = 0.0
        if t <= 0.0 and kind != "fw":
            # no progress along the chosen direction; fall back to a FW step
            d = v_fw - x
            kind = "fw"
            try:
                t = obj.line_search(x, d, 1.0)
            except OutsideDomain:
                t = 0.0
        if t <= 0.0 and not certified:
            phi = np.inf  # ask the true oracle next time
            continue
        if t <= 0.0:
            log.debug("line search stalled at iteration %d (gap %.3g)", it, gap)
            break
        if kind == "away":
            W *= 1.0 + t
            W[a] -= t
            if t >= tmax * (1 - 1e-12):
                W[a] = 0.0
        else:
            if kind == "pair":
                W[a] = 0.0 if t >= tmax * (1 - 1e-12) else W[a] - t
            else:
                W *= 1.0 - t
            k = _key(v_fw)
            if k in index:
                W[index[k]] += t
            else:
                index[k] = len(V)
                V.append(v_fw)
                W = np.append(W, t)
        # drop vertices with vanishing weight
        keep = W > 1e-14
        if not np.all(keep):
            V = [v for v, kp in zip(V, keep) if kp]
            W = W[keep]
            index = {_key(v): i for i, v in enumerate(V)}
        W /= W.sum()
        x_new = W @ np.array(V)
        try:
            val_new, g_new = obj.value_grad(x_new)
        except OutsideDomain:
            log.debug("step left the domain at iteration %d", it)
            break
        x, val, g = x_new, val_new, g_new

    if not certified:
        gap = max(float(g @ (P.lmo(g) - x)), 0.0)
        best_ub = min(best_ub, val + gap)

    return RelaxationResult(
        x_star=x,
        value=val,
        valid_ub=best_ub,
        fw_gap=gap,
        grad=g,
        iterations=it,
        bound=bound,
        ups=obj.ups.copy(),
        converged=gap <= tol,
        vertices=np.array(V),
        weights=W,
    )


def recover_duals(inst, bound=None, ups=None, rr: RelaxationResult = None) -> DualCertificate:
    """KKT multipliers at ``rr.x_star`` for gradient ``g = rr.grad``.

    Without side constraints the multipliers come in closed form from
    sorting ``g``.  With side constraints they solve the LP dual of
    ``max g^T v`` over the polytope: stationarity holds exactly and the
    total complementarity violation equals the Frank-Wolfe gap.

    ``ub`` is a bound valid for every integer feasible point:
    ``f(x) + upsilon^T x + nu^T (e - x) + pi^T (b - A x) + 2 s ||residual||_inf``
    (plus ``|tau| |s - e^T x|`` for round-off in the cardinality).
    """
    x, g = rr.x_star, rr.grad
    n, s = inst.n, inst.s
    if inst.m == 0:
        order = np.argsort(-g, kind="stable")
        tau = float(g[order[s - 1]])
        nu = np.zeros(n)
        nu[order[:s]] = g[order[:s]] - tau
        upsilon = nu + tau - g
        pi = np.zeros(0)
    else:
        m = inst.m
        A, b = inst.A, inst.b
        slack = b - A @ x
        # variables [upsilon, nu, pi, tau]
        c = np.concatenate([x, 1.0 - x, slack, [0.0]])
        A_eq = np.hstack([np.eye(n), -np.eye(n), -A.T, -np.ones((n, 1))])
        bounds = [(0, None)] * (2 * n + m) + [(None, None)]
        res = linprog(c, A_eq=A_eq, b_eq=-g, bounds=bounds, method="highs")
        if res.status != 0:
            return DualCertificate(np.zeros(n), np.zeros(n), 0.0, np.zeros(m), np.inf, np.inf, np.inf, False)
        z = res.x
        upsilon, nu, pi, tau = z[:n], z[n:2 * n], z[2 * n:2 * n + m], float(z[-1])
    upsilon = np.maximum(upsilon, 0.0)
    nu = np.maximum(nu, 0.0)
    pi = np.maximum(pi, 0.0)
    # push LP round-off into the box multipliers so stationarity is exact
    resid = g + upsilon - nu - inst.A.T @ pi - tau
    nu = nu + np.maximum(resid, 0.0)
    upsilon = upsilon + np.maximum(-resid, 0.0)
    resid = g + upsilon - nu - inst.A.T @ pi - tau
    stat = float(np.abs(resid).max(initial=0.0))
    comp = float(upsilon @ x + nu @ (1.0 - x) + pi @ (inst.b - inst.A @ x))
    ub = rr.value + comp + 2.0 * s * stat + abs(tau) * abs(s - x.sum())
    return DualCertificate(upsilon, nu, tau, pi, stat, comp, ub, True)
