"""Feasible integer solutions: greedy construction and 1-swap local search."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .polytope import Polytope


class NoFeasibleSolution(RuntimeError):
    pass


def subset_ldet(C, S) -> float:
    """``ldet C[S,S]``; ``-inf`` when the submatrix is singular."""
    S = list(S)
    if not S:
        return 0.0
    sign, ld = np.linalg.slogdet(C[np.ix_(S, S)])
    return float(ld) if sign > 0 else -np.inf


def indicator(n, S) -> np.ndarray:
    x = np.zeros(n)
    x[list(S)] = 1.0
    return x


@dataclass(frozen=True)
class IncumbentSolution:
    x: np.ndarray
    value: float
    feasible: bool

    @property
    def support(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.x))

    @property
    def lb(self) -> float:
        """The lower bound this solution certifies (``-inf`` if infeasible)."""
        return self.value if self.feasible else -np.inf

    @classmethod
    def of(cls, inst, S):
        x = indicator(inst.n, S)
        return cls(x, subset_ldet(inst.C, S), inst.is_feasible(x))


def _pivot_scores(R, cand, scale):
    # log residual variance; dependent columns score by the pseudo-determinant
    # convention, i.e. they contribute nothing rather than -inf
    d = np.diag(R)[cand]
    return np.where(d > scale, np.log(np.maximum(d, scale)), -np.inf)


def greedy_construct(inst) -> IncumbentSolution:
    """Add, one index at a time, the index with the largest log-det gain.

    The gain of adding ``i`` to ``S`` is the log of the residual variance
    ``C_ii - C_iS C_SS^-1 C_Si``, tracked by rank-one downdates.  With
    side constraints, an index is only added if some point of the relaxed
    polytope still has ``x_S = 1``; a final repair swaps towards
    feasibility and, failing that, asks a MILP for the feasible 0/1 point
    sharing the most indices with the greedy set.
    """
    n, s, C = inst.n, inst.s, inst.C
    P = Polytope.of(inst)
    if not P.is_nonempty():
        raise NoFeasibleSolution("relaxed polytope is empty")
    scale = n * np.finfo(float).eps * max(float(np.max(np.diag(C))), 1.0)
    R = np.array(C, dtype=float)
    S: list[int] = []
    for _ in range(s):
        cand = np.array([i for i in range(n) if i not in S])
        sc = _pivot_scores(R, cand, scale)
        # dependent candidates ranked after independent ones, by diagonal
        order = sorted(range(len(cand)), key=lambda k: (-sc[k], -C[cand[k], cand[k]], cand[k]))
        chosen = None
        for k in order:
            i = int(cand[k])
            if inst.m == 0 or _still_feasible(P, S + [i]):
                chosen = i
                break
        if chosen is None:
            chosen = int(cand[order[0]])
        S.append(chosen)
        piv = R[chosen, chosen]
        if piv > scale:
            r = R[:, chosen].copy()
            R -= np.outer(r, r) / piv
    inc = IncumbentSolution.of(inst, sorted(S))
    if not inc.feasible:
        inc = _repair(inst, P, inc)
    return inc


def _still_feasible(P, S):
    lo = np.zeros(P.n)
    lo[S] = 1.0
    res = linprog(np.zeros(P.n), A_ub=P.A, b_ub=P.b, A_eq=np.ones((1, P.n)), b_eq=[P.s],
                  bounds=list(zip(lo, np.ones(P.n))), method="highs")
    return res.status == 0


def _violation(inst, x):
    return float(np.maximum(inst.A @ x - inst.b, 0.0).sum())


def _repair(inst, P, inc, budget=None):
    n = inst.n
    budget = 4 * n if budget is None else budget
    S = set(inc.support)
    viol = _violation(inst, inc.x)
    for _ in range(budget):
        best = None
        for i in sorted(S):
            for j in range(n):
                if j in S:
                    continue
                T = (S - {i}) | {j}
                x = indicator(n, T)
                v = _violation(inst, x)
                if v < viol - 1e-12:
                    key = (v, -subset_ldet(inst.C, T))
                    if best is None or key < best[0]:
                        best = (key, T)
        if best is None:
            break
        S = best[1]
        viol = best[0][0]
        if viol <= 0:
            return IncumbentSolution.of(inst, sorted(S))
    x = P.integer_point(weights=indicator(n, inc.support) + 1e-3 * np.log(np.maximum(np.diag(inst.C), 1e-300)) / n)
    if x is None:
        raise NoFeasibleSolution("no 0/1 point satisfies the side constraints")
    return IncumbentSolution.of(inst, np.flatnonzero(x))


def local_search(inst, inc: IncumbentSolution, min_gain=1e-10) -> IncumbentSolution:
    """Best-improvement 1-swap search; stops when no feasible swap gains more than ``min_gain``."""
    if not inc.feasible:
        raise ValueError("local search needs a feasible starting solution")
    n = inst.n
    S = set(inc.support)
    val = inc.value
    while True:
        best = None
        for i in sorted(S):
            for j in range(n):
                if j in S:
                    continue
                T = (S - {i}) | {j}
                if inst.m and not inst.is_feasible(indicator(n, T)):
                    continue
                v = subset_ldet(inst.C, T)
                if v > val + min_gain and (best is None or v > best[0]):
                    best = (v, T)
        if best is None:
            break
        val, S = best
    if S == set(inc.support):
        return inc
    return IncumbentSolution.of(inst, sorted(S))


def heuristic_lb(inst) -> IncumbentSolution:
    return local_search(inst, greedy_construct(inst))
