"""Exact solution by enumerating every s-subset (small n only)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_N = 24


class OracleError(ValueError):
    pass


@dataclass
class OracleResult:
    opt_value: float
    opt_sets: list = field(default_factory=list)
    feasible_count: int = 0


def enumerate_subsets(inst, feasible_only=True, tol=1e-9):
    """Yield ``(S, ldet C[S,S])`` for s-subsets in lexicographic order.

    Determinants come from a Cholesky factor grown one index at a time
    along the enumeration tree, so each subset costs one triangular solve.
    Singular subsets get ``-inf``.
    """
    n, s, C = inst.n, inst.s, inst.C
    if n > MAX_N:
        raise OracleError(f"enumeration is capped at n={MAX_N} (got n={n})")
    A, b = inst.A, inst.b
    piv_tol = n * np.finfo(float).eps * max(float(np.max(np.abs(np.diag(C)))), 1.0)
    L = np.zeros((s, s))
    idx = [0] * s

    def rec(depth, start, ld, singular):
        for j in range(start, n - (s - depth) + 1):
            idx[depth] = j
            if singular:
                ldj, sing = -np.inf, True
            else:
                prev = idx[:depth]
                if depth:
                    l = _forward(L[:depth, :depth], C[prev, j])
                    piv = C[j, j] - l @ l
                else:
                    l, piv = np.zeros(0), C[j, j]
                if piv > piv_tol:
                    L[depth, :depth] = l
                    L[depth, depth] = np.sqrt(piv)
                    ldj, sing = ld + np.log(piv), False
                else:
                    ldj, sing = -np.inf, True
            if depth + 1 == s:
                S = tuple(idx)
                if feasible_only and A.shape[0]:
                    if np.any(A[:, S].sum(axis=1) > b + tol):
                        continue
                yield S, float(ldj)
            else:
                yield from rec(depth + 1, j + 1, ldj, sing)

    yield from rec(0, 0, 0.0, False)


def _forward(L, v):
    # L lower triangular, small: a plain loop beats a scipy call here
    k = L.shape[0]
    y = np.empty(k)
    for i in range(k):
        y[i] = (v[i] - L[i, :i] @ y[:i]) / L[i, i]
    return y


def brute_force_opt(inst, tie_tol=1e-10) -> OracleResult:
    best = -np.inf
    sets = []
    count = 0
    for S, v in enumerate_subsets(inst):
        count += 1
        if v > best + tie_tol:
            best = v
            sets = [S]
        elif v >= best - tie_tol and np.isfinite(v):
            sets.append(S)
    if count == 0:
        raise OracleError("no s-subset satisfies the side constraints")
    if not np.isfinite(best):
        raise OracleError("every feasible s-subset has a singular submatrix")
    # drop sets admitted before the final best was found
    sets = [S for S in sets if _value(inst, S) >= best - tie_tol]
    return OracleResult(best, sets, count)


def _value(inst, S):
    sign, ld = np.linalg.slogdet(inst.C[np.ix_(S, S)])
    return ld if sign > 0 else -np.inf
