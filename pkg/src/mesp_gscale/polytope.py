"""The relaxed feasible region ``{e^T x = s, 0 <= x <= e, A x <= b}``."""
from __future__ import annotations

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


class InfeasiblePolytope(ValueError):
    pass


class Polytope:
    def __init__(self, n, s, A=None, b=None):
        self.n = int(n)
        self.s = int(s)
        self.A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
        self.b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()

    @classmethod
    def of(cls, inst):
        return cls(inst.n, inst.s, inst.A, inst.b)

    @property
    def m(self):
        return self.A.shape[0]

    def _linprog(self, c):
        # dual simplex gives a vertex; the default HiGHS driver is a fallback
        # for the occasional "unknown model status" return
        res = None
        for method in ("highs-ds", "highs"):
            res = linprog(
                c,
                A_ub=self.A if self.m else None,
                b_ub=self.b if self.m else None,
                A_eq=np.ones((1, self.n)),
                b_eq=[self.s],
                bounds=(0, 1),
                method=method,
            )
            if res.status == 2:
                raise InfeasiblePolytope("feasible polytope is empty")
            if res.status == 0:
                return res
        raise RuntimeError(f"LP oracle failed: {res.message}")

    def lmo(self, g) -> np.ndarray:
        """A vertex maximizing ``g^T v`` over the polytope.

        Without side constraints this is the indicator of the ``s`` largest
        entries of ``g`` (ties broken towards the lower index); otherwise a
        basic optimal solution from the dual simplex method.
        """
        g = np.asarray(g, dtype=float)
        if self.m == 0:
            v = np.zeros(self.n)
            v[np.argsort(-g, kind="stable")[: self.s]] = 1.0
            return v
        x = self._linprog(-g).x
        # snap simplex round-off onto the bounds
        x = np.where(np.abs(x) < 1e-11, 0.0, x)
        x = np.where(np.abs(x - 1) < 1e-11, 1.0, x)
        return x

    def is_nonempty(self) -> bool:
        if self.m == 0:
            return 0 < self.s <= self.n
        try:
            self._linprog(np.zeros(self.n))
        except InfeasiblePolytope:
            return False
        return True

    def integer_point(self, weights=None, fixed=None):
        """A 0/1 point of the polytope maximizing ``weights^T x``, or ``None``.

        ``fixed`` maps indices to forced 0/1 values.
        """
        w = np.zeros(self.n) if weights is None else np.asarray(weights, dtype=float)
        lo, hi = np.zeros(self.n), np.ones(self.n)
        for j, v in (fixed or {}).items():
            lo[j] = hi[j] = v
        cons = [LinearConstraint(np.ones((1, self.n)), self.s, self.s)]
        if self.m:
            cons.append(LinearConstraint(self.A, -np.inf, self.b))
        res = milp(-w, constraints=cons, integrality=np.ones(self.n), bounds=Bounds(lo, hi))
        if res.status != 0 or res.x is None:
            return None
        return np.round(res.x)

    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            abs(x.sum() - self.s) <= tol * max(1, self.s)
            and np.all(x >= -tol)
            and np.all(x <= 1 + tol)
            and (self.m == 0 or np.all(self.A @ x <= self.b + tol))
        )


def lmo(g, s, A=None, b=None) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return Polytope(g.shape[0], s, A, b).lmo(g)
