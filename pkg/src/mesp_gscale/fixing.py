"""Fixing 0/1 variables from dual information, and the round-based fixing loop.

For a concave bound function ``f`` with multipliers ``(upsilon, nu, tau, pi)``
at the relaxation point, every feasible 0/1 vector ``y`` satisfies

    ldet C[S(y), S(y)] <= UB - upsilon^T y - nu^T (e - y),

where ``UB`` is the certificate's bound.  Any solution with ``y_j = 1`` is
thus worth at most ``UB - upsilon_j``; if that is below the incumbent value
``LB`` the variable can be fixed to 0.  Symmetrically ``nu_j`` fixes to 1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .heuristics import IncumbentSolution, heuristic_lb
from .instance import Instance, InstanceError, complement_instance
from .relax import recover_duals, solve_relaxation
from .scaling import ScalingError, bfgs_optimize_scaling, newton_oscaling

log = logging.getLogger(__name__)

FIXING_BOUNDS = ("linx", "ddfact", "ddfact-comp")


class FixingError(ValueError):
    pass


def fix_from_duals(UB, LB, duals, tol=1e-8):
    """Index sets ``(zero, one)`` proven by the multipliers.

    ``j`` goes to ``zero`` when ``UB - upsilon_j < LB - tol`` and to ``one``
    when ``UB - nu_j < LB - tol``.  The margin is taken on the safe side, so
    the incumbent itself never contradicts a fixing.
    """
    if UB < LB - tol:
        raise FixingError(f"upper bound {UB:.12g} is below the lower bound {LB:.12g}")
    if not duals.usable:
        return set(), set()
    zero = {int(j) for j in np.flatnonzero(UB - duals.upsilon < LB - tol)}
    one = {int(j) for j in np.flatnonzero(UB - duals.nu < LB - tol)}
    if zero & one:
        # both would mean no solution beats LB at all; keep neither
        both = zero & one
        zero -= both
        one -= both
    return zero, one


@dataclass
class FixCertificate:
    index: int
    value: int
    bound: str
    ub: float
    multiplier: float
    lb: float
    round: int


@dataclass
class FixingReport:
    fixed_to_zero: set = field(default_factory=set)
    fixed_to_one: set = field(default_factory=set)
    certificates: dict = field(default_factory=dict)
    rounds: int = 0
    lb: float = -np.inf
    incumbent: IncumbentSolution = None
    mode: str = "g"
    per_round: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def n_fixed(self) -> int:
        return len(self.fixed_to_zero) + len(self.fixed_to_one)

    def fixed_value(self, j):
        if j in self.fixed_to_one:
            return 1
        if j in self.fixed_to_zero:
            return 0
        return None


def restrict(inst, ones, zeros):
    """The problem left after fixing: ``(instance or None, shift, free indices, s_left)``.

    Fixing ``x_j = 1`` conditions ``C`` on ``j`` (Schur complement) and adds
    ``ldet C[F,F]`` to the objective; fixing to 0 deletes the row and column.
    The instance is ``None`` when the remaining cardinality leaves no choice.
    """
    n = inst.n
    F = sorted(ones)
    T = [j for j in range(n) if j not in ones and j not in zeros]
    s_left = inst.s - len(F)
    C = inst.C
    shift = 0.0
    CTT = C[np.ix_(T, T)]
    if F:
        CFF = C[np.ix_(F, F)]
        shift = spectral.ldet_pd(CFF)
        CFT = C[np.ix_(F, T)]
        CTT = CTT - CFT.T @ spectral.solve_pd(CFF, CFT)
        CTT = 0.5 * (CTT + CTT.T)
    if s_left <= 0 or s_left >= len(T):
        return None, shift, T, s_left
    A = inst.A[:, T]
    b = inst.b - inst.A[:, F].sum(axis=1) if F else inst.b
    return Instance(CTT, s_left, A, b), shift, T, s_left


def scaling_for(inst, bound, mode, max_bfgs=10, opttol=1e-10, fw_tol=1e-8, notes=None):
    """Scaling vector for ``bound`` under mode ``none``, ``o`` or ``g``.

    o-mode uses the Newton scalar for linx and ``e`` for DDFact (which is
    invariant under o-scaling); g-mode runs up to ``max_bfgs`` BFGS steps
    from that point.
    """
    n = inst.n
    ups = np.ones(n)
    if mode == "none":
        return ups
    if bound == "linx":
        try:
            ups = np.full(n, newton_oscaling(inst, "linx", 1.0, deriv_tol=opttol).gamma)
        except ScalingError as exc:
            if notes is not None:
                notes.append(f"linx o-scaling: {exc}")
    if mode == "g" and max_bfgs > 0:
        ups = bfgs_optimize_scaling(inst, bound, ups, max_steps=max_bfgs, tol=fw_tol).scaling.ups
    return ups


def _bound_problem(red, bound):
    if bound == "ddfact-comp":
        comp, ldc = complement_instance(red)
        return comp, "ddfact", ldc
    return red, bound, 0.0


def iterate_fixing(inst, ups_mode="g", max_bfgs=10, rounds_cap=None, tol=1e-8, fw_tol=1e-8,
                   opttol=1e-10, incumbent: IncumbentSolution = None, bounds=FIXING_BOUNDS) -> FixingReport:
    """Rounds of: scale, solve each bound, recover duals, fix, shrink.

    Stops when a round fixes nothing new, nothing is left free, or after
    ``rounds_cap`` rounds (default ``n``).  If some bound closes the gap
    (``UB - LB <= tol``) every free variable is fixed to its incumbent value.
    Failures of individual bounds are recorded in ``notes``.
    """
    if ups_mode not in ("none", "o", "g"):
        raise ValueError(f"unknown scaling mode {ups_mode!r}")
    n = inst.n
    inc = heuristic_lb(inst) if incumbent is None else incumbent
    if not inc.feasible:
        raise FixingError("fixing needs a feasible incumbent")
    LB = inc.value
    rep = FixingReport(lb=LB, incumbent=inc, mode=ups_mode)
    cap = n if rounds_cap is None else min(int(rounds_cap), n)
    ones, zeros = set(), set()

    def record(j, v, bound, ub, mult, rnd):
        if (v == 1 and j in zeros) or (v == 0 and j in ones):
            raise FixingError(f"contradictory fixings for index {j}")
        if j in ones or j in zeros:
            return False
        (ones if v == 1 else zeros).add(j)
        rep.certificates[j] = FixCertificate(j, v, bound, ub, mult, LB, rnd)
        return True

    for rnd in range(1, cap + 1):
        rep.rounds = rnd
        try:
            red, shift, T, s_left = restrict(inst, ones, zeros)
        except (InstanceError, spectral.NotPositiveDefinite) as exc:
            rep.notes.append(f"round {rnd}: restriction failed: {exc}")
            break
        if not T:
            rep.rounds = rnd - 1
            break
        if red is None:
            for j in T:
                record(j, 1 if s_left > 0 else 0, "cardinality", np.nan, np.nan, rnd)
            rep.per_round.append(len(T))
            break
        LBr = LB - shift
        new = 0
        closed = False
        for bound in bounds:
            try:
                prob, base, offset = _bound_problem(red, bound)
            except InstanceError as exc:
                rep.notes.append(f"round {rnd}: {bound} skipped: {exc}")
                continue
            try:
                ups = scaling_for(prob, base, ups_mode, max_bfgs, opttol, fw_tol, rep.notes)
                rr = solve_relaxation(prob, base, ups, tol=fw_tol)
                duals = recover_duals(prob, base, ups, rr)
            except Exception as exc:  # one bound failing must not stop the loop
                rep.notes.append(f"round {rnd}: {bound} failed: {exc}")
                log.debug("bound %s failed", bound, exc_info=True)
                continue
            ub_valid = min(rr.valid_ub, duals.ub) + offset
            if ub_valid - LBr <= tol:
                for j in T:
                    new += record(j, int(inc.x[j]), bound, ub_valid + shift, 0.0, rnd)
                closed = True
                break
            if not duals.usable:
                rep.notes.append(f"round {rnd}: {bound} gave no usable multipliers")
                continue
            zero, one = fix_from_duals(duals.ub, LBr - offset, duals, tol)
            comp = bound == "ddfact-comp"
            for k in zero:
                new += record(T[k], 1 if comp else 0, bound, duals.ub + offset + shift, float(duals.upsilon[k]), rnd)
            for k in one:
                new += record(T[k], 0 if comp else 1, bound, duals.ub + offset + shift, float(duals.nu[k]), rnd)
        rep.per_round.append(new)
        if closed or new == 0:
            break
    rep.fixed_to_zero, rep.fixed_to_one = zeros, ones
    return rep
