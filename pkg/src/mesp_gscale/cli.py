"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 computation failure.  Errors are
written to stderr as a one-line JSON object ``{"error": ..., "message": ...}``.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bqp import BqpPoint, bqp_lift_integer, bqp_value
from .fixing import iterate_fixing
from .heuristics import NoFeasibleSolution, heuristic_lb, subset_ldet
from .instance import (Instance, InstanceError, complement_instance, gen_constraints, load_instance,
                       random_covariance, save_instance)
from .oracle import OracleError, brute_force_opt
from .polytope import InfeasiblePolytope
from .relax import RelaxationError, solve_relaxation
from .report import GapRow, ReportError, attach_ratios, fmt, from_csv, summarize, to_csv
from .scaling import ScalingError, bfgs_optimize_scaling, newton_oscaling

METHODS = ("linx", "ddfact", "ddfact-comp", "bqp-eval")
SCALINGS = ("none", "o", "g")


class UsageError(Exception):
    pass


class ComputationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def compute_bound(inst, method, scaling="none", gamma0=1.0, max_bfgs=10, tol=1e-8, opttol=1e-10, x=None):
    """``(ub, iterations)`` for one method and scaling mode.

    ``ddfact-comp`` bounds the complementary problem and adds ``ldet C``.
    ``bqp-eval`` evaluates the BQP objective at the integer lift of ``x``
    (its scaling is ``gamma0 * e``; g-scaling needs a BQP solver).
    """
    if method == "bqp-eval":
        if x is None:
            raise UsageError("bqp-eval needs --x")
        if scaling == "g":
            raise UsageError("bqp-eval supports --scaling none or o only")
        pt = bqp_lift_integer(x)
        ups = np.full(inst.n, gamma0 if scaling == "o" else 1.0)
        val = bqp_value(inst, BqpPoint(pt.x, pt.X, pt.s), ups)
        if val is None:
            raise ComputationError("lifted point is outside the BQP domain")
        return val, 0
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}")
    offset = 0.0
    bound = method
    prob = inst
    if method == "ddfact-comp":
        prob, offset = complement_instance(inst)
        bound = "ddfact"
    n = prob.n
    ups = np.ones(n)
    if scaling in ("o", "g"):
        if bound == "linx":
            ups = np.full(n, newton_oscaling(prob, "linx", gamma0, deriv_tol=opttol).gamma)
        else:
            ups = np.full(n, gamma0)
        if scaling == "g" and max_bfgs > 0:
            ups = bfgs_optimize_scaling(prob, bound, ups, max_steps=max_bfgs, tol=tol).scaling.ups
    elif scaling != "none":
        raise UsageError(f"unknown scaling {scaling!r}")
    rr = solve_relaxation(prob, bound, ups, tol=tol)
    return rr.valid_ub + offset, rr.iterations


def _parse_s_values(text, inst):
    if text is None:
        return [inst.s]
    vals = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            vals.extend(range(int(lo), int(hi) + 1))
        else:
            vals.append(int(part))
    bad = [v for v in vals if not 0 < v < inst.n]
    if bad:
        raise UsageError(f"s values out of range 1..{inst.n - 1}: {bad}")
    return vals


def _parse_x(text):
    if text is None:
        return None
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"--x must be comma-separated 0/1 values, got {text!r}") from None


def _instance(args):
    if not args.instance:
        raise UsageError("--instance is required")
    try:
        return load_instance(args.instance)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read instance: {exc}") from None


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _rows_for(inst, s_values, methods, scalings, args):
    rows = []
    for s in s_values:
        sub = inst.with_s(s)
        x = _parse_x(getattr(args, "x", None))
        if methods == ["bqp-eval"]:
            # the lift is evaluated, not optimized: compare with its own ldet
            lb = subset_ldet(sub.C, np.flatnonzero(x))
        else:
            lb = heuristic_lb(sub).lb
        for method in methods:
            for sc in scalings:
                t0 = time.perf_counter()
                ub, iters = compute_bound(sub, method, sc, args.gamma0, args.max_bfgs, args.tol, args.opttol, x)
                secs = time.perf_counter() - t0 if args.timing else None
                rows.append(GapRow(s, method, sc, ub, lb, None, iters, secs))
    return rows


def cmd_bound(args):
    inst = _instance(args)
    if args.method == "bqp-eval":
        x = _parse_x(args.x)
        if x is None or x.shape != (inst.n,):
            raise UsageError(f"--x must have {inst.n} entries")
        s_values = [int(x.sum())]
        inst = inst.with_s(s_values[0])
    else:
        s_values = _parse_s_values(args.s, inst)
    rows = _rows_for(inst, s_values, [args.method], [args.scaling], args)
    _emit(args, to_csv(rows))


def cmd_report(args):
    if args.from_csv:
        with open(args.from_csv) as fh:
            rows = from_csv(fh.read())
    else:
        inst = _instance(args)
        methods = args.bounds.split(",")
        for mth in methods:
            if mth not in ("linx", "ddfact", "ddfact-comp"):
                raise UsageError(f"report supports linx, ddfact, ddfact-comp; got {mth!r}")
        rows = _rows_for(inst, _parse_s_values(args.s, inst), methods, ["o", "g"], args)
    undefined = attach_ratios(rows)
    _emit(args, to_csv(rows))
    print(summarize(rows), file=sys.stderr)
    for s, b in undefined:
        print(f"ratio omitted for s={s}, {b}: o-scaling gap is zero", file=sys.stderr)


def cmd_scale_opt(args):
    inst = _instance(args)
    if args.method not in ("linx", "ddfact"):
        raise UsageError("scale-opt supports --method linx or ddfact")
    o = newton_oscaling(inst, args.method, args.gamma0, deriv_tol=args.opttol)
    res = bfgs_optimize_scaling(inst, args.method, np.full(inst.n, o.gamma), max_steps=args.max_bfgs,
                                tol=args.tol)
    _emit(args, _json({
        "method": args.method,
        "gamma": o.gamma,
        "o_note": o.note,
        "z_o": o.z,
        "z_g": res.z,
        "status": res.status,
        "ups": [float(fmt(u)) for u in res.scaling.ups],
        "trace": [{"step": k, "z": float(fmt(st.z)), "grad_inf": float(fmt(st.grad_norm))}
                  for k, st in enumerate(res.trace)],
    }))


def cmd_fix(args):
    inst = _instance(args)
    modes = ["o", "g"] if args.mode == "both" else [args.mode]
    out = {}
    for mode in modes:
        rep = iterate_fixing(inst, mode, max_bfgs=args.max_bfgs, tol=args.tol, opttol=args.opttol)
        out[mode] = {
            "fixed_to_zero": sorted(rep.fixed_to_zero),
            "fixed_to_one": sorted(rep.fixed_to_one),
            "n_fixed": rep.n_fixed,
            "rounds": rep.rounds,
            "per_round": rep.per_round,
            "lb": rep.lb,
            "certificates": {str(j): {"value": c.value, "bound": c.bound, "ub": None if np.isnan(c.ub) else c.ub,
                                      "round": c.round}
                             for j, c in sorted(rep.certificates.items())},
            "notes": rep.notes,
        }
    _emit(args, _json(out))


def cmd_heuristic(args):
    inst = _instance(args)
    inc = heuristic_lb(inst)
    _emit(args, _json({"support": list(inc.support), "value": inc.value, "feasible": inc.feasible}))


def cmd_brute(args):
    inst = _instance(args)
    res = brute_force_opt(inst)
    _emit(args, _json({"opt_value": res.opt_value, "opt_sets": [list(S) for S in res.opt_sets],
                       "feasible_count": res.feasible_count}))


def cmd_gen(args):
    if args.n is None or args.s_gen is None:
        raise UsageError("gen needs --n and --s")
    C = random_covariance(args.n, args.seed, rank=args.rank)
    inst = Instance(C, args.s_gen)
    if args.m:
        inst = gen_constraints(inst, args.m, args.seed, heuristic_lb(inst).x)
    text = _json(inst.to_dict())
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-8, help="Frank-Wolfe gap tolerance")
    common.add_argument("--opttol", type=float, default=1e-10, help="o-scaling derivative tolerance")
    common.add_argument("--max-bfgs", type=int, default=10)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--timing", action="store_true", help="fill the seconds column")
    common.add_argument("--gamma0", type=float, default=1.0, help="starting o-scaling factor")

    p = _Parser(prog="mesp-gscale", description="Scaled upper bounds for (constrained) maximum-entropy sampling.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("bound", parents=[common], help="compute one bound")
    b.add_argument("--method", choices=METHODS, default="linx")
    b.add_argument("--scaling", choices=SCALINGS, default="none")
    b.add_argument("--s", help="s values, e.g. 3 or 2-8 or 2,4,6 (default: the instance's s)")
    b.add_argument("--x", help="0/1 vector for bqp-eval, comma separated")
    b.set_defaults(func=cmd_bound)

    so = sub.add_parser("scale-opt", parents=[common], help="Newton o-scaling then BFGS g-scaling")
    so.add_argument("--method", choices=("linx", "ddfact"), default="linx")
    so.set_defaults(func=cmd_scale_opt)

    f = sub.add_parser("fix", parents=[common], help="iterative variable fixing")
    f.add_argument("--mode", choices=("o", "g", "both"), default="both")
    f.set_defaults(func=cmd_fix)

    h = sub.add_parser("heuristic", parents=[common], help="greedy plus local search lower bound")
    h.set_defaults(func=cmd_heuristic)

    g = sub.add_parser("gen", parents=[common], help="generate a random instance")
    g.add_argument("--n", type=int)
    g.add_argument("--s", dest="s_gen", type=int)
    g.add_argument("--m", type=int, default=0, help="number of side constraints")
    g.add_argument("--rank", type=int, help="rank of C (default full)")
    g.set_defaults(func=cmd_gen)

    br = sub.add_parser("brute", parents=[common], help="exact optimum by enumeration")
    br.set_defaults(func=cmd_brute)

    r = sub.add_parser("report", parents=[common], help="o- vs g-scaling gap table over an s sweep")
    r.add_argument("--bounds", default="linx,ddfact")
    r.add_argument("--s", help="s values (default: the instance's s)")
    r.add_argument("--from-csv", help="build the report from an existing bound CSV instead")
    r.set_defaults(func=cmd_report)
    return p


def _fail(kind, exc, code):
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, 1)
    except (InstanceError, ReportError) as exc:
        return _fail("input", exc, 1)
    except (InfeasiblePolytope, NoFeasibleSolution) as exc:
        return _fail("infeasible", exc, 2)
    except (ComputationError, RelaxationError, ScalingError, OracleError, ValueError, RuntimeError,
            np.linalg.LinAlgError) as exc:
        return _fail("computation", exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
