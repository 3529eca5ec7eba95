"""Problem data for constrained maximum-entropy sampling.

An :class:`Instance` bundles a covariance matrix ``C``, the sample size
``s`` and optional side constraints ``A x <= b``.  Instances are validated
on construction and never mutated afterwards.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import EPS, NotSymmetric, rank_threshold, sym_eig


class InstanceError(ValueError):
    """Raised for malformed or inconsistent problem data."""


@dataclass(frozen=True, eq=False)
class Instance:
    C: np.ndarray
    s: int
    A: np.ndarray = None
    b: np.ndarray = None
    rank: int = field(init=False)

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise InstanceError(f"C must be square, got shape {C.shape}")
        n = C.shape[0]
        if n < 2:
            raise InstanceError("need n > 1")
        if not np.all(np.isfinite(C)):
            raise InstanceError("C has non-finite entries")
        scale = max(np.abs(C).max(), EPS)
        if np.abs(C - C.T).max() > 1e-12 * scale:
            raise InstanceError("C is not symmetric")
        C = 0.5 * (C + C.T)
        s = self.s
        if int(s) != s or not 0 < s < n:
            raise InstanceError(f"need 0 < s < n, got s={s}, n={n}")
        lam = np.linalg.eigvalsh(C)
        normC = max(abs(lam[0]), abs(lam[-1]))
        if lam[0] < -1e-10 * normC:
            raise InstanceError(f"C is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
        rank = int(np.sum(lam > rank_threshold(lam[-1], n)))
        if rank < s:
            raise InstanceError(f"rank(C) = {rank} < s = {s}")

        A = np.zeros((0, n)) if self.A is None else np.array(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.zeros(0) if self.b is None else np.array(self.b, dtype=float).ravel()
        if A.ndim != 2 or A.shape[1] != n:
            raise InstanceError(f"A must have {n} columns, got shape {A.shape}")
        if b.shape[0] != A.shape[0]:
            raise InstanceError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")

        for arr in (C, A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "s", int(s))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "rank", rank)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def with_s(self, s: int) -> "Instance":
        return Instance(self.C, s, self.A, self.b)

    def without_constraints(self) -> "Instance":
        return Instance(self.C, self.s)

    def is_feasible(self, x, tol=1e-9) -> bool:
        """Whether ``x`` satisfies the cardinality, box and side constraints."""
        x = np.asarray(x, dtype=float)
        return bool(
            abs(x.sum() - self.s) <= tol * max(1, self.s)
            and np.all(x >= -tol)
            and np.all(x <= 1 + tol)
            and np.all(self.A @ x <= self.b + tol)
        )

    def to_dict(self) -> dict:
        d = {"n": self.n, "s": self.s, "C": self.C.tolist()}
        if self.m:
            d["A"] = self.A.tolist()
            d["b"] = self.b.tolist()
        return d


@dataclass(frozen=True)
class Factorization:
    """``C = F F^T`` with ``k = rank(C)`` columns, largest eigenvalue first."""

    F: np.ndarray

    @property
    def k(self) -> int:
        return self.F.shape[1]


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from None
    return instance_from_dict(data)


def instance_from_dict(data: dict) -> Instance:
    try:
        C = np.array(data["C"], dtype=float)
        s = data["s"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"bad instance data: {exc}") from None
    if "n" in data and C.shape != (data["n"], data["n"]):
        raise InstanceError(f"declared n={data['n']} does not match C of shape {C.shape}")
    if isinstance(s, bool) or not isinstance(s, int):
        raise InstanceError("s must be an integer")
    A = data.get("A")
    b = data.get("b")
    if (A is None) != (b is None):
        raise InstanceError("A and b must be given together")
    try:
        return Instance(C, s, None if A is None else np.array(A, dtype=float),
                        None if b is None else np.array(b, dtype=float))
    except NotSymmetric as exc:
        raise InstanceError(str(exc)) from None


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()))


def complement_instance(inst: Instance, rtol=1e-12):
    """Return ``(complementary instance, ldet C)``.

    Any upper bound on the complementary problem plus the returned shift
    bounds the original problem.  The inverse is formed from the
    eigendecomposition so it stays exactly symmetric.  ``C`` counts as
    singular when ``lambda_min <= n * rtol * lambda_max``; this is stricter
    than the rank test because inverting a nearly singular ``C`` produces a
    useless complementary matrix.
    """
    sd = sym_eig(inst.C)
    lam, U = sd.lambdas, sd.Q
    if lam[-1] <= inst.n * rtol * lam[0]:
        raise InstanceError("C is numerically singular; complementation needs an invertible C")
    Cinv = (U / lam) @ U.T
    Cinv = 0.5 * (Cinv + Cinv.T)
    shift = float(np.sum(np.log(lam)))
    comp = Instance(Cinv, inst.n - inst.s, -inst.A, inst.b - inst.A.sum(axis=1))
    return comp, shift


def scale_matrix(inst_or_C, ups) -> np.ndarray:
    """``Diag(ups) C Diag(ups)``."""
    C = inst_or_C.C if isinstance(inst_or_C, Instance) else np.asarray(inst_or_C, dtype=float)
    ups = np.asarray(ups, dtype=float)
    if ups.shape != (C.shape[0],):
        raise ValueError("scaling vector has the wrong length")
    if not np.all(ups > 0) or not np.all(np.isfinite(ups)):
        raise ValueError("scaling vector must be positive and finite")
    return ups[:, None] * C * ups[None, :]


def factorize(inst_or_C) -> Factorization:
    """``F = U Lambda^{1/2}`` over the nonzero part of the spectrum of ``C``."""
    C = inst_or_C.C if isinstance(inst_or_C, Instance) else np.asarray(inst_or_C, dtype=float)
    sd = sym_eig(C)
    keep = sd.lambdas > rank_threshold(sd.lambdas[0], C.shape[0])
    F = sd.Q[:, keep] * np.sqrt(sd.lambdas[keep])
    return Factorization(F)


def gen_constraints(inst: Instance, m: int, seed: int, incumbent, max_tries=100) -> Instance:
    """Append ``m`` random side constraints that cut off ``incumbent``.

    Rows have integer entries drawn uniformly from {-2, ..., 2}.  One row,
    chosen uniformly, gets ``b_i = a_i^T x - 1`` so the incumbent violates it;
    the others get ``b_i = a_i^T x + u_i`` with ``u_i`` uniform on {0, 1, 2}.
    Draws whose violated row has ``a_i^T x`` at its minimum over s-subsets
    (so no s-subset satisfies it) are rejected and redrawn, as are draws
    with no 0/1 point satisfying all rows.
    """
    if m == 0:
        return inst
    x = np.asarray(incumbent, dtype=float)
    n, s = inst.n, inst.s
    if x.shape != (n,) or not np.all((x == 0) | (x == 1)) or x.sum() != s:
        raise InstanceError("incumbent must be a 0/1 vector with s ones")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        A = rng.integers(-2, 3, size=(m, n)).astype(float)
        ax = A @ x
        b = ax + rng.integers(0, 3, size=m)
        cut = rng.integers(m)
        b[cut] = ax[cut] - 1
        # cheapest s-subset for the cut row must still satisfy it
        if np.sort(A[cut])[:s].sum() > b[cut]:
            continue
        if not _lp_feasible(inst, A, b):
            continue
        if _integer_point(inst, A, b) is None:
            continue
        return Instance(inst.C, s, np.vstack([inst.A, A]), np.concatenate([inst.b, b]))
    raise InstanceError(f"seed {seed}: no acceptable constraint draw in {max_tries} tries")


def _lp_feasible(inst, A, b) -> bool:
    from .polytope import Polytope

    A_all = np.vstack([inst.A, A])
    b_all = np.concatenate([inst.b, b])
    return Polytope(inst.n, inst.s, A_all, b_all).is_nonempty()


def _integer_point(inst, A, b):
    from .polytope import Polytope

    A_all = np.vstack([inst.A, A])
    b_all = np.concatenate([inst.b, b])
    return Polytope(inst.n, inst.s, A_all, b_all).integer_point()


def random_covariance(n, seed, rank=None) -> np.ndarray:
    """Random PSD matrix ``G G^T / cols`` with Gaussian ``G`` of ``2n`` columns (or ``rank``)."""
    rng = np.random.default_rng(seed)
    cols = 2 * n if rank is None else rank
    G = rng.standard_normal((n, cols))
    C = G @ G.T / cols
    return 0.5 * (C + C.T)
