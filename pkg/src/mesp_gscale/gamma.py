"""The spectral function behind the factorization bound.

For a non-increasing spectrum ``lam`` and ``0 < s <= k`` there is a unique
split index ``iota`` in ``[0, s)`` with

    lam[iota-1] > tail(iota) / (s - iota) >= lam[iota],   tail(i) = sum(lam[i:])

(0-based arrays, ``lam[-1]`` read as +inf).  The top ``iota`` eigenvalues are
kept and the rest are replaced by their average over ``s - iota`` slots:

    phi_s(lam) = sum(log lam[:iota]) + (s - iota) * log(tail(iota) / (s - iota))

``gamma_s`` applies ``phi_s`` to the spectrum of a PSD matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import rank_threshold, sym_eig


class OutsideDomain(ValueError):
    """The argument has fewer than ``s`` positive eigenvalues."""


@dataclass(frozen=True)
class GammaEval:
    lambdas: np.ndarray
    s: int
    iota: int
    phi: float
    r: int
    Q: np.ndarray = None

    @property
    def tail(self) -> float:
        return float(np.sum(self.lambdas[self.iota:]))

    @property
    def beta(self) -> np.ndarray:
        return beta_vector(self)

    def supergradient(self) -> np.ndarray:
        """``Q Diag(beta) Q^T``, the supdifferential member used throughout."""
        if self.Q is None:
            raise ValueError("no eigenvectors attached")
        return (self.Q * self.beta) @ self.Q.T


def _checked(lambdas, s):
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1:
        raise ValueError("spectrum must be a vector")
    if not 0 < s <= lam.shape[0]:
        raise ValueError(f"need 0 < s <= k, got s={s}, k={lam.shape[0]}")
    if np.any(np.diff(lam) > 1e-12 * max(abs(lam[0]), 1.0)):
        raise ValueError("spectrum must be sorted non-increasing")
    if np.any(lam < 0):
        raise ValueError("spectrum must be nonnegative")
    if np.sum(lam > 0) < s:
        raise OutsideDomain(f"fewer than s={s} positive eigenvalues")
    return lam


def compute_iota(lambdas, s) -> int:
    """The unique split index, found by a linear scan with running tail sums.

    The smallest ``iota`` with ``tail(iota) / (s - iota) >= lam[iota]`` is the
    unique one: failing the test at ``iota - 1`` is exactly the strict left
    inequality at ``iota``.  Scanning this way never comes up empty under
    round-off, since ``iota = s - 1`` always passes.
    """
    lam = _checked(lambdas, s)
    tails = np.cumsum(lam[::-1])[::-1]
    for iota in range(s):
        if tails[iota] / (s - iota) >= lam[iota]:
            return iota
    return s - 1


def _phi(lam, s, iota):
    tail = float(np.sum(lam[iota:]))
    return float(np.sum(np.log(lam[:iota])) + (s - iota) * np.log(tail / (s - iota)))


def phi_s(lambdas, s) -> float:
    lam = _checked(lambdas, s)
    return _phi(lam, s, compute_iota(lam, s))


def beta_vector(ge: GammaEval) -> np.ndarray:
    lam, iota = ge.lambdas, ge.iota
    beta = np.empty_like(lam)
    beta[:iota] = 1.0 / lam[:iota]
    beta[iota:] = (ge.s - iota) / np.sum(lam[iota:])
    return beta


def gamma_eval_from_spectrum(lambdas, s, Q=None) -> GammaEval:
    lam = np.asarray(lambdas, dtype=float)
    lam = np.where(lam > rank_threshold(lam[0] if lam.size else 0.0, lam.shape[0]), lam, 0.0)
    r = int(np.sum(lam > 0))
    if r < s:
        raise OutsideDomain(f"rank {r} < s = {s}")
    iota = compute_iota(lam, s)
    return GammaEval(lam, s, iota, _phi(lam, s, iota), r, Q)


def gamma_s(X, s):
    """``(Gamma_s(X), GammaEval)`` for a PSD matrix ``X`` of numeric rank >= s.

    Eigenvalues under the rank threshold are zeroed first, so zero
    eigen-directions get the tail weight in ``beta``.
    """
    sd = sym_eig(X)
    lam = np.maximum(sd.lambdas, 0.0)
    ge = gamma_eval_from_spectrum(lam, s, sd.Q)
    return ge.phi, ge


def gamma_s_unchecked(X, s):
    """:func:`gamma_s` without input validation, for inner loops.

    ``X`` must already be exactly symmetric.  The split index is found by a
    vectorized version of the scan in :func:`compute_iota`.
    """
    w, V = np.linalg.eigh(X)
    lam = np.maximum(w[::-1], 0.0)
    k = lam.shape[0]
    lam[lam <= rank_threshold(lam[0], k)] = 0.0
    r = int(np.count_nonzero(lam))
    if r < s:
        raise OutsideDomain(f"rank {r} < s = {s}")
    tails = np.cumsum(lam[::-1])[::-1]
    ok = tails[:s] / (s - np.arange(s)) >= lam[:s]
    iota = int(np.argmax(ok)) if ok.any() else s - 1
    phi = _phi(lam, s, iota)
    return phi, GammaEval(lam, s, iota, phi, r, V[:, ::-1])
