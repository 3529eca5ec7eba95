import sys
import numpy as np
import pytest

from mesp_gscale.heuristics import heuristic_lb
from mesp_gscale.instance import Instance, gen_constraints, random_covariance


def random_instance(seed, n_lo=5, n_hi=10, m=0, rank=None):
    """Seeded instance with n in [n_lo, n_hi] and optional side constraints cutting the heuristic incumbent."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    s = int(rng.integers(2, n - 1))
    r = None if rank is None else max(rank(n), s)
    inst = Instance(random_covariance(n, seed, rank=r), s)
    if m:
        inst = gen_constraints(inst, m, seed, heuristic_lb(inst).x)
    return inst


def random_pd(n, rng, cond=10.0):
    G = rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(G)
    lam = np.exp(rng.uniform(0, np.log(cond), n))
    X = (Q * lam) @ Q.T
    return 0.5 * (X + X.T)


def central_diff(f, z, h=1e-6):
    z = np.asarray(z, dtype=float)
    g = np.empty_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


def rel_err(a, b):
    # relative error with a small floor so near-zero gradients are compared absolutely
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
