import numpy as np
import pytest

from mesp_gscale.ddfact import (DdfactObjective, ddfact_gen_grad_x, ddfact_grad_logups, ddfact_grad_ups,
                                ddfact_value)
from mesp_gscale.gamma import OutsideDomain
from mesp_gscale.heuristics import subset_ldet
from mesp_gscale.instance import Factorization, Instance, factorize

from conftest import central_diff, random_pd, rel_err


def _feasible_interior(rng, n, s):
    x = rng.uniform(0.1, 1.0, n)
    x *= s / x.sum()
    if x.max() >= 1:
        return np.full(n, s / n)
    return x


def test_value_examples():
    inst = Instance(np.diag([4.0, 1.0]), 1)
    assert ddfact_value(inst, x=np.array([1.0, 0.0])).value == pytest.approx(np.log(4), abs=1e-14)
    assert ddfact_value(Instance(np.eye(2), 1), x=np.array([0.5, 0.5])).value == pytest.approx(0.0, abs=1e-14)


def test_o_scaling_invariance_fixed_x(rng):
    inst = Instance(random_pd(6, rng), 3)
    x = _feasible_interior(rng, 6, 3)
    vals = [ddfact_value(inst, x=x, ups=np.full(6, g)).value for g in (0.5, 1.0, 2.0)]
    assert max(vals) - min(vals) <= 1e-10


def test_grad_x_boundary_example():
    inst = Instance(np.diag([4.0, 1.0]), 1)
    assert np.allclose(ddfact_gen_grad_x(inst, x=np.array([1.0, 0.0])), [1.0, 0.25])


def test_grad_x_fd_interior(rng):
    for _ in range(10):
        inst = Instance(random_pd(6, rng), 3)
        x, ups = rng.uniform(0.2, 0.9, 6), np.exp(0.3 * rng.normal(size=6))
        fd = central_diff(lambda z: ddfact_value(inst, x=z, ups=ups).value, x)
        assert rel_err(ddfact_gen_grad_x(inst, x=x, ups=ups), fd) < 1e-5


def test_grad_x_boundary_residual(rng):
    G = rng.standard_normal((6, 4))
    inst = Instance(G @ G.T, 2)
    fac = factorize(inst)
    x = np.array([0.0, 0.6, 0.0, 0.8, 0.6, 0.0])
    g = ddfact_gen_grad_x(inst, fac, x)
    f0 = ddfact_value(inst, fac, x).value
    for _ in range(5):
        d = rng.uniform(0, 1, 6) * (x == 0) + rng.normal(size=6) * (x > 0)
        d /= np.linalg.norm(d)
        res = [abs(ddfact_value(inst, fac, x + h * d).value - f0 - h * g @ d) / h for h in (1e-2, 1e-3, 1e-4)]
        assert res[0] > res[1] > res[2]


def test_grad_ups_fd(rng):
    for _ in range(10):
        inst = Instance(random_pd(5, rng), 2)
        x, ups = rng.uniform(0.2, 0.9, 5), np.exp(0.3 * rng.normal(size=5))
        fd = central_diff(lambda u: ddfact_value(inst, x=x, ups=u).value, ups)
        assert rel_err(ddfact_grad_ups(inst, x=x, ups=ups), fd) < 1e-5
        assert np.allclose(ddfact_grad_logups(inst, x=x, ups=ups), ups * ddfact_grad_ups(inst, x=x, ups=ups))


def test_grad_ups_zero_x_outside_domain():
    with pytest.raises(OutsideDomain):
        ddfact_grad_ups(Instance(np.eye(3), 1), x=np.zeros(3))


def test_objective_class_matches(rng):
    inst = Instance(random_pd(6, rng), 3)
    x, ups = rng.uniform(0.2, 0.9, 6), np.exp(0.3 * rng.normal(size=6))
    obj = DdfactObjective(inst, ups)
    v, g = obj.value_grad(x)
    assert v == pytest.approx(ddfact_value(inst, x=x, ups=ups).value, abs=1e-12)
    assert np.allclose(g, ddfact_gen_grad_x(inst, x=x, ups=ups), atol=1e-11)
    assert np.allclose(obj.grad_logups(x), ddfact_grad_logups(inst, x=x, ups=ups), atol=1e-11)


def test_factor_invariance(rng):
    inst = Instance(random_pd(6, rng), 3)
    L = np.linalg.cholesky(inst.C)
    x, ups = rng.uniform(0.2, 0.9, 6), np.exp(0.3 * rng.normal(size=6))
    a = ddfact_value(inst, factorize(inst), x, ups).value
    b = ddfact_value(inst, Factorization(L), x, ups).value
    assert a == pytest.approx(b, abs=1e-8)


def test_concave_in_x(rng):
    inst = Instance(random_pd(6, rng), 3)
    for _ in range(30):
        a, b = rng.uniform(0.05, 1, 6), rng.uniform(0.05, 1, 6)
        va, vb = ddfact_value(inst, x=a).value, ddfact_value(inst, x=b).value
        assert ddfact_value(inst, x=(a + b) / 2).value >= 0.5 * (va + vb) - 1e-10


def test_dominates_ldet_at_integer_points(rng):
    inst = Instance(random_pd(7, rng), 3)
    for _ in range(20):
        S = rng.choice(7, 3, replace=False)
        x = np.zeros(7)
        x[S] = 1
        ups = np.exp(rng.normal(size=7))
        assert ddfact_value(inst, x=x, ups=ups).value >= subset_ldet(inst.C, S) - 1e-10


def test_gradient_continuity(rng):
    inst = Instance(random_pd(6, rng), 3)
    x = rng.uniform(0.2, 0.9, 6)
    g0 = ddfact_gen_grad_x(inst, x=x)
    g1 = ddfact_gen_grad_x(inst, x=x + 1e-6 * rng.normal(size=6))
    assert np.abs(g1 - g0).max() <= 1e-3
