import numpy as np
import pytest

from mesp_gscale.bqp import (BqpPoint, bqp_grad_logups, bqp_hess_logups, bqp_lift_integer, bqp_value,
                             in_lifted_set)
from mesp_gscale.instance import Instance

from conftest import central_diff, random_pd, rel_err

D = Instance(np.diag([2.0, 3, 5]), 2)


def _interior_point(rng, n, s, w=0.7):
    """A convex combination of integer lifts with a uniform mixture (strictly inside)."""
    pts = []
    for _ in range(4):
        S = rng.choice(n, s, replace=False)
        x = np.zeros(n)
        x[S] = 1
        pts.append(bqp_lift_integer(x))
    lam = rng.dirichlet(np.ones(len(pts)))
    x = sum(l * p.x for l, p in zip(lam, pts))
    X = sum(l * p.X for l, p in zip(lam, pts))
    # mix with the barycenter of all s-subsets
    xb = np.full(n, s / n)
    off = s * (s - 1) / (n * (n - 1))
    Xb = np.full((n, n), off)
    np.fill_diagonal(Xb, s / n)
    return BqpPoint(w * x + (1 - w) * xb, w * X + (1 - w) * Xb, s)


def test_lift_examples():
    pt = bqp_lift_integer([1, 1, 0])
    assert np.array_equal(pt.X, [[1, 1, 0], [1, 1, 0], [0, 0, 0]]) and pt.in_P
    pt = bqp_lift_integer([1, 0, 0, 0])
    E = np.zeros((4, 4))
    E[0, 0] = 1
    assert np.array_equal(pt.X, E) and pt.s == 1
    with pytest.raises(ValueError):
        bqp_lift_integer([0.5, 0.5])


def test_value_examples():
    pt = bqp_lift_integer([1.0, 1, 0])
    assert bqp_value(D, pt) == pytest.approx(np.log(6), abs=1e-13)
    assert bqp_value(D, pt, np.array([2.0, 1, 1])) == pytest.approx(np.log(6), abs=1e-13)
    assert bqp_value(D, pt, np.array([0.3, 9.0, 2.0])) == pytest.approx(np.log(6), abs=1e-13)
    assert bqp_value(Instance(np.eye(5), 2), bqp_lift_integer([0, 1, 0, 1, 0.0])) == pytest.approx(0.0, abs=1e-14)


def test_value_outside_domain():
    inst = Instance(np.array([[1.0, 1, 0], [1, 1, 0], [0, 0, 1]]), 2)
    assert bqp_value(inst, bqp_lift_integer([1.0, 1, 0])) is None


def test_barycenter_in_P(rng):
    assert _interior_point(rng, 6, 3).in_P
    assert not in_lifted_set(np.full(3, 0.5), np.eye(3) * 0.5, 1)


def test_grad_zero_at_integer_lift(rng):
    inst = Instance(random_pd(5, rng), 2)
    pt = bqp_lift_integer([0, 1, 0, 0, 1.0])
    assert np.allclose(bqp_grad_logups(inst, pt, np.exp(rng.normal(size=5))), 0, atol=1e-12)


def test_grad_hess_zero_at_x_e():
    inst = Instance(np.diag([1.0, 2, 3]), 2)
    pt = BqpPoint(np.ones(3), np.ones((3, 3)), 2)  # bypasses membership on purpose
    assert np.allclose(bqp_grad_logups(inst, pt), 0) and np.allclose(bqp_hess_logups(inst, pt), 0)


def test_grad_and_hess_fd(rng):
    for _ in range(10):
        inst = Instance(random_pd(4, rng), 2)
        pt = _interior_point(rng, 4, 2)
        psi = rng.normal(size=4)
        fd = central_diff(lambda p: bqp_value(inst, pt, np.exp(p)), psi)
        assert rel_err(bqp_grad_logups(inst, pt, np.exp(psi)), fd) < 1e-5
        H = bqp_hess_logups(inst, pt, np.exp(psi))
        fdH = np.array([central_diff(lambda p: bqp_grad_logups(inst, pt, np.exp(p))[i], psi) for i in range(4)])
        assert rel_err(H, fdH) < 1e-4
        assert np.linalg.eigvalsh(H)[0] >= -1e-8


def test_hess_scalar_closed_form():
    c, t, X11, g = 1.5, 0.3, 0.3, 0.7
    inst = Instance(np.diag([c, 1.0]), 1)
    pt = BqpPoint(np.array([t, 1 - t]), np.diag([X11, 1 - t]), 1)
    H = bqp_hess_logups(inst, pt, np.array([g, 1.0]))
    f = g**2 * c * X11 + 1 - t
    assert H[0, 0] == pytest.approx(4 * (1 - t) / f - 4 * (1 - t) ** 2 / f**2, abs=1e-13)


def test_convex_in_logups(rng):
    inst = Instance(random_pd(5, rng), 2)
    pt = _interior_point(rng, 5, 2)
    for _ in range(20):
        p1, p2 = rng.normal(size=5), rng.normal(size=5)
        mid = bqp_value(inst, pt, np.exp((p1 + p2) / 2))
        assert mid <= 0.5 * (bqp_value(inst, pt, np.exp(p1)) + bqp_value(inst, pt, np.exp(p2))) + 1e-10


def test_concave_in_xX(rng):
    inst = Instance(random_pd(5, rng), 2)
    ups = np.exp(rng.normal(size=5))
    for _ in range(20):
        a, b = _interior_point(rng, 5, 2), _interior_point(rng, 5, 2)
        m = BqpPoint((a.x + b.x) / 2, (a.X + b.X) / 2, 2)
        assert bqp_value(inst, m, ups) >= 0.5 * (bqp_value(inst, a, ups) + bqp_value(inst, b, ups)) - 1e-10


def test_cardinality_mismatch():
    with pytest.raises(ValueError):
        bqp_value(Instance(np.eye(3), 1), bqp_lift_integer([1.0, 1, 0]))
