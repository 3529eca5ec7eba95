import dataclasses

import numpy as np
import pytest

from mesp_gscale.instance import Instance
from mesp_gscale.relax import solve_relaxation
from mesp_gscale.scaling import (ScalingError, ScalingVector, bfgs_optimize_scaling, evaluate_z,
                                 newton_oscaling, subgrad_z)

from conftest import random_instance


def test_scaling_vector():
    sv = ScalingVector.from_psi([0.0, np.log(2)])
    assert np.allclose(sv.ups, [1, 2]) and np.allclose(sv.psi, [0, np.log(2)])
    with pytest.raises(ValueError):
        ScalingVector(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ScalingVector(np.array([1.0, np.inf]))


def test_subgrad_identity_zero():
    inst = Instance(np.eye(2), 1)
    rr = solve_relaxation(inst, "linx")
    # f is identically 0 on the feasible set, so every point is optimal
    for x in ([0.5, 0.5], rr.x_star):
        rx = dataclasses.replace(rr, x_star=np.array(x, dtype=float))
        assert np.allclose(subgrad_z(inst, "linx", None, rx), 0.0, atol=1e-12)


def test_subgrad_ddfact_mesp_zero():
    inst = random_instance(21, 8, 8)
    rr = solve_relaxation(inst, "ddfact")
    assert np.abs(subgrad_z(inst, "ddfact", None, rr)).max() <= 1e-5


def test_subgrad_unconverged():
    inst = random_instance(22, 8, 8)
    rr = solve_relaxation(inst, "linx", max_iter=1, tol=1e-14)
    with pytest.raises(ScalingError):
        subgrad_z(inst, "linx", None, rr)


def test_subgrad_matches_directional_differences(rng):
    inst = random_instance(23, 8, 8, m=2)
    psi = 0.2 * rng.normal(size=inst.n)
    z0, g, _ = evaluate_z(inst, "linx", np.exp(psi), tol=1e-12)
    h = 1e-4
    for _ in range(3):
        d = rng.normal(size=inst.n)
        d /= np.linalg.norm(d)
        zp = evaluate_z(inst, "linx", np.exp(psi + h * d), tol=1e-12)[0]
        zm = evaluate_z(inst, "linx", np.exp(psi - h * d), tol=1e-12)[0]
        # convexity: the subgradient inner product is bracketed by one-sided quotients
        assert (z0 - zm) / h - 1e-6 <= g @ d <= (zp - z0) / h + 1e-6


def test_bfgs_identity_stationary():
    res = bfgs_optimize_scaling(Instance(np.eye(2), 1), "linx", np.ones(2))
    assert np.allclose(res.scaling.ups, 1.0) and abs(res.z) <= 1e-8


def test_bfgs_zero_steps_noop():
    inst = random_instance(24, 7, 7)
    u0 = np.exp(np.linspace(-0.2, 0.2, inst.n))
    sv, trace = bfgs_optimize_scaling(inst, "linx", u0, max_steps=0)
    assert np.array_equal(sv.ups, u0) and len(trace) == 1


def test_bfgs_non_ascent_and_dominates_o_scaling():
    inst = random_instance(25, 9, 9, m=2)
    o = newton_oscaling(inst, "linx")
    res = bfgs_optimize_scaling(inst, "linx", np.full(inst.n, o.gamma), max_steps=5)
    assert res.z <= res.trace[0].z + 1e-9
    assert res.z <= o.z + 1e-6
    assert min(st.z for st in res.trace) <= o.z + 1e-6


def test_newton_identity():
    gamma, z = newton_oscaling(Instance(np.eye(2), 1), "linx", gamma0=3.0)
    assert gamma == pytest.approx(1.0, abs=1e-6) and abs(z) <= 1e-8


def test_newton_derivative_tolerance():
    inst = random_instance(26, 9, 9, m=1)
    res = newton_oscaling(inst, "linx", gamma0=0.5)
    assert abs(res.derivative) <= 1e-10 or res.note == "bracket collapsed"


def test_newton_ddfact_invariant():
    inst = random_instance(27, 7, 7)
    res = newton_oscaling(inst, "ddfact", gamma0=2.5)
    assert res.gamma == 2.5 and res.note == "scale-invariant"


def test_newton_rejects_bqp():
    with pytest.raises(ValueError):
        newton_oscaling(Instance(np.eye(3), 1), "bqp")


def test_midpoint_convexity_linx(rng):
    inst = random_instance(28, 7, 7, m=1)
    for _ in range(5):
        p1, p2 = 0.4 * rng.normal(size=inst.n), 0.4 * rng.normal(size=inst.n)
        z1 = evaluate_z(inst, "linx", np.exp(p1))[0]
        z2 = evaluate_z(inst, "linx", np.exp(p2))[0]
        zm = evaluate_z(inst, "linx", np.exp((p1 + p2) / 2))[0]
        assert zm <= 0.5 * (z1 + z2) + 2e-8


def test_ddfact_o_scaling_flat():
    inst = random_instance(29, 8, 8, m=1)
    zs = [evaluate_z(inst, "ddfact", np.full(inst.n, g))[0] for g in (0.25, 1.0, 4.0)]
    assert max(zs) - min(zs) <= 2e-8
