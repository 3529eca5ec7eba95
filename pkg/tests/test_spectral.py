import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesp_gscale import spectral

from conftest import random_pd


def test_sym_eig_diag():
    sd = spectral.sym_eig(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(sd.lambdas, [3, 2, 1])


def test_sym_eig_2x2():
    sd = spectral.sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(sd.lambdas, [3, 1])
    q1 = np.array([1.0, 1.0]) / np.sqrt(2)
    q2 = np.array([1.0, -1.0]) / np.sqrt(2)
    assert abs(abs(sd.Q[:, 0] @ q1) - 1) < 1e-12 and abs(abs(sd.Q[:, 1] @ q2) - 1) < 1e-12


def test_sym_eig_identity_reconstructs():
    sd = spectral.sym_eig(np.eye(4))
    assert np.allclose(sd.lambdas, 1) and np.allclose(sd.reconstruct(), np.eye(4))


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(spectral.NotSymmetric):
        spectral.sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_jacobi_matches_lapack(rng):
    for n in (1, 2, 5, 12):
        G = rng.standard_normal((n, n))
        X = G + G.T
        a = spectral.sym_eig(X)
        b = spectral.jacobi_eig(X)
        assert np.allclose(a.lambdas, b.lambdas, atol=1e-10 * max(1, np.abs(a.lambdas).max()))
        assert np.allclose(b.reconstruct(), X, atol=1e-10)
        assert np.allclose(b.Q.T @ b.Q, np.eye(n), atol=1e-10)


def test_ldet_examples():
    assert spectral.ldet_pd(np.diag([2.0, 3.0])) == pytest.approx(np.log(6), abs=1e-14)
    assert spectral.ldet_pd(np.eye(5)) == 0.0
    with pytest.raises(spectral.NotPositiveDefinite):
        spectral.ldet_pd(np.ones((2, 2)))


def test_solve_examples(rng):
    assert np.allclose(spectral.solve_pd(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))
    B = rng.standard_normal((3, 2))
    assert np.allclose(spectral.solve_pd(np.eye(3), B), B)
    assert np.allclose(spectral.solve_pd(np.array([[2.0, 1], [1, 2]]), np.ones(2)), [1 / 3, 1 / 3])
    with pytest.raises(spectral.NotPositiveDefinite):
        spectral.solve_pd(np.ones((2, 2)), np.ones(2))


def test_numeric_rank_examples():
    assert spectral.numeric_rank(np.ones((4, 4))) == 1
    assert spectral.numeric_rank(np.eye(5)) == 5
    assert spectral.numeric_rank(np.diag([1.0, 1e-18])) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_ldet_matches_eigenvalues(n, seed):
    X = random_pd(n, np.random.default_rng(seed), cond=1e3)
    assert spectral.ldet_pd(X) == pytest.approx(np.sum(np.log(spectral.sym_eig(X).lambdas)), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**32 - 1))
def test_solve_multiply_back(n, seed):
    rng = np.random.default_rng(seed)
    X = random_pd(n, rng, cond=1e3)
    B = rng.standard_normal((n, 3))
    Y = spectral.solve_pd(X, B)
    assert np.linalg.norm(X @ Y - B) <= 1e-8 * max(np.linalg.norm(B), 1)
