import numpy as np
import pytest
from hypothesis import given, strategies as st

from msfactor import linalg
from msfactor.errors import NotHermitianError, ShapeError
from msfactor.linalg import adjoint, fro
from msfactor.oracle import charpoly_eigs


def test_adjoint_is_an_involution(rng):
    m = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    assert np.array_equal(adjoint(adjoint(m)), m)
    assert linalg.as_matrix(m).size == 15


def test_as_matrix_rejects_vectors():
    with pytest.raises(ShapeError):
        linalg.as_matrix([1, 2, 3])


def test_identity_eigenpairs():
    eig = linalg.hermitian_eig(np.eye(2))
    assert np.allclose(eig.values, [1, 1])
    assert np.allclose(adjoint(eig.vectors) @ eig.vectors, np.eye(2), atol=1e-14)


def test_symmetric_2x2():
    eig = linalg.hermitian_eig([[2, 1], [1, 2]])
    assert np.allclose(eig.values, [3, 1], atol=1e-14)
    v = eig.vectors
    assert abs(abs(np.vdot(v[:, 0], [1, 1])) / np.sqrt(2) - 1) < 1e-12
    assert abs(abs(np.vdot(v[:, 1], [1, -1])) / np.sqrt(2) - 1) < 1e-12


def test_3x3_against_cubic(rng):
    for _ in range(20):
        m = linalg.random_hermitian(3, rng)
        assert np.max(np.abs(linalg.hermitian_eig(m).values - charpoly_eigs(m))) <= 1e-10


def test_non_hermitian_is_rejected():
    with pytest.raises(NotHermitianError):
        linalg.hermitian_eig([[1, 2], [0, 1]])


def test_non_square_is_rejected():
    with pytest.raises(ShapeError):
        linalg.hermitian_eig(np.ones((2, 3)))


@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_eigenpairs_and_orthonormality(seed, n):
    rng = np.random.default_rng(seed)
    m = linalg.random_hermitian(n, rng)
    eig = linalg.hermitian_eig(m)
    v = eig.vectors
    for k in range(n):
        assert fro(m @ v[:, k] - eig.values[k] * v[:, k]) <= 1e-12 * max(fro(m), 1.0)
    assert fro(adjoint(v) @ v - np.eye(n)) <= 1e-12
    assert np.all(np.diff(eig.values) <= 0)


@given(st.integers(0, 2**32 - 1))
def test_degenerate_spectrum(seed):
    rng = np.random.default_rng(seed)
    u = linalg.random_unitary(5, rng)
    m = u @ np.diag([2.0, 2.0, 2.0, -1.0, 0.0]) @ adjoint(u)
    m = 0.5 * (m + adjoint(m))
    eig = linalg.hermitian_eig(m)
    assert np.allclose(eig.values, [2, 2, 2, 0, -1], atol=1e-12)
    assert fro(adjoint(eig.vectors) @ eig.vectors - np.eye(5)) <= 1e-12


def test_least_squares_identity():
    x, res = linalg.solve_least_squares(np.eye(2), [1, 2])
    assert np.allclose(x, [1, 2]) and res == pytest.approx(0, abs=1e-15)


def test_least_squares_projection():
    x, res = linalg.solve_least_squares([[1], [1]], [1, 0])
    assert np.allclose(x, [0.5]) and res == pytest.approx(1 / np.sqrt(2), abs=1e-14)


def test_least_squares_vs_normal_equations(rng):
    a = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    _, res = linalg.solve_least_squares(a, b)
    x_ne = np.linalg.solve(adjoint(a) @ a, adjoint(a) @ b)
    assert abs(res - np.linalg.norm(a @ x_ne - b)) <= 1e-9


def test_least_squares_shape_mismatch():
    with pytest.raises(ShapeError):
        linalg.solve_least_squares(np.eye(3), [1, 2])


def test_matrix_exp_zero_and_pi_pulse():
    assert np.array_equal(linalg.matrix_exp(np.zeros((3, 3)), 1.0), np.eye(3))
    u = linalg.matrix_exp([[0, np.pi / 2], [np.pi / 2, 0]], 1.0)
    assert np.allclose(u, [[0, -1j], [-1j, 0]], atol=1e-14)


def test_matrix_exp_vs_eig(rng):
    m = linalg.random_hermitian(4, rng)
    eig = linalg.hermitian_eig(m)
    ref = (eig.vectors * np.exp(-0.3j * eig.values)) @ adjoint(eig.vectors)
    assert fro(linalg.matrix_exp(m, 0.3) - ref) <= 1e-11
