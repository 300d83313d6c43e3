import numpy as np
import pytest
from hypothesis import given, strategies as st

from msfactor import twostate
from msfactor.errors import ConvergenceError, PreconditionError
from msfactor.linalg import fro
from msfactor.model import DetuningProfile, PulseShape

CONST = PulseShape("constant", 1.0)
GAUSS = PulseShape("gaussian", 1.0, 0.0, 1.0)


def test_hamiltonian_examples():
    assert np.allclose(twostate.two_state_hamiltonian(1, 0, 1), [[0, 1], [1, 0]])
    assert np.allclose(twostate.two_state_hamiltonian(0, 5, 1), [[0, 0], [0, 5]])
    assert np.allclose(twostate.two_state_hamiltonian(2, 3, 0.5), [[0, 1], [1, 3]])


@pytest.mark.parametrize("method", ["analytic-resonant", "analytic-constant", "numeric"])
def test_resonant_pi_pulse(method):
    ck = twostate.propagate_two_state(np.pi / 2, DetuningProfile(), CONST, 0.0, 1.0, method)
    assert abs(ck.alpha) <= 1e-10 and abs(ck.beta + 1j) <= 1e-10


@pytest.mark.parametrize("method", ["analytic-constant", "numeric"])
def test_decoupled_pair(method):
    ck = twostate.propagate_two_state(0.0, DetuningProfile("constant", 0.9), CONST, 0.0, 2.0, method)
    assert abs(ck.alpha - 1) <= 1e-10 and abs(ck.beta) <= 1e-10
    assert np.allclose(ck.matrix(), np.diag([1, np.exp(-1.8j)]), atol=1e-10)


@pytest.mark.parametrize("method", ["analytic-constant", "numeric"])
def test_constant_vs_matrix_exp(method):
    ck = twostate.propagate_two_state(1.0, DetuningProfile("constant", 2.0), CONST, 0.0, 0.7, method)
    assert fro(ck.matrix() - twostate.constant_oracle(1.0, 2.0, 1.0, 0.7)) <= 1e-10


def test_method_preconditions():
    with pytest.raises(PreconditionError):
        twostate.propagate_two_state(1.0, DetuningProfile("constant", 1.0), CONST, 0, 1, "analytic-resonant")
    with pytest.raises(PreconditionError):
        twostate.propagate_two_state(1.0, DetuningProfile(), GAUSS, 0, 1, "analytic-constant")
    with pytest.raises(PreconditionError):
        twostate.propagate_two_state(1.0, DetuningProfile(), GAUSS, 1, 0)
    with pytest.raises(PreconditionError):
        twostate.propagate_two_state(1.0, DetuningProfile(), GAUSS, 0, 1, "magic")


def test_resonant_gaussian_area():
    # analytic area formula against the numeric route
    a = twostate.propagate_two_state(1.3, DetuningProfile(), GAUSS, -4, 3, "analytic-resonant")
    n = twostate.propagate_two_state(1.3, DetuningProfile(), GAUSS, -4, 3, "numeric")
    assert fro(a.matrix() - n.matrix()) <= 1e-9


def test_from_matrix_rejects_drift():
    with pytest.raises(ConvergenceError):
        twostate.CayleyKlein.from_matrix(np.diag([1.1, 1.0]), 0, 1)


def test_choose_method():
    assert twostate.choose_method(DetuningProfile(), GAUSS) == "analytic-resonant"
    assert twostate.choose_method(DetuningProfile("constant", 1), CONST) == "analytic-constant"
    assert twostate.choose_method(DetuningProfile("linear-chirp", 0, 1), GAUSS) == "numeric"


@given(
    st.floats(0.0, 2.5),
    st.floats(-2.0, 2.0),
    st.floats(-1.0, 1.0),
    st.floats(0.2, 4.0),
)
def test_cayley_klein_and_unitarity(lam, d0, slope, T):
    ck = twostate.propagate_two_state(lam, DetuningProfile("linear-chirp", d0, slope), GAUSS, -T, T)
    assert ck.norm_defect <= 1e-10
    u = ck.matrix()
    assert fro(u @ u.conj().T - np.eye(2)) <= 1e-10
    phase = DetuningProfile("linear-chirp", d0, slope).integral(-T, T)
    assert abs(np.angle(np.exp(-1j * phase) / np.linalg.det(u))) <= 1e-9


def test_grid_matches_endpoints():
    det = DetuningProfile("linear-chirp", 0.2, 0.5)
    times = np.linspace(-3, 3, 9)
    cks = twostate.propagate_two_state_grid(0.8, det, GAUSS, times)
    for ck, t in zip(cks[1:], times[1:]):
        ref = twostate.propagate_two_state(0.8, det, GAUSS, -3.0, t)
        assert fro(ck.matrix() - ref.matrix()) <= 1e-9
