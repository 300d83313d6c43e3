"""Full-system propagators assembled from the MS two-state solutions.

MS-basis ordering: the ``n_a - n_b`` leading dark states, then the paired
ground states, then the excited states. The diabatic propagator is built
from projectors onto the paired MS states only, so it never touches the
dark vectors and is independent of how the dark subspace is spanned.
"""
from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError, ShapeError
from .linalg import adjoint, fro
from .twostate import choose_method, propagate_two_state

BASES = ("diabatic", "ms")


@dataclass(frozen=True)
class PropagatorMatrix:
    matrix: np.ndarray
    basis: str
    t_i: float
    t_f: float

    @property
    def unitarity_defect(self):
        u = self.matrix
        return fro(u @ adjoint(u) - np.eye(u.shape[0]))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    basis: str = "diabatic"

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def basis_state(cls, dim, index, basis="diabatic"):
        c = np.zeros(dim, dtype=np.complex128)
        c[index] = 1.0
        return cls(c, basis)


def _check_cks(dec, cks):
    if len(cks) != dec.n_b:
        raise ShapeError(f"expected {dec.n_b} Cayley-Klein pairs, got {len(cks)}")


def ms_propagator(dec, cks):
    """Propagator in the MS basis: identity on the dark block, 2x2 blocks on each pair."""
    _check_cks(dec, cks)
    n_a, n_b = dec.n_a, dec.n_b
    u = np.eye(n_a + n_b, dtype=np.complex128)
    for n, ck in enumerate(cks):
        i, j = n_a - n_b + n, n_a + n
        u[np.ix_([i, j], [i, j])] = ck.matrix()
    return PropagatorMatrix(u, "ms", cks[0].t_i, cks[0].t_f)


def diabatic_propagator(dec, cks):
    """Propagator in the original basis, from projectors onto the paired MS states."""
    _check_cks(dec, cks)
    n_a = dec.n_a
    a = dec.coupled_a_states()
    b = dec.b_states()
    alpha = np.array([ck.alpha for ck in cks])
    beta = np.array([ck.beta for ck in cks])
    ph = np.exp(-1j * np.array([ck.phase for ck in cks]))
    u = np.zeros((dec.dim, dec.dim), dtype=np.complex128)
    u[:n_a, :n_a] = np.eye(n_a) + (a * (alpha - 1.0)) @ adjoint(a)
    u[:n_a, n_a:] = (a * (-np.conj(beta) * ph)) @ adjoint(b)
    u[n_a:, :n_a] = (b * beta) @ adjoint(a)
    u[n_a:, n_a:] = (b * (np.conj(alpha) * ph)) @ adjoint(b)
    return PropagatorMatrix(u, "diabatic", cks[0].t_i, cks[0].t_f)


def similarity_propagator(dec, cks):
    """``S^dag U_ms S`` -- the matrix-algebra route to the diabatic propagator."""
    s = dec.s_matrix()
    ums = ms_propagator(dec, cks)
    return PropagatorMatrix(adjoint(s) @ ums.matrix @ s, "diabatic", ums.t_i, ums.t_f)


def to_diabatic(dec, p):
    if p.basis == "diabatic":
        return p
    s = dec.s_matrix()
    return PropagatorMatrix(adjoint(s) @ p.matrix @ s, "diabatic", p.t_i, p.t_f)


def to_ms(dec, p):
    if p.basis == "ms":
        return p
    s = dec.s_matrix()
    return PropagatorMatrix(s @ p.matrix @ adjoint(s), "ms", p.t_i, p.t_f)


def apply(p, c):
    if p.basis != c.basis:
        raise BasisMismatchError(f"propagator is in the {p.basis} basis, state in {c.basis}")
    amps = np.asarray(c.amplitudes, dtype=np.complex128)
    if amps.shape != (p.matrix.shape[0],):
        raise ShapeError(f"state of length {amps.shape} does not fit {p.matrix.shape}")
    return StateVector(p.matrix @ amps, c.basis)


def pair_propagators(dec, delta, pulse, t_i, t_f, method=None, tol=1e-11):
    """Cayley-Klein data of every MS pair, indexed like ``dec.lambdas``."""
    method = method or choose_method(delta, pulse)
    return [
        propagate_two_state(float(lam), delta, pulse, t_i, t_f, method=method, tol=tol)
        for lam in dec.lambdas
    ]


def ms_assembled(spec, t_i, t_f, dec=None, method=None, tol=1e-11):
    """Diabatic propagator of the unperturbed system via the MS factorization."""
    from .mstransform import decompose

    dec = dec if dec is not None else decompose(spec.chi)
    cks = pair_propagators(dec, spec.delta, spec.pulse, t_i, t_f, method=method, tol=tol)
    return diabatic_propagator(dec, cks)
