"""Morris-Shore decomposition of the coupling matrix V.

``A V B^dag`` is reduced to the pattern ``[0_{N_d x N_b}; diag(lambda)]`` by
unitaries ``A`` (ground level) and ``B`` (excited level). Only the small Gram
matrix ``V^dag V`` is diagonalized; the coupled ground states are then built
as ``V |b_n> / lambda_n``, which fixes their pairing and phase with the
excited states. The dark states complete the ground basis.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateClosedFormError, PreconditionError, ShapeError
from .linalg import adjoint, as_matrix, fro, hermitian_eig

DARK_RTOL = 1e-10


@dataclass(frozen=True)
class MSDecomposition:
    """Transformation ``S = diag(A, B)`` with rows of ``A`` ordered dark-first.

    ``lambdas`` are sorted descending; row ``n_a - n_b + n`` of ``A`` pairs
    with row ``n`` of ``B`` and coupling ``lambdas[n]``.
    """

    v: np.ndarray
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    lambdas: np.ndarray
    n_dark: int

    @property
    def n_a(self):
        return self.v.shape[0]

    @property
    def n_b(self):
        return self.v.shape[1]

    @property
    def n_structural_dark(self):
        """Leading dark rows of ``A`` (always ``n_a - n_b``)."""
        return self.n_a - self.n_b

    @property
    def dim(self):
        return self.n_a + self.n_b

    def s_matrix(self):
        n_a, n = self.n_a, self.dim
        s = np.zeros((n, n), dtype=np.complex128)
        s[:n_a, :n_a] = self.a_matrix
        s[n_a:, n_a:] = self.b_matrix
        return s

    def coupled_a_states(self):
        """Kets |a_n> as columns, paired with ``lambdas``."""
        return adjoint(self.a_matrix[self.n_structural_dark :, :])

    def b_states(self):
        """Kets |b_n> as columns."""
        return adjoint(self.b_matrix)

    def with_dark_rows(self, rows):
        """Copy with the leading dark rows of ``A`` replaced."""
        a = self.a_matrix.copy()
        a[: self.n_structural_dark, :] = rows
        return MSDecomposition(self.v, a, self.b_matrix, self.lambdas, self.n_dark)


def pattern(lambdas, n_a):
    """The MS coupling pattern ``[0; diag(lambdas)]`` of shape (n_a, n_b)."""
    lambdas = np.asarray(lambdas)
    n_b = lambdas.shape[0]
    out = np.zeros((n_a, n_b), dtype=np.complex128)
    out[n_a - n_b :, :] = np.diag(lambdas)
    return out


def gram_matrices(v):
    """``(V V^dag, V^dag V)``; the latter is the Gram matrix of the columns of V."""
    v = as_matrix(v)
    return v @ adjoint(v), adjoint(v) @ v


def _orthonormal_complement(q, n):
    """Orthonormal basis (columns) of the complement of the orthonormal columns ``q``."""
    k = q.shape[1]
    if k == n:
        return np.zeros((n, 0), dtype=np.complex128)
    # QR of [q | I] yields q's span first, then the complement
    full, _ = np.linalg.qr(np.hstack([q, np.eye(n, dtype=np.complex128)]))
    comp = full[:, k:n]
    # one re-orthogonalization pass against q for safety
    comp = comp - q @ (adjoint(q) @ comp)
    comp, _ = np.linalg.qr(comp)
    return comp


def decompose(v):
    """Compute the MS decomposition of a constant coupling matrix ``v`` (n_a x n_b)."""
    v = as_matrix(v)
    n_a, n_b = v.shape
    if n_b < 1:
        raise ShapeError("coupling matrix needs at least one column")
    if n_a < n_b:
        raise PreconditionError(
            f"n_a={n_a} < n_b={n_b}: transpose the roles of the two levels"
        )
    _, gram = gram_matrices(v)
    eig = hermitian_eig(gram)
    scale = max(1.0, fro(v) ** 2)
    bright = eig.values > DARK_RTOL * scale
    lambdas = np.where(bright, np.sqrt(np.clip(eig.values, 0.0, None)), 0.0)
    b_kets = eig.vectors
    n_bright = int(bright.sum())  # bright ones come first (descending order)

    a_kets = np.zeros((n_a, n_b), dtype=np.complex128)
    if n_bright:
        a_kets[:, :n_bright] = (v @ b_kets[:, :n_bright]) / lambdas[:n_bright]
        # tidy rounding so the coupled set is orthonormal to working precision
        q, r = np.linalg.qr(a_kets[:, :n_bright])
        a_kets[:, :n_bright] = q * (np.diag(r) / np.abs(np.diag(r)))
    comp = _orthonormal_complement(a_kets[:, :n_bright], n_a)
    # complement fills the zero-coupling slots of the paired block, then the dark rows
    n_zero = n_b - n_bright
    a_kets[:, n_bright:] = comp[:, :n_zero]
    dark = comp[:, n_zero:]

    a_matrix = np.vstack([adjoint(dark), adjoint(a_kets)])
    b_matrix = adjoint(b_kets)
    return MSDecomposition(
        v=v,
        a_matrix=a_matrix,
        b_matrix=b_matrix,
        lambdas=lambdas,
        n_dark=(n_a - n_b) + n_zero,
    )


def pattern_residual(dec):
    """``|A V B^dag - pattern(lambdas)|_F``."""
    return fro(dec.a_matrix @ dec.v @ adjoint(dec.b_matrix) - pattern(dec.lambdas, dec.n_a))


def ms_hamiltonian(dec, delta, f=1.0):
    """MS-basis Hamiltonian for pulse value ``f`` and common detuning ``delta``.

    Pair ``n`` couples state ``n_a - n_b + n`` with state ``n_a + n`` by
    ``lambda_n * f``; the b-diagonal carries ``delta``.
    """
    n_a, n_b = dec.n_a, dec.n_b
    n = n_a + n_b
    h = np.zeros((n, n), dtype=np.complex128)
    rows = np.arange(n_a - n_b, n_a)
    cols = np.arange(n_a, n)
    h[rows, cols] = dec.lambdas * f
    h[cols, rows] = dec.lambdas * f
    h[cols, cols] = delta
    return h


@dataclass(frozen=True)
class Nb2ClosedForm:
    lambda_plus: float
    lambda_minus: float
    theta: float
    sigma: float
    b0_matrix: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    v: np.ndarray


def inner(x, y):
    """``<x|y>`` with the first argument conjugated."""
    return complex(np.vdot(x, y))


def b0_from_angles(theta, sigma):
    e = np.exp(-1j * sigma)
    return np.array(
        [[e * np.sin(theta), np.cos(theta)], [e * np.cos(theta), -np.sin(theta)]],
        dtype=np.complex128,
    )


def nb2_closed_form(v):
    """Closed-form MS data for two excited states.

    ``tan 2 theta = 2 |<O'|O''>| / (|O''|^2 - |O'|^2)`` with the branch
    ``0 <= 2 theta <= pi`` picked so that ``sqrt(D)`` is nonnegative, and
    ``sigma = arg <O'|O''>``.
    """
    v = as_matrix(v)
    if v.shape[1] != 2:
        raise ShapeError(f"closed form needs exactly two columns, got {v.shape[1]}")
    if v.shape[0] < 2:
        raise PreconditionError("closed form needs n_a >= 2")
    o1, o2 = v[:, 0], v[:, 1]
    p = float(np.vdot(o1, o1).real)
    q = float(np.vdot(o2, o2).real)
    g = inner(o1, o2)
    scale = max(p + q, 1e-300)
    if abs(g) <= 1e-14 * scale and abs(q - p) <= 1e-14 * scale:
        raise DegenerateClosedFormError(
            "|O'|^2 == |O''|^2 and <O'|O''> == 0: mixing angle undefined, use decompose()"
        )
    theta = 0.5 * np.arctan2(2.0 * abs(g), q - p)
    sigma = float(np.angle(g)) if abs(g) > 0 else 0.0
    disc = (p - q) ** 2 + 4.0 * abs(g) ** 2
    lp2 = 0.5 * (p + q + np.sqrt(disc))
    lm2 = 0.5 * (p + q - np.sqrt(disc))
    lp = float(np.sqrt(max(lp2, 0.0)))
    lm = float(np.sqrt(max(lm2, 0.0)))
    b_plus = np.array([np.exp(1j * sigma) * np.sin(theta), np.cos(theta)])
    b_minus = np.array([np.exp(1j * sigma) * np.cos(theta), -np.sin(theta)])
    a_plus = v @ b_plus / lp if lp > 0 else np.zeros(v.shape[0], dtype=np.complex128)
    a_minus = v @ b_minus / lm if lm > DARK_RTOL * max(1.0, scale) else np.zeros(
        v.shape[0], dtype=np.complex128
    )
    return Nb2ClosedForm(
        lambda_plus=lp,
        lambda_minus=lm,
        theta=float(theta),
        sigma=sigma,
        b0_matrix=b0_from_angles(theta, sigma),
        b_plus=b_plus,
        b_minus=b_minus,
        a_plus=a_plus,
        a_minus=a_minus,
        v=v,
    )


def discriminant(v):
    """Both forms of the discriminant: the direct one and ``(p - q)^2 / cos^2 2theta``."""
    v = as_matrix(v)
    o1, o2 = v[:, 0], v[:, 1]
    p = float(np.vdot(o1, o1).real)
    q = float(np.vdot(o2, o2).real)
    g = inner(o1, o2)
    direct = (p - q) ** 2 + 4.0 * abs(g) ** 2
    theta = 0.5 * np.arctan2(2.0 * abs(g), q - p)
    c2 = np.cos(2 * theta) ** 2
    angular = (p - q) ** 2 / c2 if c2 > 1e-14 else float("nan")
    return direct, angular
