"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. The Hermitian eigensolver is a
cyclic complex Jacobi iteration, which is robust and certifiably orthonormal
at the small sizes met here (a few tens of states at most).
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, NotHermitianError, ShapeError

HERMITIAN_RTOL = 1e-12


def as_matrix(m):
    """Return ``m`` as a 2-D complex128 array (copying only if needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def adjoint(m):
    return np.conj(np.asarray(m)).T


def fro(m):
    return float(np.linalg.norm(m))


def _require_square(a, what="matrix"):
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{what} must be square, got shape {a.shape}")


def require_hermitian(a, rtol=HERMITIAN_RTOL):
    _require_square(a)
    scale = max(fro(a), 1.0e-300)
    defect = fro(a - adjoint(a))
    if defect > rtol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: |M - M^dag| = {defect:.3e} > {rtol:g}*|M|"
        )


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues sorted descending; column ``k`` of ``vectors`` pairs with ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


def _fix_phases(vecs):
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return vecs / phases


def hermitian_eig(m, max_sweeps=60):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies a real Jacobi rotation, so the working matrix stays Hermitian and
    the accumulated transform stays unitary to rounding.
    """
    a = as_matrix(m).copy()
    require_hermitian(a)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = fro(a)
    if n == 0:
        return EigenResult(np.zeros(0), v)
    a = 0.5 * (a + adjoint(a))  # rounding-level only; input already checked
    sweeps = 0
    tiny = np.finfo(float).tiny
    for sweeps in range(1, max_sweeps + 1):
        off = fro(a - np.diag(np.diag(a)))
        if off <= 1e-15 * scale or off <= tiny:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-18 * scale or mag <= tiny:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # J = Phi @ R with Phi = diag(.., conj(phase) at q, ..)
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = adjoint(rot) @ a[cols, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, cols] = v[:, cols] @ rot
    else:
        off = fro(a - np.diag(np.diag(a)))
        if off > 1e-12 * scale:
            raise ConvergenceError("Jacobi iteration did not converge", estimate=off)
    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return EigenResult(values[order], _fix_phases(v[:, order]), sweeps)


def solve_least_squares(a, b):
    """Minimum-norm least-squares solution of ``a x = b``.

    Returns ``(x, residual)`` with ``residual = |a x - b|_2``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"coefficient matrix must be 2-D and non-empty, got {a.shape}")
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise ShapeError(f"right-hand side of length {b.shape} does not match {a.shape}")
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x, float(np.linalg.norm(a @ x - b))


def matrix_exp(m, scale=1.0):
    """``exp(-i * scale * m)``, the propagator of a constant Hamiltonian ``m``."""
    a = as_matrix(m)
    _require_square(a)
    return scipy.linalg.expm(-1j * scale * a)


def random_unitary(n, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n, rng, scale=1.0):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (z + adjoint(z))
