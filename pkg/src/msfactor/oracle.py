"""Brute-force reference solutions.

``integrate_full`` solves ``i dC/dt = H(t) C`` for the full system without
using any MS structure; ``charpoly_eigs`` gets eigenvalues of tiny Hermitian
matrices from the roots of their characteristic polynomial.
"""
from dataclasses import dataclass

import numpy as np

from .assemble import PropagatorMatrix
from .errors import ConvergenceError, PreconditionError, ShapeError
from .linalg import adjoint, as_matrix, fro, require_hermitian
from .model import hamiltonian_batch

MAX_STEPS = 2**22
_CHUNK = 4096


@dataclass(frozen=True)
class IntegrationReport:
    propagator: PropagatorMatrix
    steps: int
    est_error: float
    unitarity_defect: float


def rk4_propagator(spec, t_i, t_f, n_steps, include_perturbation=False):
    """Classical RK4 with ``n_steps`` equal steps, applied to the identity.

    Every column of the identity is advanced as its own state vector; the
    matrix form simply advances all of them in one product.
    """
    n = spec.dim
    c = np.eye(n, dtype=np.complex128)
    h = (t_f - t_i) / n_steps
    for lo in range(0, n_steps, _CHUNK):
        k = np.arange(lo, min(lo + _CHUNK, n_steps))
        t0 = t_i + h * k
        h0 = -1j * hamiltonian_batch(spec, t0, include_perturbation)
        hm = -1j * hamiltonian_batch(spec, t0 + 0.5 * h, include_perturbation)
        h1 = -1j * hamiltonian_batch(spec, t0 + h, include_perturbation)
        for a0, am, a1 in zip(h0, hm, h1):
            k1 = a0 @ c
            k2 = am @ (c + 0.5 * h * k1)
            k3 = am @ (c + 0.5 * h * k2)
            k4 = a1 @ (c + h * k3)
            c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return c


def _initial_steps(spec, t_i, t_f, include_perturbation):
    probe = hamiltonian_batch(spec, np.linspace(t_i, t_f, 129), include_perturbation)
    rate = float(np.max(np.linalg.norm(probe, ord=2, axis=(1, 2)))) + 1e-12
    return max(16, int(np.ceil((t_f - t_i) * rate / 0.25)))


def integrate_full(spec, t_i, t_f, tol=1e-9, include_perturbation=False, max_steps=None):
    """Propagator of the full Hamiltonian with step doubling until the
    Richardson error estimate ``|U_2N - U_N| / 15`` drops below ``tol``."""
    if not 1e-12 <= tol <= 1e-4:
        raise PreconditionError(f"tol must lie in [1e-12, 1e-4], got {tol}")
    if t_f < t_i:
        raise PreconditionError("t_f must not precede t_i")
    max_steps = MAX_STEPS if max_steps is None else max_steps
    n = spec.dim
    if t_f == t_i:
        p = PropagatorMatrix(np.eye(n, dtype=np.complex128), "diabatic", t_i, t_f)
        return IntegrationReport(p, 0, 0.0, 0.0)
    steps = _initial_steps(spec, t_i, t_f, include_perturbation)
    if 2 * steps > max_steps:
        raise ConvergenceError(f"oracle needs more than {max_steps} steps for tol={tol:g}", estimate=np.inf)
    coarse = rk4_propagator(spec, t_i, t_f, steps, include_perturbation)
    est = np.inf
    while True:
        if 2 * steps > max_steps:
            p = PropagatorMatrix(coarse, "diabatic", t_i, t_f)
            defect = fro(coarse @ adjoint(coarse) - np.eye(n))
            raise ConvergenceError(
                f"oracle needs more than {max_steps} steps for tol={tol:g}",
                estimate=est,
                report=IntegrationReport(p, steps, est, defect),
            )
        steps *= 2
        fine = rk4_propagator(spec, t_i, t_f, steps, include_perturbation)
        est = fro(fine - coarse) / 15.0
        if est <= tol:
            break
        coarse = fine
    defect = fro(fine @ adjoint(fine) - np.eye(n))
    p = PropagatorMatrix(fine, "diabatic", t_i, t_f)
    return IntegrationReport(p, steps, est, defect)


def integrate_grid(spec, times, tol=1e-9, include_perturbation=False):
    """Propagators ``U(times[k], times[0])`` built interval by interval."""
    times = np.asarray(times, dtype=float)
    n = spec.dim
    out = np.empty((times.size, n, n), dtype=np.complex128)
    u = np.eye(n, dtype=np.complex128)
    out[0] = u
    worst = 0.0
    for k in range(times.size - 1):
        rep = integrate_full(spec, times[k], times[k + 1], tol, include_perturbation)
        u = rep.propagator.matrix @ u
        worst += rep.est_error
        out[k + 1] = u
    return out, worst


def charpoly_eigs(m):
    """Eigenvalues (descending) of a Hermitian matrix with n <= 3, in closed form.

    n = 3 uses the trigonometric solution of the depressed cubic.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if n > 3:
        raise ShapeError(f"closed-form eigenvalues only for n <= 3, got n={n}")
    require_hermitian(a)
    if n == 1:
        return np.array([a[0, 0].real])
    if n == 2:
        p, q = a[0, 0].real, a[1, 1].real
        g = abs(a[0, 1])
        mean = 0.5 * (p + q)
        r = np.hypot(0.5 * (p - q), g)
        return np.array([mean + r, mean - r])
    d = np.real(np.diag(a))
    q = d.sum() / 3.0
    off2 = abs(a[0, 1]) ** 2 + abs(a[0, 2]) ** 2 + abs(a[1, 2]) ** 2
    p2 = ((d - q) ** 2).sum() + 2.0 * off2
    if p2 == 0.0:
        return np.array([q, q, q])
    p = np.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    ).real
    r = np.clip(0.5 * det_b, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    e1 = q + 2.0 * p * np.cos(phi)
    e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.sort(np.array([e1, e2, e3]))[::-1]
