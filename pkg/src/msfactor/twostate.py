"""Propagators of the independent MS two-state systems.

Each pair evolves under ``H_n(t) = [[0, lambda f(t)], [lambda f(t), Delta(t)]]``.
The propagator is stored in Cayley-Klein form; because ``H_n`` is not
traceless its determinant is ``exp(-i phase)`` with ``phase = int Delta dt``,
so the full 2x2 matrix is::

    [[alpha, -conj(beta) * exp(-i phase)],
     [beta,   conj(alpha) * exp(-i phase)]]

``alpha`` and ``beta`` are the first column, i.e. the amplitudes reached
from the ground MS state, and ``|alpha|^2 + |beta|^2 = 1``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .linalg import matrix_exp

METHODS = ("analytic-resonant", "analytic-constant", "numeric")
MAX_STEPS = 2**22
UNITARITY_DRIFT_LIMIT = 1e-8
_CHUNK = 65536


@dataclass(frozen=True)
class CayleyKlein:
    alpha: complex
    beta: complex
    t_i: float
    t_f: float
    phase: float = 0.0

    def matrix(self):
        ph = np.exp(-1j * self.phase)
        return np.array(
            [
                [self.alpha, -np.conj(self.beta) * ph],
                [self.beta, np.conj(self.alpha) * ph],
            ],
            dtype=np.complex128,
        )

    @property
    def norm_defect(self):
        return abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0)

    @classmethod
    def from_matrix(cls, u, t_i, t_f, check=True):
        """Extract (alpha, beta, phase) from a numerically obtained 2x2 propagator."""
        u = np.asarray(u, dtype=np.complex128)
        alpha, beta = complex(u[0, 0]), complex(u[1, 0])
        norm2 = abs(alpha) ** 2 + abs(beta) ** 2
        if check and abs(norm2 - 1.0) > UNITARITY_DRIFT_LIMIT:
            raise ConvergenceError(
                f"two-state propagator drifted from unitarity by {abs(norm2 - 1.0):.3e}",
                estimate=abs(norm2 - 1.0),
            )
        scale = 1.0 / np.sqrt(norm2)
        phase = -float(np.angle(np.linalg.det(u)))
        return cls(alpha * scale, beta * scale, float(t_i), float(t_f), phase)


def two_state_hamiltonian(lam, delta_value, f_value):
    c = lam * f_value
    return np.array([[0.0, c], [c, delta_value]], dtype=np.complex128)


def _hamiltonians(lam, delta, pulse, times):
    times = np.asarray(times, dtype=float)
    out = np.zeros((times.size, 2, 2), dtype=np.complex128)
    c = lam * pulse(times)
    out[:, 0, 1] = c
    out[:, 1, 0] = c
    out[:, 1, 1] = delta(times)
    return out


def rk4_grid(lam, delta, pulse, grid, substeps):
    """Fixed-step RK4 propagators ``U(grid[k], grid[0])`` for every grid point.

    Each grid interval is split into ``substeps`` equal steps. Returns an
    array of shape ``(len(grid), 2, 2)``.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.empty((grid.size, 2, 2), dtype=np.complex128)
    u = np.eye(2, dtype=np.complex128)
    out[0] = u
    eye = np.eye(2)
    for k in range(grid.size - 1):
        t0, t1 = grid[k], grid[k + 1]
        h = (t1 - t0) / substeps
        for lo in range(0, substeps, _CHUNK):
            starts = t0 + h * np.arange(lo, min(lo + _CHUNK, substeps))
            m = starts.size
            stage = np.concatenate([starts, starts + 0.5 * h, starts + h])
            hs = -1j * _hamiltonians(lam, delta, pulse, stage)
            a1, a2, a4 = hs[:m], hs[m : 2 * m], hs[2 * m :]
            # one-step RK4 transfer matrices of the linear ODE, built in batch
            k2 = a2 @ (eye + 0.5 * h * a1)
            k3 = a2 @ (eye + 0.5 * h * k2)
            k4 = a4 @ (eye + h * k3)
            steps = eye + (h / 6.0) * (a1 + 2.0 * k2 + 2.0 * k3 + k4)
            for step in steps:
                u = step @ u
        out[k + 1] = u
    return out


def _initial_substeps(lam, delta, pulse, t_i, t_f, n_intervals):
    probe = np.linspace(t_i, t_f, 257)
    rate = np.max(np.abs(lam * pulse(probe))) + np.max(np.abs(delta(probe))) + 1e-12
    total = max(16, int(np.ceil((t_f - t_i) * rate / 0.25)))
    return max(1, int(np.ceil(total / n_intervals)))


def propagate_grid(lam, delta, pulse, grid, tol=1e-11):
    """Propagators at every grid point, refined by step doubling until the
    Richardson estimate at all grid points is below ``tol``.

    Returns ``(propagators, estimate, total_steps)``.
    """
    grid = np.asarray(grid, dtype=float)
    n_int = grid.size - 1
    if n_int < 1 or grid[-1] == grid[0]:
        return np.broadcast_to(np.eye(2, dtype=np.complex128), (grid.size, 2, 2)).copy(), 0.0, 0
    sub = _initial_substeps(lam, delta, pulse, grid[0], grid[-1], n_int)
    if 2 * sub * n_int > MAX_STEPS:
        raise ConvergenceError(
            f"two-state integration needs more than {MAX_STEPS} steps", estimate=np.inf
        )
    coarse = rk4_grid(lam, delta, pulse, grid, sub)
    est = np.inf
    while True:
        if 2 * sub * n_int > MAX_STEPS:
            raise ConvergenceError(
                f"two-state integration needs more than {MAX_STEPS} steps",
                estimate=est,
                report=coarse,
            )
        sub *= 2
        fine = rk4_grid(lam, delta, pulse, grid, sub)
        est = float(np.max(np.abs(fine - coarse))) / 15.0
        if est <= tol:
            return fine, est, sub * n_int
        coarse = fine


def propagate_two_state(lam, delta, pulse, t_i, t_f, method="numeric", tol=1e-11):
    """Cayley-Klein parameters of the pair propagator over ``[t_i, t_f]``.

    ``analytic-resonant`` needs ``Delta == 0``: the Hamiltonian then commutes
    with itself at all times and ``U = exp(-i lambda A sigma_x)`` with pulse
    area factor ``A``. ``analytic-constant`` needs constant detuning and pulse.
    ``numeric`` is RK4 with step doubling.
    """
    if t_f < t_i:
        raise PreconditionError("t_f must not precede t_i")
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "analytic-resonant":
        if not getattr(delta, "is_zero", False):
            raise PreconditionError("analytic-resonant requires zero detuning")
        area = lam * pulse.integral(t_i, t_f)
        return CayleyKlein(complex(np.cos(area)), complex(-1j * np.sin(area)), t_i, t_f, 0.0)
    if method == "analytic-constant":
        if not (delta.is_constant and pulse.is_constant):
            raise PreconditionError("analytic-constant requires constant detuning and pulse")
        T = t_f - t_i
        omega = lam * float(pulse(t_i))
        d = float(delta(t_i))
        r = np.hypot(omega, 0.5 * d)
        ph = np.exp(-0.5j * d * T)
        if r == 0.0:
            return CayleyKlein(1.0 + 0j, 0j, t_i, t_f, float(d * T))
        s = np.sin(r * T)
        alpha = ph * (np.cos(r * T) + 0.5j * d * s / r)
        beta = ph * (-1j * omega * s / r)
        return CayleyKlein(complex(alpha), complex(beta), t_i, t_f, float(d * T))
    if t_f == t_i:
        return CayleyKlein(1.0 + 0j, 0j, t_i, t_f, 0.0)
    us, _, _ = propagate_grid(lam, delta, pulse, [t_i, t_f], tol=tol)
    return CayleyKlein.from_matrix(us[-1], t_i, t_f)


def propagate_two_state_grid(lam, delta, pulse, times, method="numeric", tol=1e-11):
    """Cayley-Klein parameters from ``times[0]`` to each entry of ``times``."""
    times = np.asarray(times, dtype=float)
    if method == "numeric":
        us, _, _ = propagate_grid(lam, delta, pulse, times, tol=tol)
        return [CayleyKlein.from_matrix(u, times[0], t) for u, t in zip(us, times)]
    return [propagate_two_state(lam, delta, pulse, times[0], t, method) for t in times]


def choose_method(delta, pulse):
    """Cheapest exact method applicable to the given profiles."""
    if getattr(delta, "is_zero", False):
        return "analytic-resonant"
    if delta.is_constant and pulse.is_constant:
        return "analytic-constant"
    return "numeric"


def constant_oracle(lam, delta_value, f_value, T):
    """Reference propagator via the matrix exponential."""
    return matrix_exp(two_state_hamiltonian(lam, delta_value, f_value), T)
