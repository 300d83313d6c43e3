"""Perturbative MS transformation for slightly unequal excited-state detunings.

The Hamiltonian is ``H0 + eps * D`` with ``D = diag(0, .., 0, d_1, .., d_Nb)``.
The transformation is expanded as ``S = S0 + eps S1 + eps^2 S2`` with
constant block-diagonal terms. ``S1`` is chosen so that the order-eps part of
``S H S^dag``,

    T1 = S1 H0 S0^dag + S0 H0 S1^dag + S0 D S0^dag,

has no entries outside the MS two-state pattern. Entries on the pattern
survive as first-order shifts of each pair's detuning and coupling. The
order-eps^2 part is treated the same way to get ``S2``.

Every solve is done at a reference point (pulse value 1, constant detuning
``delta_ref``, perturbation shape 1). The equations are real-linear in the
unknown blocks, so they are vectorized over real and imaginary parts and
solved by SVD. The off-pattern equations are satisfied first; the remaining
freedom is spent on making ``S`` as close to unitary as possible, and what is
left after that is fixed by minimum norm.
"""
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.integrate import simpson

from .assemble import PropagatorMatrix
from .errors import ConvergenceError, PreconditionError, ShapeError
from .linalg import adjoint, fro
from .model import absorb_uniform_shift
from .mstransform import MSDecomposition, b0_from_angles, decompose
from .twostate import choose_method, propagate_two_state_grid


@dataclass(frozen=True)
class BlockPair:
    """Block-diagonal matrix ``diag(a, b)``."""

    a: np.ndarray
    b: np.ndarray

    def full(self):
        n_a, n_b = self.a.shape[0], self.b.shape[0]
        out = np.zeros((n_a + n_b, n_a + n_b), dtype=np.complex128)
        out[:n_a, :n_a] = self.a
        out[n_a:, n_a:] = self.b
        return out

    @classmethod
    def zeros(cls, n_a, n_b):
        return cls(np.zeros((n_a, n_a), dtype=np.complex128), np.zeros((n_b, n_b), dtype=np.complex128))

    def to_real(self):
        a, b = self.a.ravel(), self.b.ravel()
        return np.concatenate([a.real, a.imag, b.real, b.imag])

    @classmethod
    def from_real(cls, x, n_a, n_b):
        na2, nb2 = n_a * n_a, n_b * n_b
        a = x[:na2] + 1j * x[na2 : 2 * na2]
        b = x[2 * na2 : 2 * na2 + nb2] + 1j * x[2 * na2 + nb2 :]
        return cls(a.reshape(n_a, n_a), b.reshape(n_b, n_b))


@dataclass(frozen=True)
class PatternProjector:
    """Mask of the MS two-state pattern, with free diagonal entries on the b-block.

    On-pattern: the coupling of pair ``n`` (row ``n_a - n_b + n``, column
    ``n_a + n`` and its mirror) and the b-diagonal entry ``n_a + n``.
    """

    n_a: int
    n_b: int

    @property
    def mask(self):
        n = self.n_a + self.n_b
        m = np.zeros((n, n), dtype=bool)
        rows = np.arange(self.n_a - self.n_b, self.n_a)
        cols = np.arange(self.n_a, n)
        m[rows, cols] = True
        m[cols, rows] = True
        m[cols, cols] = True
        return m

    def on(self, x):
        return np.where(self.mask, x, 0.0)

    def off(self, x):
        return np.where(self.mask, 0.0, x)

    def off_vector(self, x):
        """Off-pattern entries as a real vector whose 2-norm is ``|off(x)|_F``."""
        vals = np.asarray(x)[~self.mask]
        return np.concatenate([vals.real, vals.imag])


def reference_h0(dec, delta_ref):
    """Unperturbed Hamiltonian at unit pulse value and detuning ``delta_ref``."""
    n_a, n = dec.n_a, dec.dim
    h = np.zeros((n, n), dtype=np.complex128)
    h[:n_a, n_a:] = dec.v
    h[n_a:, :n_a] = adjoint(dec.v)
    h[n_a:, n_a:] = delta_ref * np.eye(dec.n_b)
    return h


def perturbation_matrix(dec, d_diag):
    d = np.asarray(d_diag, dtype=float)
    if d.shape != (dec.n_b,):
        raise ShapeError(f"d_diag must have length {dec.n_b}, got shape {d.shape}")
    return np.diag(np.concatenate([np.zeros(dec.n_a), d])).astype(np.complex128)


def _as_full(s):
    return s.full() if isinstance(s, BlockPair) else np.asarray(s, dtype=np.complex128)


def first_order_term(dec, d_diag, s1, delta_ref):
    """``S1 H0 S0^dag + S0 H0 S1^dag + S0 D S0^dag`` at the reference point."""
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    x = _as_full(s1)
    d = perturbation_matrix(dec, d_diag)
    return x @ h0 @ adjoint(s0) + s0 @ h0 @ adjoint(x) + s0 @ d @ adjoint(s0)


def second_order_term(dec, d_diag, s1, s2, delta_ref):
    """Exact order-eps^2 coefficient of ``S (H0 + eps D) S^dag``."""
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    x1, x2 = _as_full(s1), _as_full(s2)
    d = perturbation_matrix(dec, d_diag)
    return (
        s0 @ d @ adjoint(x1)
        + x1 @ d @ adjoint(s0)
        + s0 @ h0 @ adjoint(x2)
        + x2 @ h0 @ adjoint(s0)
        + x1 @ h0 @ adjoint(x1)
    )


def variant_second_order_term(dec, d_diag, s1, s2, delta_ref):
    """Variant order-eps^2 bracket with ``S2 H0 S2^dag`` in place of ``S2 H0 S0^dag``.

    Not a consistent expansion term; kept only as a diagnostic next to
    :func:`second_order_term`.
    """
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    x1, x2 = _as_full(s1), _as_full(s2)
    d = perturbation_matrix(dec, d_diag)
    return (
        s0 @ d @ adjoint(x1)
        + x1 @ d @ adjoint(s0)
        + s0 @ h0 @ adjoint(x2)
        + x1 @ h0 @ adjoint(x1)
        + x2 @ h0 @ adjoint(x2)
    )


def _linear_columns(fn, n_a, n_b):
    """Columns of the real matrix of a real-linear map on block pairs."""
    size = 2 * (n_a * n_a + n_b * n_b)
    cols = []
    for k in range(size):
        e = np.zeros(size)
        e[k] = 1.0
        cols.append(fn(BlockPair.from_real(e, n_a, n_b)))
    return np.column_stack(cols)


def _lexicographic_solve(m, r, q, u, rcond=1e-12):
    """Solve ``m x = r`` in the least-squares sense, then among all minimizers
    minimize ``|q x - u|``, then the norm of ``x``."""
    uu, sv, vt = np.linalg.svd(m, full_matrices=True)
    rank = int(np.sum(sv > rcond * sv[0])) if sv.size and sv[0] > 0 else 0
    x_p = vt[:rank].T @ ((uu[:, :rank].T @ r) / sv[:rank])
    null = vt[rank:].T
    if null.shape[1] and q is not None:
        z, *_ = np.linalg.lstsq(q @ null, u - q @ x_p, rcond=None)
        x = x_p + null @ z
    else:
        x = x_p
    return x, rank


@dataclass(frozen=True)
class OrderSolution:
    """One term of the S-series together with its diagnostics."""

    s: BlockPair
    residual: float
    term: np.ndarray
    level_shifts: np.ndarray
    coupling_shifts: np.ndarray
    unitarity_defect: float
    rank: int
    n_unknowns: int

    @property
    def underdetermined(self):
        return self.rank < self.n_unknowns


def _pair_entries(dec, term):
    n_a, n_b = dec.n_a, dec.n_b
    rows = np.arange(n_a - n_b, n_a)
    cols = np.arange(n_a, n_a + n_b)
    return term[cols, cols].real.copy(), term[rows, cols].copy()


def _solve_order(dec, rhs, unitarity_target, delta_ref):
    """Solve ``P_off(X H0 S0^dag + S0 H0 X^dag + rhs) = 0`` for block pair ``X``."""
    n_a, n_b = dec.n_a, dec.n_b
    proj = PatternProjector(n_a, n_b)
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    right = h0 @ adjoint(s0)
    left = s0 @ h0

    def lin(x):
        xf = x.full()
        return proj.off_vector(xf @ right + left @ adjoint(xf))

    def unit(x):
        xf = x.full()
        g = s0 @ adjoint(xf) + xf @ adjoint(s0)
        return np.concatenate([g.real.ravel(), g.imag.ravel()])

    m = _linear_columns(lin, n_a, n_b)
    q = _linear_columns(unit, n_a, n_b)
    r = -proj.off_vector(rhs)
    u = np.concatenate([unitarity_target.real.ravel(), unitarity_target.imag.ravel()])
    x, rank = _lexicographic_solve(m, r, q, u)
    return BlockPair.from_real(x, n_a, n_b), rank, m.shape[1], (m, r)


def solve_s1(dec, d_diag, delta_ref, inverse_detuning_form=False):
    """First-order correction ``S1``.

    With ``inverse_detuning_form`` the inverse-detuning form of the b-block equation is
    also evaluated as a diagnostic, which needs ``delta_ref != 0``.
    """
    if inverse_detuning_form and delta_ref == 0:
        raise PreconditionError("the inverse-detuning form needs a nonzero reference detuning")
    n = dec.dim
    d = perturbation_matrix(dec, d_diag)
    s0 = dec.s_matrix()
    rhs = s0 @ d @ adjoint(s0)
    s1, rank, n_unknowns, _ = _solve_order(dec, rhs, np.zeros((n, n)), delta_ref)
    term = first_order_term(dec, d_diag, s1, delta_ref)
    proj = PatternProjector(dec.n_a, dec.n_b)
    shifts, couplings = _pair_entries(dec, term)
    g = s0 @ adjoint(s1.full()) + s1.full() @ adjoint(s0)
    sol = OrderSolution(
        s=s1,
        residual=fro(proj.off(term)),
        term=term,
        level_shifts=shifts,
        coupling_shifts=couplings,
        unitarity_defect=fro(g),
        rank=rank,
        n_unknowns=n_unknowns,
    )
    if inverse_detuning_form:
        return sol, inverse_detuning_defect(dec, s1, d_diag, delta_ref)
    return sol


def s1_linear_system(dec, d_diag, delta_ref):
    """The vectorized real system ``M x = r`` whose least-squares solutions
    cancel the off-pattern first-order term."""
    n = dec.dim
    s0 = dec.s_matrix()
    rhs = s0 @ perturbation_matrix(dec, d_diag) @ adjoint(s0)
    _, _, _, (m, r) = _solve_order(dec, rhs, np.zeros((n, n)), delta_ref)
    return m, r


def inverse_detuning_defect(dec, s1, d_diag, delta_ref):
    """``|B0^dag B1 + B1^dag B0 + Delta^-1 D|_F`` -- the inverse-detuning b-block equation."""
    if delta_ref == 0:
        raise PreconditionError("the inverse-detuning form needs a nonzero reference detuning")
    b0, b1 = dec.b_matrix, s1.b
    d = np.diag(np.asarray(d_diag, dtype=float))
    return fro(adjoint(b0) @ b1 + adjoint(b1) @ b0 + d / delta_ref)


def adjoint_pair_check(dec, s1):
    """Compare the coupling-block equation with its conjugate partner.

    Returns ``(|line1^dag - line2|, |off(line1)|, |off(line2)|)`` where
    ``line1 = A1 V B0^dag + A0 V B1^dag`` and
    ``line2 = B1 V^dag A0^dag + B0 V^dag A1^dag``.
    """
    v = dec.v
    a0, b0, a1, b1 = dec.a_matrix, dec.b_matrix, s1.a, s1.b
    line1 = a1 @ v @ adjoint(b0) + a0 @ v @ adjoint(b1)
    line2 = b1 @ adjoint(v) @ adjoint(a0) + b0 @ adjoint(v) @ adjoint(a1)
    keep = np.zeros((dec.n_a, dec.n_b), dtype=bool)
    keep[np.arange(dec.n_a - dec.n_b, dec.n_a), np.arange(dec.n_b)] = True
    off1 = fro(np.where(keep, 0.0, line1))
    off2 = fro(np.where(keep.T, 0.0, line2))
    return fro(adjoint(line1) - line2), off1, off2


def solve_s2(dec, d_diag, s1, delta_ref):
    """Second-order correction ``S2`` given ``S1``.

    The residual is reported on the exact order-eps^2 coefficient.
    """
    s1 = s1.s if isinstance(s1, OrderSolution) else s1
    d = perturbation_matrix(dec, d_diag)
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    x1 = s1.full()
    rhs = s0 @ d @ adjoint(x1) + x1 @ d @ adjoint(s0) + x1 @ h0 @ adjoint(x1)
    s2, rank, n_unknowns, _ = _solve_order(dec, rhs, -(x1 @ adjoint(x1)), delta_ref)
    term = second_order_term(dec, d_diag, s1, s2, delta_ref)
    proj = PatternProjector(dec.n_a, dec.n_b)
    shifts, couplings = _pair_entries(dec, term)
    x2 = s2.full()
    g = s0 @ adjoint(x2) + x2 @ adjoint(s0) + x1 @ adjoint(x1)
    return OrderSolution(
        s=s2,
        residual=fro(proj.off(term)),
        term=term,
        level_shifts=shifts,
        coupling_shifts=couplings,
        unitarity_defect=fro(g),
        rank=rank,
        n_unknowns=n_unknowns,
    )


@dataclass(frozen=True)
class PerturbationSeries:
    s0: BlockPair
    s1: BlockPair
    s2: BlockPair
    residual_1: float
    residual_2: float
    residual_2_variant: float
    level_shifts: np.ndarray
    unitarity_defect_1: float
    delta_ref: float

    def transformation(self, eps, order=2):
        s = self.s0.full()
        if order >= 1:
            s = s + eps * self.s1.full()
        if order >= 2:
            s = s + eps**2 * self.s2.full()
        return s


def perturbation_series(dec, d_diag, delta_ref):
    first = solve_s1(dec, d_diag, delta_ref)
    second = solve_s2(dec, d_diag, first, delta_ref)
    variant = variant_second_order_term(dec, d_diag, first.s, second.s, delta_ref)
    proj = PatternProjector(dec.n_a, dec.n_b)
    return PerturbationSeries(
        s0=BlockPair(dec.a_matrix, dec.b_matrix),
        s1=first.s,
        s2=second.s,
        residual_1=first.residual,
        residual_2=second.residual,
        residual_2_variant=fro(proj.off(variant)),
        level_shifts=first.level_shifts,
        unitarity_defect_1=first.unitarity_defect,
        delta_ref=delta_ref,
    )


def transformed_hamiltonian(dec, d_diag, series, eps, order=2):
    """``S (H0 + eps D) S^dag`` at the reference point, with the series truncated at ``order``."""
    h = reference_h0(dec, series.delta_ref) + eps * perturbation_matrix(dec, d_diag)
    s = series.transformation(eps, order)
    return s @ h @ adjoint(s)


def off_pattern_norm(dec, m):
    return fro(PatternProjector(dec.n_a, dec.n_b).off(m))


# -- time-dependent first-order propagation --------------------------------


def _ms_grid(dec, detuning, pulse, times, tol):
    """MS-basis unperturbed propagators ``U0(times[k], times[0])``."""
    method = choose_method(detuning, pulse)
    n_a, n_b, n = dec.n_a, dec.n_b, dec.dim
    out = np.broadcast_to(np.eye(n, dtype=np.complex128), (times.size, n, n)).copy()
    for k, lam in enumerate(dec.lambdas):
        cks = propagate_two_state_grid(float(lam), detuning, pulse, times, method=method, tol=tol)
        i, j = n_a - n_b + k, n_a + k
        mats = np.array([ck.matrix() for ck in cks])
        out[:, i, i] = mats[:, 0, 0]
        out[:, i, j] = mats[:, 0, 1]
        out[:, j, i] = mats[:, 1, 0]
        out[:, j, j] = mats[:, 1, 1]
    return out


def zeroth_order(spec, t_i, t_f, dec=None, tol=1e-11):
    """Diabatic MS propagator ignoring the traceless part of the perturbation."""
    shifted = absorb_uniform_shift(spec)
    dec = dec if dec is not None else decompose(shifted.chi)
    u = _ms_grid(dec, shifted.delta, shifted.pulse, np.array([t_i, t_f], dtype=float), tol)[-1]
    s = dec.s_matrix()
    return PropagatorMatrix(adjoint(s) @ u @ s, "diabatic", t_i, t_f)


def dyson_first_order(dec, spec, t_i, t_f, grid=1024, tol=1e-11):
    """First-order time-dependent perturbation theory around the MS solution.

    ``U = U0(t_f) [1 - i eps int U0(s)^dag W U0(s) g(s) ds]`` in the MS basis
    with ``W = S0 diag(0, d') S0^dag`` and ``d'`` the traceless part of the
    perturbation (its mean is absorbed exactly into the detuning of ``U0``).
    The integral uses Simpson's rule on ``grid`` intervals.
    """
    if grid < 64:
        raise PreconditionError("grid must have at least 64 intervals")
    grid += grid % 2
    shifted = absorb_uniform_shift(spec)
    dec = dec if dec is not None else decompose(shifted.chi)
    if spec.epsilon == 0.0 or not np.any(shifted.d_diag):
        # nothing left to expand in: the zeroth-order propagator is exact
        return zeroth_order(spec, t_i, t_f, dec, tol)
    times = np.linspace(t_i, t_f, grid + 1)
    u0 = _ms_grid(dec, shifted.delta, shifted.pulse, times, tol)
    s = dec.s_matrix()
    n = dec.dim
    w = s @ perturbation_matrix(dec, shifted.d_diag) @ adjoint(s)
    g = spec.d_shape(times)
    integrand = np.conj(np.transpose(u0, (0, 2, 1))) @ w @ u0 * g[:, None, None]
    integral = simpson(integrand, x=times, axis=0)
    um = u0[-1] @ (np.eye(n) - 1j * spec.epsilon * integral)
    return PropagatorMatrix(adjoint(s) @ um @ s, "diabatic", t_i, t_f)


# -- N_b = 2 ansatz ----------------------------------------------------------


def decomposition_from_closed_form(closed):
    """MS decomposition whose blocks are the closed-form ``A0``, ``B0``."""
    v = closed.v
    n_a = v.shape[0]
    a_kets = np.column_stack([closed.a_plus, closed.a_minus])
    full, _ = np.linalg.qr(np.hstack([a_kets, np.eye(n_a, dtype=np.complex128)]))
    dark = full[:, 2:n_a]
    dark = dark - a_kets @ (adjoint(a_kets) @ dark)
    if dark.shape[1]:
        dark, _ = np.linalg.qr(dark)
    a_matrix = np.vstack([adjoint(dark), adjoint(a_kets)])
    lambdas = np.array([closed.lambda_plus, closed.lambda_minus])
    n_dark = (n_a - 2) + int(closed.lambda_minus == 0.0)
    return MSDecomposition(v=v, a_matrix=a_matrix, b_matrix=closed.b0_matrix, lambdas=lambdas, n_dark=n_dark)


@dataclass(frozen=True)
class B1Result:
    theta_1: float
    sigma_1: float
    residual: float
    unconstrained_residual: float


def _ansatz_residual_fn(dec, d_diag, delta_ref):
    """Residual of the first-order equation for a given B1, minimized over A1."""
    n_a, n_b = dec.n_a, dec.n_b
    proj = PatternProjector(n_a, n_b)
    h0 = reference_h0(dec, delta_ref)
    s0 = dec.s_matrix()
    right = h0 @ adjoint(s0)
    left = s0 @ h0
    base = s0 @ perturbation_matrix(dec, d_diag) @ adjoint(s0)

    def lin_a(x):
        xf = x.full()
        return proj.off_vector(xf @ right + left @ adjoint(xf))

    # columns for the A1 unknowns only
    m_full = _linear_columns(lin_a, n_a, n_b)
    na2 = n_a * n_a
    m_a = m_full[:, : 2 * na2]

    def residual(angles):
        b1 = b0_from_angles(angles[0], angles[1])
        xb = BlockPair(np.zeros((n_a, n_a), dtype=np.complex128), b1).full()
        fixed = xb @ right + left @ adjoint(xb) + base
        r = -proj.off_vector(fixed)
        _, res = _lstsq(m_a, r)
        return res

    return residual


def _lstsq(m, r):
    x, *_ = np.linalg.lstsq(m, r, rcond=None)
    return x, float(np.linalg.norm(m @ x - r))


def nb2_b1(closed, d_diag, delta_ref, grid=24):
    """Best ``(theta_1, sigma_1)`` for the unitary B1 ansatz.

    ``A1`` is unconstrained and eliminated by least squares; the two angles
    are found by a grid scan refined with Nelder-Mead. The unconstrained
    :func:`solve_s1` residual is returned alongside for comparison.
    """
    d = np.asarray(d_diag, dtype=float)
    if d.shape != (2,):
        raise ShapeError("the B1 ansatz needs exactly two excited states")
    if not np.any(d):
        return B1Result(0.0, 0.0, 0.0, 0.0)
    dec = decomposition_from_closed_form(closed)
    unconstrained = solve_s1(dec, d, delta_ref).residual
    fn = _ansatz_residual_fn(dec, d, delta_ref)
    thetas = np.linspace(0.0, np.pi, grid, endpoint=False)
    sigmas = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    best = min(((fn((th, sg)), th, sg) for th in thetas for sg in sigmas), key=lambda x: x[0])
    res = optimize.minimize(
        fn,
        x0=np.array(best[1:]),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
    )
    if not res.success and res.fun > best[0]:
        raise ConvergenceError(
            f"B1 angle search did not converge: {res.message}",
            estimate=best[0],
            report=B1Result(best[1], best[2], best[0], unconstrained),
        )
    theta, sigma = float(res.x[0]), float(np.angle(np.exp(1j * res.x[1])))
    value = float(min(res.fun, best[0]))
    if res.fun > best[0]:
        theta, sigma = best[1], best[2]
    return B1Result(theta, sigma, value, unconstrained)
