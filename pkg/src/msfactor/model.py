"""Physical system definition and the RWA Hamiltonian.

State ordering in the diabatic basis is ``a_1 .. a_Na, b_1 .. b_Nb``. All
couplings share one real pulse shape ``f(t)``; the detuning ``Delta(t)`` is
common to every excited state. The optional perturbation lifts the excited
state degeneracy: ``eps * g(t) * diag(d_1, .., d_Nb)`` on the b-block.
Static coupling phases live in the complex entries of ``chi``; a common
time-dependent phase is assumed removed by the choice of rotating frame.
Units: hbar = 1.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from .errors import PreconditionError, ShapeError

PULSE_KINDS = ("constant", "gaussian", "sech")
DETUNING_KINDS = ("constant", "linear-chirp")


@dataclass(frozen=True)
class PulseShape:
    kind: str = "constant"
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise PreconditionError(f"unknown pulse kind {self.kind!r}")
        if self.kind != "constant" and not self.width > 0:
            raise PreconditionError("pulse width must be positive")

    @property
    def is_constant(self):
        return self.kind == "constant" or self.amplitude == 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.amplitude)
        x = (t - self.center) / self.width
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-(x**2))
        # sech written to stay finite for large |x|
        e = np.exp(-np.abs(x))
        return self.amplitude * 2.0 * e / (1.0 + e * e)

    def integral(self, t_i, t_f):
        """Pulse area factor, the integral of f over [t_i, t_f]."""
        if self.kind == "constant":
            return self.amplitude * (t_f - t_i)
        xi = (t_i - self.center) / self.width
        xf = (t_f - self.center) / self.width
        if self.kind == "gaussian":
            return self.amplitude * self.width * 0.5 * np.sqrt(np.pi) * (erf(xf) - erf(xi))
        # antiderivative of sech is 2 atan(tanh(x/2))
        return self.amplitude * self.width * 2.0 * (
            np.arctan(np.tanh(xf / 2)) - np.arctan(np.tanh(xi / 2))
        )


@dataclass(frozen=True)
class DetuningProfile:
    """``Delta(t) = value`` (constant) or ``value + slope * t`` (linear chirp)."""

    kind: str = "constant"
    value: float = 0.0
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in DETUNING_KINDS:
            raise PreconditionError(f"unknown detuning kind {self.kind!r}")

    @property
    def is_constant(self):
        return self.kind == "constant" or self.slope == 0.0

    @property
    def is_zero(self):
        return self.value == 0.0 and self.is_constant

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.value)
        return self.value + self.slope * t

    def integral(self, t_i, t_f):
        if self.kind == "constant":
            return self.value * (t_f - t_i)
        return self.value * (t_f - t_i) + 0.5 * self.slope * (t_f**2 - t_i**2)


@dataclass(frozen=True)
class ShiftedDetuning:
    """``base(t) + coefficient * shape(t)``.

    Produced when the uniform part of the perturbation is folded into the
    common detuning; it is exact, not perturbative.
    """

    base: DetuningProfile
    coefficient: float
    shape: PulseShape

    @property
    def is_constant(self):
        return self.base.is_constant and (self.coefficient == 0.0 or self.shape.is_constant)

    @property
    def is_zero(self):
        return self.is_constant and float(self(0.0)) == 0.0

    @property
    def value(self):
        return float(self(0.0)) if self.is_constant else None

    def __call__(self, t):
        return self.base(t) + self.coefficient * self.shape(t)

    def integral(self, t_i, t_f):
        return self.base.integral(t_i, t_f) + self.coefficient * self.shape.integral(t_i, t_f)


@dataclass(frozen=True)
class SystemSpec:
    n_a: int
    n_b: int
    chi: np.ndarray
    pulse: PulseShape = field(default_factory=PulseShape)
    delta: DetuningProfile = field(default_factory=DetuningProfile)
    d_diag: np.ndarray = None
    d_shape: PulseShape = field(default_factory=PulseShape)
    epsilon: float = 0.0

    def __post_init__(self):
        chi = np.array(self.chi, dtype=np.complex128)
        if chi.ndim != 2 or chi.shape != (self.n_a, self.n_b):
            raise ShapeError(f"chi must have shape ({self.n_a}, {self.n_b}), got {chi.shape}")
        if self.n_b < 1 or self.n_a < self.n_b:
            raise PreconditionError(
                f"need n_a >= n_b >= 1, got n_a={self.n_a}, n_b={self.n_b}"
            )
        d = np.zeros(self.n_b) if self.d_diag is None else np.array(self.d_diag, dtype=float)
        if d.shape != (self.n_b,):
            raise ShapeError(f"d_diag must have length {self.n_b}, got shape {d.shape}")
        if self.epsilon < 0:
            raise PreconditionError("epsilon must be nonnegative")
        chi.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "d_diag", d)

    @property
    def dim(self):
        return self.n_a + self.n_b

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=float(epsilon))


def coupling_matrix(spec, t):
    """V(t) = chi * f(t)."""
    return spec.chi * float(spec.pulse(t))


def _blocks(spec):
    n = spec.dim
    hc = np.zeros((n, n), dtype=np.complex128)
    hc[: spec.n_a, spec.n_a :] = spec.chi
    hc[spec.n_a :, : spec.n_a] = np.conj(spec.chi).T
    pb = np.zeros(n)
    pb[spec.n_a :] = 1.0
    dd = np.zeros(n)
    dd[spec.n_a :] = spec.d_diag
    return hc, pb, dd


def hamiltonian(spec, t, include_perturbation=False):
    """Full (n_a + n_b)-dimensional Hamiltonian at time ``t``."""
    return hamiltonian_batch(spec, np.array([t], dtype=float), include_perturbation)[0]


def hamiltonian_batch(spec, times, include_perturbation=False):
    """Hamiltonians at an array of times, shape ``(len(times), n, n)``."""
    times = np.asarray(times, dtype=float)
    hc, pb, dd = _blocks(spec)
    f = spec.pulse(times)
    diag = spec.delta(times)[:, None] * pb[None, :]
    if include_perturbation and spec.epsilon != 0.0:
        diag = diag + (spec.epsilon * spec.d_shape(times))[:, None] * dd[None, :]
    h = f[:, None, None] * hc[None, :, :]
    idx = np.arange(spec.dim)
    h[:, idx, idx] += diag
    return h


def traceless_split(d_diag):
    """Split ``d`` into its mean and the zero-mean residual."""
    d = np.asarray(d_diag, dtype=float)
    mean = float(d.mean()) if d.size else 0.0
    return mean, d - mean


def absorb_uniform_shift(spec):
    """Move the mean of the perturbation into the common detuning.

    The returned spec describes the same Hamiltonian, with a traceless
    ``d_diag`` and ``delta`` replaced by ``Delta(t) + eps * mean * g(t)``.
    """
    mean, rest = traceless_split(spec.d_diag)
    if mean == 0.0:
        return spec
    if spec.epsilon == 0.0:
        return replace(spec, d_diag=rest)
    base = spec.delta
    coef = spec.epsilon * mean
    if isinstance(base, ShiftedDetuning):
        # fold into a fresh composite only when the shapes agree
        if base.shape == spec.d_shape:
            shifted = ShiftedDetuning(base.base, base.coefficient + coef, base.shape)
        else:
            raise PreconditionError("cannot absorb a second shift with a different shape")
    else:
        shifted = ShiftedDetuning(base, coef, spec.d_shape)
    return replace(spec, delta=shifted, d_diag=rest)


def reference_detuning(spec):
    """Detuning used as the constant reference for the S-series solves."""
    if spec.delta.is_constant:
        return float(spec.delta(0.0))
    center = spec.pulse.center if spec.pulse.kind != "constant" else 0.0
    return float(spec.delta(center))
