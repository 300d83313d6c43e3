"""Seeded random systems shared by the verify suite, tests and scripts."""
import numpy as np

from .model import DetuningProfile, PulseShape, SystemSpec

GAUSSIAN = PulseShape("gaussian", 1.0, 0.0, 1.0)
WINDOW = (-4.0, 4.0)


def random_chi(rng, n_a, n_b):
    """Complex couplings with ``|chi_ij| <= 1``."""
    mag = rng.uniform(0.0, 1.0, (n_a, n_b))
    phase = rng.uniform(-np.pi, np.pi, (n_a, n_b))
    return mag * np.exp(1j * phase)


def random_dims(rng):
    n_b = int(rng.integers(1, 5))
    n_a = int(rng.integers(max(2, n_b), 7))
    return n_a, n_b


def random_system(rng, n_a=None, n_b=None, detuning=None, traceless=True, epsilon=0.0):
    if n_a is None or n_b is None:
        n_a, n_b = random_dims(rng)
    delta = DetuningProfile("constant", float(rng.uniform(-1.0, 1.0))) if detuning is None else detuning
    d = rng.uniform(-1.0, 1.0, n_b)
    if traceless:
        d = d - d.mean()
    return SystemSpec(
        n_a=n_a,
        n_b=n_b,
        chi=random_chi(rng, n_a, n_b),
        pulse=GAUSSIAN,
        delta=delta,
        d_diag=d,
        d_shape=PulseShape("gaussian", 1.0, 0.0, 1.5),
        epsilon=epsilon,
    )


def factorization_corpus(seed=2024, count=20):
    """The acceptance corpus: n_a in 2..6, n_b in 1..4, n_b <= n_a."""
    rng = np.random.default_rng(seed)
    return [random_system(rng) for _ in range(count)]


def perturbation_corpus(seed=7, count=5):
    """Systems with at least two excited states and a nonzero reference detuning."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n_b = int(rng.integers(2, 4))
        n_a = int(rng.integers(n_b, 6))
        value = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5))
        out.append(random_system(rng, n_a, n_b, DetuningProfile("constant", value)))
    return out
