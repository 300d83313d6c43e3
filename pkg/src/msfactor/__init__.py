"""Morris-Shore factorization of degenerate two-level systems, with a
perturbative extension to unequal excited-state detunings."""

__version__ = "0.1.0"

from .model import DetuningProfile, PulseShape, SystemSpec  # noqa: E402
from .mstransform import MSDecomposition, decompose, nb2_closed_form  # noqa: E402

__all__ = [
    "__version__",
    "DetuningProfile",
    "PulseShape",
    "SystemSpec",
    "MSDecomposition",
    "decompose",
    "nb2_closed_form",
]
