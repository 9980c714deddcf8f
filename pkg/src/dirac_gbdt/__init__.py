"""Discrete Dirac systems with pseudo-exponential potentials built from GBDT triples.

The package constructs explicit potentials from a parameter triple
``{A, S0, Pi0}``, evaluates fundamental and Jost-type solutions, and compares
Weyl functions with reflection coefficients computed by independent routes.
"""

from .errors import (
    ConditioningError,
    ConvergenceError,
    DimensionError,
    DiracGbdtError,
    GenerationError,
    PoleError,
    SingularEquationError,
)
from .gbdt import GbdtSequence, LimitPair, build_sequence, g_matrix, limits, rq_matrices
from .spectral import (
    certify_theorems,
    reflection_closed,
    reflection_oracle,
    weyl_sum_check,
    weyl_value,
)
from .transfer import fundamental_closed, fundamental_direct, transfer_eval
from .triples import ParameterTriple, Signature, SystemKind, derive_s0, generate, validate

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "ConvergenceError",
    "DimensionError",
    "DiracGbdtError",
    "GenerationError",
    "PoleError",
    "SingularEquationError",
    "GbdtSequence",
    "LimitPair",
    "build_sequence",
    "g_matrix",
    "limits",
    "rq_matrices",
    "certify_theorems",
    "reflection_closed",
    "reflection_oracle",
    "weyl_sum_check",
    "weyl_value",
    "fundamental_closed",
    "fundamental_direct",
    "transfer_eval",
    "ParameterTriple",
    "Signature",
    "SystemKind",
    "derive_s0",
    "generate",
    "validate",
    "__version__",
]
