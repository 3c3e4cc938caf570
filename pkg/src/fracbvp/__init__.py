"""Certificates and a Picard solver for nonlocal multi-point Caputo boundary value problems."""

__version__ = "0.1.0"

from fracbvp.certify import (  # noqa: E402
    Certificate,
    Kind,
    LipschitzEstimate,
    Verdict,
    check_banach,
    check_boyd_wong,
    check_leray_schauder,
    estimate_lipschitz,
)
from fracbvp.fracops import GridFunction, QuadratureConfig  # noqa: E402
from fracbvp.model import (  # noqa: E402
    BoundaryTerm,
    ProblemError,
    ProblemSpec,
    StructuralConstants,
    compute_phi,
    structural_constants,
)
from fracbvp.solver import Solution, apply_operator, picard_solve, solve_linear, verify  # noqa: E402

__all__ = [
    "__version__",
    "BoundaryTerm", "ProblemError", "ProblemSpec", "StructuralConstants",
    "structural_constants", "compute_phi",
    "GridFunction", "QuadratureConfig",
    "Certificate", "Kind", "Verdict", "LipschitzEstimate",
    "estimate_lipschitz", "check_banach", "check_boyd_wong", "check_leray_schauder",
    "Solution", "apply_operator", "solve_linear", "picard_solve", "verify",
]
