"""orbint: exact p-adic orbital-integral engine.

Evaluates both sides of a family of local relative-trace-formula
comparisons — one-variable Kloosterman-type integrals against
multi-variable cubic-phase integrals over Jordan-algebra lattices — in
exact cyclotomic arithmetic, and verifies the matching identities
bit-exactly.
"""

from .cells import Cell, CellFunction, indicator_lattice
from .cyclotomic import CycValue, cyc_accumulate, to_complex
from .errors import (
    BelowThreshold,
    BudgetExceeded,
    CellShrinkFailed,
    FamilyMismatch,
    InsufficientPrecision,
    Mismatch,
    MixedPrimes,
    NotAffine,
    OddPrimeRequired,
    OrbintError,
    ParseError,
    UnstableRefinement,
)
from .padic import Angle, PAdic, psi, unit_reps, val
from .measure import (
    CallablePhase,
    KloostermanPhase,
    PolyPhase,
    char_integral,
    eliminate_linear,
    integrate,
    integrate_stable,
)
from .poly import Poly
from .engine import EngineStats, character_lattice_integral, histogram_to_value
from .jordan import JordanElement, ModelAlgebra, model_algebra
from .orbital import (
    BruhatBoxes,
    KuznetsovUnit,
    OrbitalReport,
    ReportRow,
    i_orbital,
    i_singular,
    j_minus,
    j_orbital,
    j_plus,
    j_unit_closed,
    model_spec,
    phi_zero,
    phiprime_zero,
    vanishing_threshold,
    verify_fl,
)
from .transfer import (
    GermData,
    build_fprime_from_step,
    build_phi_from_step,
    check_germ_membership,
    germ_reference,
    kloosterman_piece,
    verify_fprime_against_step,
    verify_phi_against_step,
)

__version__ = "0.1.0"

__all__ = [
    "Angle",
    "BelowThreshold",
    "BruhatBoxes",
    "BudgetExceeded",
    "CallablePhase",
    "Cell",
    "CellFunction",
    "CellShrinkFailed",
    "CycValue",
    "EngineStats",
    "FamilyMismatch",
    "GermData",
    "InsufficientPrecision",
    "JordanElement",
    "KloostermanPhase",
    "KuznetsovUnit",
    "Mismatch",
    "MixedPrimes",
    "ModelAlgebra",
    "NotAffine",
    "OddPrimeRequired",
    "OrbintError",
    "OrbitalReport",
    "PAdic",
    "ParseError",
    "Poly",
    "PolyPhase",
    "ReportRow",
    "UnstableRefinement",
    "build_fprime_from_step",
    "build_phi_from_step",
    "char_integral",
    "character_lattice_integral",
    "check_germ_membership",
    "cyc_accumulate",
    "eliminate_linear",
    "germ_reference",
    "histogram_to_value",
    "i_orbital",
    "i_singular",
    "indicator_lattice",
    "integrate",
    "integrate_stable",
    "j_minus",
    "j_orbital",
    "j_plus",
    "j_unit_closed",
    "kloosterman_piece",
    "model_algebra",
    "model_spec",
    "phi_zero",
    "phiprime_zero",
    "psi",
    "to_complex",
    "unit_reps",
    "val",
    "vanishing_threshold",
    "verify_fl",
]
