"""Modular, Luxemburg norm and isometry structure in variable-exponent sequence spaces."""

__version__ = "0.1.0"

from .errors import (
    DisjointnessViolation,
    EmptyColumn,
    EmptyImage,
    InvalidExponent,
    ModularOverflow,
    NonConvergence,
    OutOfDomain,
    RegimeViolation,
    SupportOverlap,
    TruncationBreach,
    VarLpError,
)
from .space import (
    Constant,
    ExponentSequence,
    NormResult,
    Periodic,
    Regime,
    SparseSequence,
    basis_vector,
    classify_regime,
    exponent_at,
    luxemburg_norm,
    modular,
    norm_constant_p_oracle,
)
from .setiso import BoundedImageCertificate, RegularSetIso, apply_to_set, extend_to_sequence, from_family
from .operators import (
    LampertiOperator,
    MatrixOperator,
    Permutation,
    Shift,
    Table,
    Verdict,
    apply_injection,
    apply_lamperti,
    check_isometry_randomized,
    check_isomodular_structural,
    injection_to_matrix,
    lamperti_to_matrix,
    recover_structure,
    theta_isometry_decision,
)
