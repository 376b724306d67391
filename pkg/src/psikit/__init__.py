"""Unit-argument hypergeometric series, digamma-weighted series, and a
catalogue of transformation identities with a randomized verifier."""

from .errors import (
    CaseFileError,
    ConstraintError,
    DivergentError,
    ExhaustedError,
    NoConvergence,
    PoleError,
    PsiKitError,
)
from .identities import IdentityCase, IdentityId, VerificationReport, verify
from .series import (
    SeriesResult,
    Sign,
    TruncationPolicy,
    digamma_series,
    digamma_series_m,
    kdf_series,
    pfq_unit,
    phi_unit,
)

__version__ = "0.1.0"

__all__ = [
    "CaseFileError", "ConstraintError", "DivergentError", "ExhaustedError", "NoConvergence",
    "PoleError", "PsiKitError", "IdentityCase", "IdentityId", "VerificationReport", "verify",
    "SeriesResult", "Sign", "TruncationPolicy", "digamma_series", "digamma_series_m",
    "kdf_series", "pfq_unit", "phi_unit",
]
