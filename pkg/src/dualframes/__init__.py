"""Verification and computation toolkit for nonhomogeneous and nonstationary dual wavelet frames."""

__version__ = "0.1.0"

from .laurent import EXACT, FLOAT, LaurentPoly, ModeError, RationalComplex  # noqa: E402
from .filterbank import (  # noqa: E402
    FilterBank,
    NonstationaryBank,
    VerificationReport,
    mask_constants,
    theta_of,
    verify_mask_normalization,
    verify_nonstationary_oep,
    verify_oep,
    verify_theta_normalization,
)
from .refinable import RefinableSpec, eval_generator, eval_truncated, generator_set, sample_grid  # noqa: E402
from .framecheck import (  # noqa: E402
    SystemSpec,
    TestFunction,
    bracket_integral,
    bracket_series,
    check_bracket_identity,
    check_characterization,
    check_characterization_real,
    check_duality,
    check_nonstationary,
    pairing,
    partial_sum,
)
from .fwt import Pyramid, analyze, pr_test, subdivision, synthesize, transition  # noqa: E402

__all__ = [
    "EXACT", "FLOAT", "FilterBank", "LaurentPoly", "ModeError", "NonstationaryBank", "Pyramid",
    "RationalComplex", "RefinableSpec", "SystemSpec", "TestFunction", "VerificationReport", "analyze",
    "bracket_integral", "bracket_series", "check_bracket_identity", "check_characterization",
    "check_characterization_real", "check_duality", "check_nonstationary", "eval_generator",
    "eval_truncated", "generator_set", "mask_constants", "pairing", "partial_sum", "pr_test",
    "sample_grid", "subdivision", "synthesize", "theta_of", "transition", "verify_mask_normalization",
    "verify_nonstationary_oep", "verify_oep", "verify_theta_normalization",
]
