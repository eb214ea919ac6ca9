"""High-precision Ramanujan-type q-series: evaluation, zeros and verification."""

import json
from importlib import resources

from .errors import (CostGuardError, DomainError, GuardFailure, InconsistencyError,
                     NonConvergenceError, QZerosError)
from .pfcheck import (MinorReport, RatioReport, closure_transform, pf_finite_via_roots,
                      product_condition, squarefree_part, toeplitz_minors, turan_ratios)
from .qcore import (PrecisionContext, qpoch_finite, qpoch_infinite, qpoch_multi,
                    rising_factorial)
from .roots import (RealnessReport, ZeroSet, certify_entire_zeros, certify_real_roots,
                    find_poly_roots, locate_entire_zeros)
from .series import (RAS, CoefficientSequence, GeneralizedQ, LimitEntire, LimitPoly,
                     QBessel, RamanujanA, RPhiS, SeriesSpec, TruncationCertificate,
                     coefficients, evaluate, qbessel_normalized, scaled_limit_coefficients,
                     truncation_degree)
from .verify import GridSpec, VerificationReport, estimate_order, run_suite

__version__ = "0.1.0"

SCHEMAS = ("coefficients", "eval", "report", "zeroset")


def load_schema(name: str) -> dict:
    """One of the JSON schemas shipped with the package (see ``SCHEMAS``)."""
    if name not in SCHEMAS:
        raise DomainError(f"unknown schema {name!r}; choose from {', '.join(SCHEMAS)}")
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
