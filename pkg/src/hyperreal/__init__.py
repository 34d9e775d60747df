"""Computing with hyperreal values: fine-grained infinities and infinitesimals
for divergent sums, improper integrals, set sizes, expectations, utility
streams, spatial worlds, and never-happening probabilities.

Everything is exact where the growth scale e^(c*w) * w^p * log(w)^q allows
it; values that leave the scale stay sequence-backed with certificates
(periodic closed forms, eventual links, enclosures) standing in for the
choice of ultrafilter.  Claims come back determinately true, determinately
false, indeterminate (ultrafilter-dependent), or unknown at a horizon.
"""

from .scalar import ExactScalar, PrecisionExceeded, UnsupportedScalar, scalar
from .core import ScaleOverflow, SymbolicHyperreal, ceil_of, floor_of, monomial
from .truth import Comparison, TruthValue
from .value import (
    DEFAULT_HORIZON,
    Hyperreal,
    ShadowUndefined,
    Uncertified,
    as_hyperreal,
    classify,
    compare,
    from_real,
    is_finite,
    is_infinitesimal,
    membership_case_split,
    omega,
    shadow,
)
from .series import (
    SeriesExpr,
    closed_form_partial_sum,
    const_term,
    generator_term,
    geometric_term,
    hyperfinite_sum,
    indicator_term,
    lin_comb,
    poly_term,
    sum_delta,
    sum_to_infinity,
)
from .integrals import (
    Bound,
    FuncExpr,
    NonIntegrable,
    hyperdefinite_integral,
    integrate,
    integrate_from_minus_infinity,
    integrate_from_singular,
    integrate_symmetric,
    integrate_to_infinity,
    integrate_to_singular,
)
from .intsets import (
    IntegerSetExpr,
    numerosity,
    proportion,
    verify_partition_additivity,
)
from .render import render_value, value_json

__all__ = [
    "ExactScalar", "scalar", "PrecisionExceeded", "UnsupportedScalar",
    "SymbolicHyperreal", "ScaleOverflow", "floor_of", "ceil_of", "monomial",
    "TruthValue", "Comparison",
    "Hyperreal", "Uncertified", "ShadowUndefined", "DEFAULT_HORIZON",
    "omega", "from_real", "as_hyperreal",
    "compare", "classify", "is_finite", "is_infinitesimal", "shadow",
    "membership_case_split",
    "SeriesExpr", "poly_term", "const_term", "geometric_term",
    "indicator_term", "lin_comb", "generator_term",
    "closed_form_partial_sum", "hyperfinite_sum", "sum_to_infinity",
    "sum_delta",
    "Bound", "FuncExpr", "NonIntegrable", "integrate",
    "hyperdefinite_integral", "integrate_to_infinity",
    "integrate_from_minus_infinity", "integrate_to_singular",
    "integrate_from_singular", "integrate_symmetric",
    "IntegerSetExpr", "numerosity", "proportion",
    "verify_partition_additivity",
    "render_value", "value_json",
]
