"""Jacobi-type vector continued fractions over signed inner-product spaces.

Evaluation with arbitrary tails, the attached scalar/vector polynomial
recurrences, a-priori truncation-error radii, and fixed-point analysis of
periodic fractions, plus a CSV-emitting CLI for the bundled experiments.
"""

from . import errors
from .convergence import (
    EnclosureReport,
    ErrorBall,
    enclosure_check,
    error_radius,
    error_radius_from_polynomials,
    error_radius_sequence,
)
from .dynamics import (
    ATTRACTIVE,
    BOUNDARY,
    CONVERGENT,
    INDIFFERENT,
    OSCILLATORY,
    REPULSIVE,
    FixedPointReport,
    InfinityCandidate,
    MoebiusMap,
    boundary_loops,
    classify_region,
    eval_planar,
    find_fixed_points,
    infinity_fixed_point_candidates,
    period_map,
    planar_reduce,
)
from .fraction import (
    ConvergedValue,
    JvfParams,
    eval_converged,
    eval_truncated,
    eval_truncated_batch,
    forward_fragment,
    reverse_fragment,
    threefold_params,
    truncation_sequence,
    validate,
)
from .geometry import (
    INFINITY,
    ExtVector,
    SignatureSpace,
    conjugate,
    invert,
    is_infinite,
    y_component,
)
from .polynomials import (
    PolyState,
    christoffel_darboux_residual,
    christoffel_darboux_sides,
    first_kind_sequence,
    init_state,
    product_form_first_kind,
    second_kind_sequence,
    step_first_kind,
)

__version__ = "0.1.0"
