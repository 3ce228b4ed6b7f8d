"""Exact time-frequency analysis of Walsh packet sums on dyadic grids.

The package is organised in layers: exact scalar arithmetic, phase
plane geometry, wave packets on grids, variation norms, operators built
from truncated packet sums, and tree selection on quartile collections.
A separate experiments subpackage drives randomized checks and the
command line interface.
"""

from .errors import (
    ConfigError,
    EmptyCollection,
    EmptySet,
    EmptyTree,
    GridMismatch,
    InvalidTree,
    KernelUnsupported,
    NotDyadicError,
    PreconditionViolated,
    ResolutionTooCoarse,
    ScaleTooCoarse,
    ScaleTooFine,
    UnsortedBreakpoints,
    ZeroVariation,
)
from .exact import (
    ONE,
    SQRT2,
    ZERO,
    DyadicRational,
    QuadScalar,
    inv_sqrt_pow2,
    pow2_fraction,
)
from .geometry import (
    DyadicInterval,
    IntervalRelation,
    Quartile,
    Tile,
    Tree,
    TreeKind,
    classify_tree,
    containing_interval,
    lacunary_tiles_disjoint,
    maximal_tree,
    tiles_disjoint,
)
from .operators import (
    FrequencySet,
    Linearization,
    QuartileCollection,
    TruncationField,
    average,
    freq_projection,
    h_star,
    h_var,
    lambda_form,
    maximal,
    model_terms,
    optimal_linearization,
    partial_sum_field,
    quartile_terms,
    tilde_inner_product,
)
from .trees import (
    CountingProfile,
    JNReport,
    SelectedTree,
    SelectionResult,
    SizeReport,
    counting_profile,
    jn_quantities,
    jump_times,
    restricted_trees,
    select_trees,
    size,
)
from .variation import (
    ScaleSequence,
    VariationCertificate,
    linearize_weights,
    long_short_split,
    variation_norm,
)
from .wavepacket import (
    RealStepFunction,
    StepFunction,
    batch_inner_products,
    eval_walsh,
    eval_wavepacket,
    inner_product,
    synthesize,
    walsh_sign_pattern,
    wavepacket_step,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CountingProfile",
    "DyadicInterval",
    "DyadicRational",
    "EmptyCollection",
    "EmptySet",
    "EmptyTree",
    "FrequencySet",
    "GridMismatch",
    "IntervalRelation",
    "InvalidTree",
    "JNReport",
    "KernelUnsupported",
    "Linearization",
    "NotDyadicError",
    "ONE",
    "PreconditionViolated",
    "QuadScalar",
    "Quartile",
    "QuartileCollection",
    "RealStepFunction",
    "ResolutionTooCoarse",
    "SQRT2",
    "ScaleSequence",
    "ScaleTooCoarse",
    "ScaleTooFine",
    "SelectedTree",
    "SelectionResult",
    "SizeReport",
    "StepFunction",
    "Tile",
    "Tree",
    "TreeKind",
    "TruncationField",
    "UnsortedBreakpoints",
    "VariationCertificate",
    "ZERO",
    "ZeroVariation",
    "average",
    "batch_inner_products",
    "classify_tree",
    "containing_interval",
    "counting_profile",
    "eval_walsh",
    "eval_wavepacket",
    "freq_projection",
    "h_star",
    "h_var",
    "inner_product",
    "inv_sqrt_pow2",
    "pow2_fraction",
    "jn_quantities",
    "jump_times",
    "lacunary_tiles_disjoint",
    "lambda_form",
    "linearize_weights",
    "long_short_split",
    "maximal",
    "maximal_tree",
    "optimal_linearization",
    "partial_sum_field",
    "model_terms",
    "quartile_terms",
    "restricted_trees",
    "select_trees",
    "size",
    "synthesize",
    "tilde_inner_product",
    "tiles_disjoint",
    "variation_norm",
    "walsh_sign_pattern",
    "wavepacket_step",
]
