"""semdiff: interactive fuzzy-modifier refinement over a discretized variant space.

Build a grid of local variants around a base parameter, then converge on a
target value by issuing fuzzy modifiers ("slightly/moderately/significantly"
x "greater/less").  Ships the plain interval-refinement loop, an
error-tolerant variant driven by pairwise input classification, a simulation
harness with binary-search baselines, and an HTTP session service.
"""

__version__ = "0.1.0"

from .core import (
    Direction,
    InvalidArgument,
    IterationBounds,
    MembershipSpec,
    Modifier,
    Power,
    SearchState,
    SpecInconsistency,
    StateTerminated,
    StepWeights,
    VariantSpace,
    build_variant_space,
    centroid_weights_numeric,
    defuzzify_weights,
    initial_state,
    is_terminated,
    iteration_bounds,
    membership,
    simple_step,
)
from .tolerant import (
    IntervalAction,
    TolerantState,
    classify_pair,
    initial_tolerant_state,
    tolerant_step,
    validate_error_pattern,
)
from .simulate import (
    BINARY_CONVENTIONS,
    CALIBRATED_CONVENTIONS,
    ComparisonReport,
    ContractionEstimate,
    Conventions,
    DEFAULT_CONVENTIONS,
    PolicyMode,
    PowerRule,
    RunTrace,
    UserPolicy,
    binary_search_steps,
    compare_vs_binary,
    estimate_contraction_probability,
    optimize_weights,
    simulate_run,
)
