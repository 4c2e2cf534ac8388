# component_id: gradcheck_pkg_init
# kind: code
# area: gradcheck
# status: stable
# purpose: Package initialization for analytic backward passes and their finite-difference checks.

from .backward import (
    EsfGrads,
    RecurrenceGrads,
    backward_causal_conv,
    backward_esf,
    backward_forward,
    backward_layer_norm,
    backward_mamba_block,
    backward_recurrence,
    backward_selective_scan,
    silu_grad,
)
from .harness import (
    DEFAULT_STEP,
    FORWARD_TOLERANCE,
    OP_BUILDERS,
    OP_TOLERANCE,
    GradEntry,
    GradReport,
    GradStatus,
    compare_gradients,
    esf_irregularities,
    kink_branches,
    gradcheck_module,
    numeric_jacobian,
    probe_coordinates,
)

__all__ = [
    "EsfGrads",
    "RecurrenceGrads",
    "backward_causal_conv",
    "backward_esf",
    "backward_forward",
    "backward_layer_norm",
    "backward_mamba_block",
    "backward_recurrence",
    "backward_selective_scan",
    "silu_grad",
    "DEFAULT_STEP",
    "FORWARD_TOLERANCE",
    "OP_BUILDERS",
    "OP_TOLERANCE",
    "GradEntry",
    "GradReport",
    "GradStatus",
    "compare_gradients",
    "esf_irregularities",
    "kink_branches",
    "gradcheck_module",
    "numeric_jacobian",
    "probe_coordinates",
]
