# component_id: core_pkg_init
# kind: code
# area: core
# status: stable
# purpose: Package initialization for dense tensor primitives.

from .tensor import (
    ElementwiseOp,
    ReduceKind,
    Tensor,
    as_tensor,
    elementwise,
    layer_norm,
    layer_norm_stats,
    matmul,
    project_last,
    reduce,
    relu,
    sequential_sum,
    sigmoid,
    silu,
    softplus,
    transpose,
)

__all__ = [
    "ElementwiseOp",
    "ReduceKind",
    "Tensor",
    "as_tensor",
    "elementwise",
    "layer_norm",
    "layer_norm_stats",
    "matmul",
    "project_last",
    "reduce",
    "relu",
    "sequential_sum",
    "sigmoid",
    "silu",
    "softplus",
    "transpose",
]
