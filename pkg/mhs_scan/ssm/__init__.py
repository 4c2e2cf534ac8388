# component_id: ssm_pkg_init
# kind: code
# area: ssm
# status: stable
# purpose: Package initialization for the discrete state-space kernels.

from .discretization import SERIES_THRESHOLD, SsmParams, discretize, zoh_phi, zoh_phi_grad
from .kernels import ConvKernel, conv_kernel, conv_scan, recurrence_scan, recurrence_states
from .selective import (
    DELTA_FLOOR,
    DEFAULT_CONV_WIDTH,
    DEFAULT_EXPANSION,
    DEFAULT_STATE_DIM,
    MambaCache,
    MambaWeights,
    SelectiveCache,
    causal_depthwise_conv,
    glorot_uniform,
    init_mamba_weights,
    mamba_block,
    mamba_block_with_cache,
    selective_scan,
    selective_scan_with_cache,
)

__all__ = [
    "SERIES_THRESHOLD",
    "SsmParams",
    "discretize",
    "zoh_phi",
    "zoh_phi_grad",
    "ConvKernel",
    "conv_kernel",
    "conv_scan",
    "recurrence_scan",
    "recurrence_states",
    "DELTA_FLOOR",
    "DEFAULT_CONV_WIDTH",
    "DEFAULT_EXPANSION",
    "DEFAULT_STATE_DIM",
    "MambaCache",
    "MambaWeights",
    "SelectiveCache",
    "causal_depthwise_conv",
    "glorot_uniform",
    "init_mamba_weights",
    "mamba_block",
    "mamba_block_with_cache",
    "selective_scan",
    "selective_scan_with_cache",
]
