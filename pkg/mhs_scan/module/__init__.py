# component_id: module_pkg_init
# kind: code
# area: module
# status: stable
# purpose: Package initialization for the multi-head scan module.

from .config import (
    DEFAULT_PATTERNS,
    LN_EPS,
    ConfigValidationResult,
    MhsConfig,
    SsmConfig,
    config_from_dict,
    config_to_dict,
    default_config,
    default_patterns,
    load_config,
    save_config,
    validate_config_document,
)
from .forward import ForwardTrace, HeadTrace, forward, forward_with_trace, gate_zero_fraction
from .persistence import decode_weights, encode_weights, load_weights, save_weights
from .weights import (
    MhsWeights,
    ParamBreakdown,
    check_weights,
    expected_shapes,
    init_weights,
    param_breakdown,
    param_count,
    require_weights,
)

__all__ = [
    "DEFAULT_PATTERNS",
    "LN_EPS",
    "ConfigValidationResult",
    "MhsConfig",
    "SsmConfig",
    "config_from_dict",
    "config_to_dict",
    "default_config",
    "default_patterns",
    "load_config",
    "save_config",
    "validate_config_document",
    "ForwardTrace",
    "HeadTrace",
    "forward",
    "forward_with_trace",
    "gate_zero_fraction",
    "decode_weights",
    "encode_weights",
    "load_weights",
    "save_weights",
    "MhsWeights",
    "ParamBreakdown",
    "check_weights",
    "expected_shapes",
    "init_weights",
    "param_breakdown",
    "param_count",
    "require_weights",
]
