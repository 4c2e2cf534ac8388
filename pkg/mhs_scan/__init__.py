# component_id: mhs_scan_public_api
# kind: runtime_module
# area: api
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Public API surface. Re-exports the stable entry points of each package.

"""
mhs_scan: multi-head scan for vision state-space models.

Scan routes over patch grids, the selective state-space scan, embedding
section fusion, the full multi-head forward pass with its analytic
backward, and a finite-difference harness certifying the gradients.
"""

# -------------------------
# Errors
# -------------------------
from .errors import (
    ConfigValidationError,
    ContractError,
    DimensionError,
    DomainError,
    FormatError,
    InconclusiveCheck,
    MhsError,
)

# -------------------------
# Routes
# -------------------------
from .geometry import GridShape, RouteVariant, ScanPattern, ScanRoute, build_route, route_set

# -------------------------
# Fusion
# -------------------------
from .fusion import CvScaling, MixPoolCv, MixturePooling, SumScheme, apply_scheme

# -------------------------
# Module
# -------------------------
from .module import (
    MhsConfig,
    MhsWeights,
    default_config,
    forward,
    forward_with_trace,
    init_weights,
    load_config,
    load_weights,
    param_count,
    save_weights,
)

# -------------------------
# Gradients
# -------------------------
from .gradcheck import GradReport, backward_forward, gradcheck_module

__version__ = "0.1.0"

__all__ = [
    "ConfigValidationError",
    "ContractError",
    "DimensionError",
    "DomainError",
    "FormatError",
    "InconclusiveCheck",
    "MhsError",
    "GridShape",
    "RouteVariant",
    "ScanPattern",
    "ScanRoute",
    "build_route",
    "route_set",
    "CvScaling",
    "MixPoolCv",
    "MixturePooling",
    "SumScheme",
    "apply_scheme",
    "MhsConfig",
    "MhsWeights",
    "default_config",
    "forward",
    "forward_with_trace",
    "init_weights",
    "load_config",
    "load_weights",
    "param_count",
    "save_weights",
    "GradReport",
    "backward_forward",
    "gradcheck_module",
]
