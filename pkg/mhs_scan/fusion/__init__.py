# component_id: fusion_pkg_init
# kind: code
# area: fusion
# status: stable
# purpose: Package initialization for embedding section fusion.

from .fusion import (
    SECTION_AXIS,
    EsfResult,
    apply_gate,
    apply_scheme,
    coefficient_variation,
    fuse_cv_scale,
    fuse_mixpool,
    fuse_mixpool_cv,
    fuse_sum,
)
from .schemes import (
    DEFAULT_EPS,
    DEFAULT_MIX,
    DEFAULT_SCHEME_REGISTRY,
    DEFAULT_THRESHOLD,
    CvScaling,
    EsfScheme,
    GateKind,
    MixPoolCv,
    MixturePooling,
    SchemeName,
    SumScheme,
    scheme_from_config,
    scheme_to_config,
)

__all__ = [
    "SECTION_AXIS",
    "EsfResult",
    "apply_gate",
    "apply_scheme",
    "coefficient_variation",
    "fuse_cv_scale",
    "fuse_mixpool",
    "fuse_mixpool_cv",
    "fuse_sum",
    "DEFAULT_EPS",
    "DEFAULT_MIX",
    "DEFAULT_SCHEME_REGISTRY",
    "DEFAULT_THRESHOLD",
    "CvScaling",
    "EsfScheme",
    "GateKind",
    "MixPoolCv",
    "MixturePooling",
    "SchemeName",
    "SumScheme",
    "scheme_from_config",
    "scheme_to_config",
]
