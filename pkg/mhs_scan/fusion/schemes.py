# component_id: esf_schemes
# kind: runtime_module
# area: fusion
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Embedding-section fusion scheme variants and the registry that builds them from config.

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Mapping, Tuple, Union

DEFAULT_THRESHOLD = 0.5
DEFAULT_EPS = 1e-6
DEFAULT_MIX = (0.5, 0.5)


class GateKind(str, Enum):
    """Gate applied to ``y_cv - t``."""

    RELU = "relu"
    SIGMOID = "sigmoid"


class SchemeName(str, Enum):
    SUM = "sum"
    MIXPOOL = "mixpool"
    CV_SCALE = "cv_scale"
    MIXPOOL_CV = "mixpool_cv"


def _check_mix(w: Tuple[float, float]) -> Tuple[float, float]:
    if len(w) != 2:
        raise ValueError(f"mixture weights MUST have exactly two entries, got {len(w)}")
    return (float(w[0]), float(w[1]))


def _check_gate(t: float, eps: float) -> None:
    if t < 0:
        raise ValueError("t MUST be >= 0")
    if eps <= 0:
        raise ValueError("eps MUST be > 0")


@dataclass(frozen=True)
class SumScheme:
    """Direct addition of the K sections."""

    name = SchemeName.SUM

    @property
    def uses_mix(self) -> bool:
        return False

    @property
    def uses_gate(self) -> bool:
        return False


@dataclass(frozen=True)
class MixturePooling:
    """``w[0] * mean + w[1] * max`` over the section axis.

    ``w`` is the initial value; each head learns its own copy.
    """

    w: Tuple[float, float] = DEFAULT_MIX
    name = SchemeName.MIXPOOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _check_mix(tuple(self.w)))

    @property
    def uses_mix(self) -> bool:
        return True

    @property
    def uses_gate(self) -> bool:
        return False


@dataclass(frozen=True)
class CvScaling:
    """Summed sections gated by ``gate(y_cv - t)``."""

    t: float = DEFAULT_THRESHOLD
    eps: float = DEFAULT_EPS
    gate: GateKind = GateKind.RELU
    name = SchemeName.CV_SCALE

    def __post_init__(self) -> None:
        _check_gate(self.t, self.eps)
        object.__setattr__(self, "gate", GateKind(self.gate))

    @property
    def uses_mix(self) -> bool:
        return False

    @property
    def uses_gate(self) -> bool:
        return True


@dataclass(frozen=True)
class MixPoolCv:
    """Mixture pooling gated by ``gate(y_cv - t)``."""

    w: Tuple[float, float] = DEFAULT_MIX
    t: float = DEFAULT_THRESHOLD
    eps: float = DEFAULT_EPS
    gate: GateKind = GateKind.RELU
    name = SchemeName.MIXPOOL_CV

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _check_mix(tuple(self.w)))
        _check_gate(self.t, self.eps)
        object.__setattr__(self, "gate", GateKind(self.gate))

    @property
    def uses_mix(self) -> bool:
        return True

    @property
    def uses_gate(self) -> bool:
        return True


EsfScheme = Union[SumScheme, MixturePooling, CvScaling, MixPoolCv]


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

SchemeFactory = Callable[[Mapping[str, Any]], EsfScheme]


def _mix_from(config: Mapping[str, Any]) -> Tuple[float, float]:
    raw = config.get("w", DEFAULT_MIX)
    try:
        return _check_mix(tuple(float(v) for v in raw))  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"Invalid value for w: {raw!r}") from exc


def _gate_params(config: Mapping[str, Any]) -> Dict[str, Any]:
    try:
        return {
            "t": float(config.get("t", DEFAULT_THRESHOLD)),
            "eps": float(config.get("eps", DEFAULT_EPS)),
            "gate": GateKind(config.get("gate", GateKind.RELU.value)),
        }
    except (TypeError, ValueError) as exc:
        raise ValueError(f"Invalid gate configuration: {dict(config)!r}") from exc


DEFAULT_SCHEME_REGISTRY: Dict[str, SchemeFactory] = {
    SchemeName.SUM.value: lambda config: SumScheme(),
    SchemeName.MIXPOOL.value: lambda config: MixturePooling(w=_mix_from(config)),
    SchemeName.CV_SCALE.value: lambda config: CvScaling(**_gate_params(config)),
    SchemeName.MIXPOOL_CV.value: lambda config: MixPoolCv(w=_mix_from(config), **_gate_params(config)),
}


def scheme_from_config(config: Mapping[str, Any]) -> EsfScheme:
    """Build a scheme from the ``esf`` block of a module config."""
    name = config.get("scheme", SchemeName.CV_SCALE.value)
    factory = DEFAULT_SCHEME_REGISTRY.get(str(name))
    if factory is None:
        raise ValueError(f"Unknown ESF scheme {name!r}; expected one of {sorted(DEFAULT_SCHEME_REGISTRY)}")
    return factory(config)


def scheme_to_config(scheme: EsfScheme) -> Dict[str, Any]:
    out: Dict[str, Any] = {"scheme": scheme.name.value}
    if isinstance(scheme, (MixturePooling, MixPoolCv)):
        out["w"] = list(scheme.w)
    if isinstance(scheme, (CvScaling, MixPoolCv)):
        out.update({"t": scheme.t, "eps": scheme.eps, "gate": scheme.gate.value})
    return out


__all__ = [
    "DEFAULT_THRESHOLD",
    "DEFAULT_EPS",
    "DEFAULT_MIX",
    "GateKind",
    "SchemeName",
    "SumScheme",
    "MixturePooling",
    "CvScaling",
    "MixPoolCv",
    "EsfScheme",
    "DEFAULT_SCHEME_REGISTRY",
    "scheme_from_config",
    "scheme_to_config",
]
