# component_id: mhs_config
# kind: runtime_module
# area: module
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Hyperparameters of the multi-head scan module, their defaults, and config-file loading.

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import jsonschema
import yaml

from ..errors import ConfigValidationError
from ..fusion import CvScaling, EsfScheme, scheme_from_config, scheme_to_config
from ..geometry import ROUTES_PER_PATTERN, ScanPattern
from ..schemas import CONFIG_SCHEMA, load_schema
from ..ssm import DEFAULT_CONV_WIDTH, DEFAULT_EXPANSION, DEFAULT_STATE_DIM

LN_EPS = 1e-5

# Head-to-pattern defaults: three heads take the three adjacency-preserving
# patterns, four heads take all of them.
DEFAULT_PATTERNS: Mapping[int, Tuple[ScanPattern, ...]] = {
    1: (ScanPattern.SNAKE,),
    2: (ScanPattern.SNAKE, ScanPattern.SPIRAL),
    3: (ScanPattern.SNAKE, ScanPattern.DIAGONAL, ScanPattern.SPIRAL),
    4: (ScanPattern.RASTER, ScanPattern.SNAKE, ScanPattern.DIAGONAL, ScanPattern.SPIRAL),
}


def default_patterns(n_heads: int) -> Tuple[ScanPattern, ...]:
    if n_heads in DEFAULT_PATTERNS:
        return DEFAULT_PATTERNS[n_heads]
    cycle = DEFAULT_PATTERNS[4]
    return tuple(cycle[i % len(cycle)] for i in range(n_heads))


@dataclass(frozen=True)
class SsmConfig:
    state_dim: int = DEFAULT_STATE_DIM
    expansion: int = DEFAULT_EXPANSION
    conv_width: int = DEFAULT_CONV_WIDTH
    conv_on: bool = True

    def __post_init__(self) -> None:
        errors = [
            f"ssm.{name} MUST be >= 1, got {getattr(self, name)}"
            for name in ("state_dim", "expansion", "conv_width")
            if int(getattr(self, name)) < 1
        ]
        if errors:
            raise ConfigValidationError(errors)


@dataclass(frozen=True)
class MhsConfig:
    """Module hyperparameters; grid extents are supplied per call.

    Invariants (checked at construction):
      - ``n_heads >= 1``, ``subspace_dim >= 1``, ``1 <= k_routes <= 4``
      - one pattern per head
      - without the tail projection, ``n_heads * subspace_dim == c_l``
      - gated ESF schemes need at least two routes
    """

    c_l: int
    n_heads: int
    subspace_dim: int
    k_routes: int = ROUTES_PER_PATTERN
    patterns: Tuple[ScanPattern, ...] = ()
    esf: EsfScheme = field(default_factory=CvScaling)
    tail_projection: bool = True
    ssm: SsmConfig = field(default_factory=SsmConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.patterns:
            object.__setattr__(self, "patterns", default_patterns(max(int(self.n_heads), 1)))
        else:
            object.__setattr__(self, "patterns", tuple(ScanPattern(p) for p in self.patterns))

        errors: List[str] = []
        if self.c_l < 1:
            errors.append(f"c_l MUST be >= 1, got {self.c_l}")
        if self.n_heads < 1:
            errors.append(f"n_heads MUST be >= 1, got {self.n_heads}")
        if self.subspace_dim < 1:
            errors.append(f"subspace_dim MUST be >= 1, got {self.subspace_dim}")
        if not 1 <= self.k_routes <= ROUTES_PER_PATTERN:
            errors.append(f"k_routes MUST be in 1..{ROUTES_PER_PATTERN}, got {self.k_routes}")
        if len(self.patterns) != self.n_heads:
            errors.append(f"patterns MUST list one pattern per head ({self.n_heads}), got {len(self.patterns)}")
        if not self.tail_projection and self.n_heads * self.subspace_dim != self.c_l:
            errors.append(
                "tail_projection: MUST be on unless n_heads * subspace_dim == c_l "
                f"({self.n_heads} * {self.subspace_dim} != {self.c_l})"
            )
        if self.esf.uses_gate and self.k_routes < 2:
            errors.append(f"esf.scheme: {self.esf.name.value} needs k_routes >= 2")
        if errors:
            raise ConfigValidationError(errors)

    @property
    def concat_dim(self) -> int:
        """Channel extent after concatenating the head sections."""
        return self.n_heads * self.subspace_dim

    @property
    def inner_dim(self) -> int:
        return self.ssm.expansion * self.subspace_dim


def default_config(
    c_l: int = 96,
    n_heads: int = 3,
    *,
    subspace_dim: Optional[int] = None,
    tail_projection: bool = True,
    **overrides: Any,
) -> MhsConfig:
    """Config with ``S = c_l // n_heads`` and the default pattern assignment."""
    S = subspace_dim if subspace_dim is not None else max(c_l // n_heads, 1)
    return MhsConfig(c_l=c_l, n_heads=n_heads, subspace_dim=S, tail_projection=tail_projection, **overrides)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigValidationResult:
    is_valid: bool
    errors: List[str]


def validate_config_document(document: Any) -> ConfigValidationResult:
    """Check a parsed config against the JSON Schema; the document is not modified."""
    validator = jsonschema.Draft7Validator(load_schema(CONFIG_SCHEMA))
    errors: List[str] = []
    for error in sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.path))):
        path = ".".join(str(p) for p in error.path) or "<root>"
        errors.append(f"{path}: {error.message}")
    return ConfigValidationResult(is_valid=not errors, errors=errors)


def config_from_dict(document: Mapping[str, Any], *, source: Optional[str] = None) -> MhsConfig:
    result = validate_config_document(document)
    if not result.is_valid:
        raise ConfigValidationError(result.errors, source=source)
    try:
        esf = scheme_from_config(document.get("esf", {}))
    except ValueError as exc:
        raise ConfigValidationError([f"esf: {exc}"], source=source) from exc
    try:
        return MhsConfig(
            c_l=int(document["c_l"]),
            n_heads=int(document["n_heads"]),
            subspace_dim=int(document["subspace_dim"]),
            k_routes=int(document.get("k_routes", ROUTES_PER_PATTERN)),
            patterns=tuple(document.get("patterns", ())),
            esf=esf,
            tail_projection=bool(document.get("tail_projection", True)),
            ssm=SsmConfig(**document.get("ssm", {})),
            seed=int(document.get("seed", 0)),
        )
    except ConfigValidationError as exc:
        raise ConfigValidationError(exc.errors, source=source) from exc


def config_to_dict(config: MhsConfig) -> Dict[str, Any]:
    return {
        "c_l": config.c_l,
        "n_heads": config.n_heads,
        "subspace_dim": config.subspace_dim,
        "k_routes": config.k_routes,
        "patterns": [p.value for p in config.patterns],
        "esf": scheme_to_config(config.esf),
        "tail_projection": config.tail_projection,
        "ssm": {
            "state_dim": config.ssm.state_dim,
            "expansion": config.ssm.expansion,
            "conv_width": config.ssm.conv_width,
            "conv_on": config.ssm.conv_on,
        },
        "seed": config.seed,
    }


def load_config(path: Union[str, Path]) -> MhsConfig:
    """Read a JSON (or ``.yaml``/``.yml``) config file and validate it.

    Raises:
        ConfigValidationError: unreadable, unparsable or invalid documents.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                document = yaml.safe_load(f)
            else:
                document = json.load(f)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        raise ConfigValidationError([f"could not read config: {exc}"], source=str(path)) from exc
    if not isinstance(document, Mapping):
        raise ConfigValidationError(["<root>: config MUST be an object"], source=str(path))
    return config_from_dict(document, source=str(path))


def save_config(config: MhsConfig, path: Union[str, Path]) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        json.dump(config_to_dict(config), f, indent=2)
        f.write("\n")


__all__ = [
    "LN_EPS",
    "DEFAULT_PATTERNS",
    "default_patterns",
    "SsmConfig",
    "MhsConfig",
    "default_config",
    "ConfigValidationResult",
    "validate_config_document",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "save_config",
]
