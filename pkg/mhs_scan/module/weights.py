# component_id: mhs_weights
# kind: runtime_module
# area: module
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Learnable arrays of the multi-head scan module, seeded initialization and parameter accounting.

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..core import Tensor
from ..errors import ConfigValidationError, DimensionError
from ..ssm import MambaWeights, glorot_uniform, init_mamba_weights
from .config import MhsConfig

LOGGER_NAME = "mhs_scan.module"
logger = logging.getLogger(LOGGER_NAME)

Shape = Tuple[int, ...]

_MAMBA_FIELDS = tuple(f.name for f in dataclasses.fields(MambaWeights))
_MAMBA_OPTIONAL = frozenset({"conv_w", "b_B", "b_C"})


@dataclass(frozen=True, eq=False)
class MhsWeights:
    """All learnable arrays of one module instance.

    Arrays are addressed by dotted names (``head.0.proj``,
    ``head.2.mamba.W_delta``, ``head.1.esf_w``, ``ln_gamma``, ``tail_proj``);
    :meth:`named_arrays` yields them in the canonical order used by the
    weights container and the gradient checker.
    """

    head_proj: Tuple[Tensor, ...]
    mamba: Tuple[MambaWeights, ...]
    ln_gamma: Tensor
    ln_beta: Tensor
    esf_w: Optional[Tuple[Tensor, ...]] = None
    tail_proj: Optional[Tensor] = None

    @property
    def n_heads(self) -> int:
        return len(self.head_proj)

    def named_arrays(self) -> Dict[str, Tensor]:
        out: Dict[str, Tensor] = {}
        for h in range(self.n_heads):
            out[f"head.{h}.proj"] = self.head_proj[h]
            for name, arr in self.mamba[h].named_arrays().items():
                out[f"head.{h}.mamba.{name}"] = arr
            if self.esf_w is not None:
                out[f"head.{h}.esf_w"] = self.esf_w[h]
        out["ln_gamma"] = self.ln_gamma
        out["ln_beta"] = self.ln_beta
        if self.tail_proj is not None:
            out["tail_proj"] = self.tail_proj
        return out

    @classmethod
    def from_named_arrays(cls, arrays: Mapping[str, Tensor]) -> "MhsWeights":
        """Inverse of :meth:`named_arrays`.

        Raises:
            DimensionError: for missing, unknown or inconsistent arrays.
        """
        heads: Dict[int, Dict[str, Tensor]] = {}
        top: Dict[str, Tensor] = {}
        for name, arr in arrays.items():
            parts = name.split(".")
            if parts[0] == "head" and len(parts) >= 3 and parts[1].isdigit():
                heads.setdefault(int(parts[1]), {})[".".join(parts[2:])] = np.asarray(arr, dtype=np.float64)
            elif name in ("ln_gamma", "ln_beta", "tail_proj"):
                top[name] = np.asarray(arr, dtype=np.float64)
            else:
                raise DimensionError(f"unknown weight array {name!r}")
        n = len(heads)
        if sorted(heads) != list(range(n)) or n == 0:
            raise DimensionError(f"head indices must be 0..n-1, got {sorted(heads)}")
        for key in ("ln_gamma", "ln_beta"):
            if key not in top:
                raise DimensionError(f"weight array {key!r} is missing")

        head_proj, mamba, esf_w = [], [], []
        for h in range(n):
            parts = heads[h]
            if "proj" not in parts:
                raise DimensionError(f"weight array 'head.{h}.proj' is missing")
            head_proj.append(parts["proj"])
            fields = {}
            for field_name in _MAMBA_FIELDS:
                key = f"mamba.{field_name}"
                if key in parts:
                    fields[field_name] = parts[key]
                elif field_name in _MAMBA_OPTIONAL:
                    fields[field_name] = None
                else:
                    raise DimensionError(f"weight array 'head.{h}.{key}' is missing")
            mamba.append(MambaWeights(**fields))
            if "esf_w" in parts:
                esf_w.append(parts["esf_w"])
        if esf_w and len(esf_w) != n:
            raise DimensionError("esf_w must be present for every head or for none")
        return cls(
            head_proj=tuple(head_proj),
            mamba=tuple(mamba),
            ln_gamma=top["ln_gamma"],
            ln_beta=top["ln_beta"],
            esf_w=tuple(esf_w) if esf_w else None,
            tail_proj=top.get("tail_proj"),
        )

    def with_array(self, name: str, value: Tensor) -> "MhsWeights":
        """Copy with the array ``name`` replaced."""
        arrays = self.named_arrays()
        if name not in arrays:
            raise KeyError(name)
        arrays[name] = np.asarray(value, dtype=np.float64)
        return MhsWeights.from_named_arrays(arrays)


# ---------------------------------------------------------------------------
# Shapes and accounting
# ---------------------------------------------------------------------------

def expected_shapes(config: MhsConfig) -> Dict[str, Shape]:
    """Name -> shape of every array :func:`init_weights` creates for ``config``."""
    S, Si, N, C = config.subspace_dim, config.inner_dim, config.ssm.state_dim, config.c_l
    mamba: Dict[str, Shape] = {
        "W_in": (S, Si),
        "W_gate": (S, Si),
    }
    if config.ssm.conv_on:
        mamba["conv_w"] = (Si, config.ssm.conv_width)
    mamba.update(
        {
            "W_delta": (Si, Si),
            "b_delta": (Si,),
            "W_B": (Si, N),
            "W_C": (Si, N),
            "A": (Si, N),
            "D_skip": (Si,),
            "W_out": (Si, S),
        }
    )
    out: Dict[str, Shape] = {}
    for h in range(config.n_heads):
        out[f"head.{h}.proj"] = (S, C)
        for name, shape in mamba.items():
            out[f"head.{h}.mamba.{name}"] = shape
        if config.esf.uses_mix:
            out[f"head.{h}.esf_w"] = (1, 2)
    out["ln_gamma"] = (config.concat_dim,)
    out["ln_beta"] = (config.concat_dim,)
    if config.tail_projection:
        out["tail_proj"] = (C, config.concat_dim)
    return out


def check_weights(weights: MhsWeights, config: MhsConfig) -> List[str]:
    """One message per array whose presence or shape disagrees with ``config``."""
    expected = expected_shapes(config)
    actual = {name: tuple(np.shape(arr)) for name, arr in weights.named_arrays().items()}
    errors = [f"{name}: missing (expected shape {list(shape)})" for name, shape in expected.items() if name not in actual]
    errors += [f"{name}: not part of this config" for name in actual if name not in expected]
    errors += [
        f"{name}: shape {list(actual[name])} != expected {list(shape)}"
        for name, shape in expected.items()
        if name in actual and actual[name] != shape
    ]
    return errors


def require_weights(weights: MhsWeights, config: MhsConfig) -> None:
    errors = check_weights(weights, config)
    if errors:
        raise ConfigValidationError(errors)


@dataclass(frozen=True)
class ParamBreakdown:
    head_projection: int
    ssm: int
    esf: int
    layer_norm: int
    tail: int
    per_head_ssm: int

    @property
    def total(self) -> int:
        return self.head_projection + self.ssm + self.esf + self.layer_norm + self.tail

    def as_dict(self) -> Dict[str, int]:
        return {
            "head_projection": self.head_projection,
            "ssm": self.ssm,
            "esf": self.esf,
            "layer_norm": self.layer_norm,
            "tail": self.tail,
            "per_head_ssm": self.per_head_ssm,
            "total": self.total,
        }


def param_breakdown(config: MhsConfig) -> ParamBreakdown:
    counts = {"proj": 0, "mamba": 0, "esf_w": 0, "ln": 0, "tail": 0}
    for name, shape in expected_shapes(config).items():
        size = int(np.prod(shape, dtype=np.int64))
        if name.endswith(".proj"):
            counts["proj"] += size
        elif ".mamba." in name:
            counts["mamba"] += size
        elif name.endswith(".esf_w"):
            counts["esf_w"] += size
        elif name.startswith("ln_"):
            counts["ln"] += size
        else:
            counts["tail"] += size
    return ParamBreakdown(
        head_projection=counts["proj"],
        ssm=counts["mamba"],
        esf=counts["esf_w"],
        layer_norm=counts["ln"],
        tail=counts["tail"],
        per_head_ssm=counts["mamba"] // config.n_heads,
    )


def param_count(config: MhsConfig) -> int:
    """Exact number of scalar weights; the route count does not enter."""
    return param_breakdown(config).total


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

def init_weights(config: MhsConfig, seed: Optional[int] = None) -> MhsWeights:
    """Deterministic weights for ``config``; ``seed`` defaults to ``config.seed``."""
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    S, C = config.subspace_dim, config.c_l

    head_proj, mamba, esf_w = [], [], []
    for _ in range(config.n_heads):
        head_proj.append(glorot_uniform(rng, S, C))
        mamba.append(
            init_mamba_weights(
                S,
                rng,
                state_dim=config.ssm.state_dim,
                expansion=config.ssm.expansion,
                conv_width=config.ssm.conv_width,
                conv_on=config.ssm.conv_on,
            )
        )
        if config.esf.uses_mix:
            esf_w.append(np.asarray([config.esf.w], dtype=np.float64))

    tail = glorot_uniform(rng, C, config.concat_dim) if config.tail_projection else None
    logger.debug("initialized weights seed=%d heads=%d S=%d", seed, config.n_heads, S)
    return MhsWeights(
        head_proj=tuple(head_proj),
        mamba=tuple(mamba),
        ln_gamma=np.ones(config.concat_dim, dtype=np.float64),
        ln_beta=np.zeros(config.concat_dim, dtype=np.float64),
        esf_w=tuple(esf_w) if esf_w else None,
        tail_proj=tail,
    )


__all__ = [
    "MhsWeights",
    "expected_shapes",
    "check_weights",
    "require_weights",
    "ParamBreakdown",
    "param_breakdown",
    "param_count",
    "init_weights",
]
