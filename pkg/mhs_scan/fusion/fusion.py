# component_id: esf_fusion
# kind: runtime_module
# area: fusion
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Fuse the K position-aligned embedding sections of one head into a single section.

"""
Embedding section fusion.

A section stack has the route axis at position 1: ``(B, K, S, L)``. All
schemes reduce that axis pointwise:

- sum:        ``z1 = sum_k y_k``
- mixpool:    ``z2 = w0 * mean_k y + w1 * max_k y``
- cv_scale:   ``z3 = z1 * gate(y_cv - t)``
- mixpool_cv: ``z4 = z2 * gate(y_cv - t)``

with ``y_cv = std_k(y) / (mean_k(y - min_k y) + eps)`` (population std).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..core import ReduceKind, Tensor, as_tensor, reduce, relu, sigmoid
from ..errors import ContractError, DimensionError
from .schemes import CvScaling, EsfScheme, GateKind, MixPoolCv, MixturePooling, SumScheme

SECTION_AXIS = 1


def _stack(stack: Tensor) -> Tensor:
    s = as_tensor(stack, name="section stack")
    if s.ndim < 2 or s.shape[SECTION_AXIS] < 1:
        raise DimensionError("section stack must be (B, K, ...) with K >= 1", s.shape)
    return s


def _mix(w: Tensor) -> Tensor:
    arr = np.asarray(w, dtype=np.float64).reshape(-1)
    if arr.shape != (2,):
        raise DimensionError("mixture weights must hold exactly two entries", np.shape(w))
    return arr


def apply_gate(x: Tensor, kind: Union[GateKind, str] = GateKind.RELU) -> Tensor:
    return relu(x) if GateKind(kind) is GateKind.RELU else sigmoid(x)


def fuse_sum(stack: Tensor) -> Tensor:
    return reduce(_stack(stack), SECTION_AXIS, ReduceKind.SUM)


def fuse_mixpool(stack: Tensor, w: Tensor) -> Tensor:
    s = _stack(stack)
    w = _mix(w)
    x0 = reduce(s, SECTION_AXIS, ReduceKind.MEAN)
    x1 = reduce(s, SECTION_AXIS, ReduceKind.MAX)
    return w[0] * x0 + w[1] * x1


def coefficient_variation(stack: Tensor, eps: float) -> Tensor:
    """Route-sensitivity of every component; 0 where all sections agree.

    Raises:
        ContractError: for a single section.
    """
    s = _stack(stack)
    if s.shape[SECTION_AXIS] < 2:
        raise ContractError("coefficient of variation needs K >= 2 sections; use the sum scheme")
    sigma = reduce(s, SECTION_AXIS, ReduceKind.STD)
    low = reduce(s, SECTION_AXIS, ReduceKind.MIN, keepdims=True)
    return sigma / (reduce(s - low, SECTION_AXIS, ReduceKind.MEAN) + eps)


def fuse_cv_scale(
    stack: Tensor,
    t: float,
    eps: float,
    gate: Union[GateKind, str] = GateKind.RELU,
) -> Tensor:
    return fuse_sum(stack) * apply_gate(coefficient_variation(stack, eps) - t, gate)


def fuse_mixpool_cv(
    stack: Tensor,
    w: Tensor,
    t: float,
    eps: float,
    gate: Union[GateKind, str] = GateKind.RELU,
) -> Tensor:
    return fuse_mixpool(stack, w) * apply_gate(coefficient_variation(stack, eps) - t, gate)


@dataclass(frozen=True, eq=False)
class EsfResult:
    """Fused section plus, for gated schemes, ``y_cv`` and the gate values."""

    fused: Tensor
    cv: Optional[Tensor] = None
    gate: Optional[Tensor] = None


def apply_scheme(stack: Tensor, scheme: EsfScheme, w: Optional[Tensor] = None) -> EsfResult:
    """Fuse ``stack`` with ``scheme``; ``w`` overrides the scheme's initial mixture."""
    s = _stack(stack)
    if isinstance(scheme, SumScheme):
        return EsfResult(fuse_sum(s))

    mix = _mix(w if w is not None else scheme.w) if isinstance(scheme, (MixturePooling, MixPoolCv)) else None
    if isinstance(scheme, MixturePooling):
        return EsfResult(fuse_mixpool(s, mix))

    if isinstance(scheme, (CvScaling, MixPoolCv)):
        cv = coefficient_variation(s, scheme.eps)
        gate = apply_gate(cv - scheme.t, scheme.gate)
        base = fuse_sum(s) if mix is None else fuse_mixpool(s, mix)
        return EsfResult(base * gate, cv, gate)

    raise TypeError(f"unsupported ESF scheme {scheme!r}")


__all__ = [
    "SECTION_AXIS",
    "apply_gate",
    "fuse_sum",
    "fuse_mixpool",
    "coefficient_variation",
    "fuse_cv_scale",
    "fuse_mixpool_cv",
    "EsfResult",
    "apply_scheme",
]
