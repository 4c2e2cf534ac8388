# component_id: tensor_ops
# kind: runtime_module
# area: core
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Float64 tensor primitives with pinned summation order for every other MHS module.

"""
Dense tensor primitives.

A :data:`Tensor` is a float64 ``numpy.ndarray``. The helpers here add the
shape checks the rest of the package relies on and pin the floating-point
summation order:

- ``matmul`` accumulates one rank-1 update per inner index, in order, so the
  result is bit-identical to a naive triple loop regardless of BLAS.
- ``reduce`` accumulates slices along the axis left to right.

No helper mutates its inputs.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from ..errors import DimensionError, DomainError

Tensor = npt.NDArray[np.float64]
Scalar = Union[int, float, np.floating]


class ReduceKind(str, Enum):
    MEAN = "mean"
    MAX = "max"
    MIN = "min"
    STD = "std"
    SUM = "sum"


class ElementwiseOp(str, Enum):
    EXP = "exp"
    RELU = "relu"
    SIGMOID = "sigmoid"
    SOFTPLUS = "softplus"
    SILU = "silu"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    SCALE = "scale"


_UNARY = {ElementwiseOp.EXP, ElementwiseOp.RELU, ElementwiseOp.SIGMOID, ElementwiseOp.SOFTPLUS, ElementwiseOp.SILU}


# ---------------------------------------------------------------------------
# Coercion
# ---------------------------------------------------------------------------

def as_tensor(value: Any, *, name: str = "input", check_finite: bool = True) -> Tensor:
    """Return ``value`` as a C-ordered float64 array.

    Raises:
        DomainError: if ``check_finite`` and the array holds NaN or inf.
    """
    arr = np.ascontiguousarray(value, dtype=np.float64)
    if check_finite and not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def _require_rank(x: Tensor, rank: int, name: str) -> None:
    if x.ndim != rank:
        raise DimensionError(f"{name} must have rank {rank}, got rank {x.ndim}", x.shape)


# ---------------------------------------------------------------------------
# Matrix product
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of ``a`` (M×K) and ``b`` (K×N) with fixed k-order accumulation."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _require_rank(a, 2, "matmul lhs")
    _require_rank(b, 2, "matmul rhs")
    if a.shape[1] != b.shape[0]:
        raise DimensionError("matmul inner extents differ", a.shape, b.shape)

    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    for k in range(a.shape[1]):
        out += np.multiply.outer(a[:, k], b[k, :])
    return out


def transpose(x: Tensor, axes: Tuple[int, ...]) -> Tensor:
    """Contiguous copy of ``x`` with axes permuted."""
    x = np.asarray(x, dtype=np.float64)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f"axes {axes} are not a permutation of rank {x.ndim}", x.shape)
    return np.ascontiguousarray(np.transpose(x, axes))


def project_last(x: Tensor, w: Tensor) -> Tensor:
    """Apply ``w`` (K×N) to the last axis of ``x`` (..., K) via :func:`matmul`."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != w.shape[0]:
        raise DimensionError("projection input extent differs from weight rows", x.shape, w.shape)
    lead = x.shape[:-1]
    flat = matmul(x.reshape(-1, x.shape[-1]), w)
    return flat.reshape(*lead, w.shape[1])


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def _check_axis(x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"axis {axis} out of range for rank {x.ndim}", x.shape)
    axis = axis % x.ndim
    if x.shape[axis] < 1:
        raise DimensionError(f"reduction axis {axis} is empty", x.shape)
    return axis


def sequential_sum(x: Tensor, axis: int) -> Tensor:
    """Sum along ``axis`` accumulating slices strictly left to right."""
    moved = np.moveaxis(x, axis, 0)
    acc = np.array(moved[0], dtype=np.float64, copy=True)
    for i in range(1, moved.shape[0]):
        acc = acc + moved[i]
    return acc


def reduce(
    x: Tensor,
    axis: int,
    kind: Union[ReduceKind, str],
    *,
    keepdims: bool = False,
) -> Tensor:
    """Reduce ``x`` along ``axis``.

    ``std`` is the population standard deviation, computed on values shifted
    by the first slice so that identical inputs give exactly zero.
    """
    x = np.asarray(x, dtype=np.float64)
    axis = _check_axis(x, axis)
    kind = ReduceKind(kind)
    count = x.shape[axis]

    if kind is ReduceKind.SUM:
        out = sequential_sum(x, axis)
    elif kind is ReduceKind.MEAN:
        out = sequential_sum(x, axis) / count
    elif kind is ReduceKind.MAX:
        out = np.max(x, axis=axis)
    elif kind is ReduceKind.MIN:
        out = np.min(x, axis=axis)
    else:
        shifted = x - np.take(x, [0], axis=axis)
        centered = shifted - np.expand_dims(sequential_sum(shifted, axis) / count, axis)
        out = np.sqrt(sequential_sum(centered * centered, axis) / count)

    if keepdims:
        out = np.expand_dims(out, axis)
    return out


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------

def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0.0)


def sigmoid(x: Tensor) -> Tensor:
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def softplus(x: Tensor) -> Tensor:
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def silu(x: Tensor) -> Tensor:
    x = np.asarray(x, dtype=np.float64)
    return x * sigmoid(x)


_UNARY_FUNCS = {
    ElementwiseOp.EXP: np.exp,
    ElementwiseOp.RELU: relu,
    ElementwiseOp.SIGMOID: sigmoid,
    ElementwiseOp.SOFTPLUS: softplus,
    ElementwiseOp.SILU: silu,
}

_BINARY_FUNCS = {
    ElementwiseOp.ADD: np.add,
    ElementwiseOp.SUB: np.subtract,
    ElementwiseOp.MUL: np.multiply,
    ElementwiseOp.SCALE: np.multiply,
}


def elementwise(
    x: Tensor,
    f: Union[ElementwiseOp, str],
    other: Optional[Union[Tensor, Scalar]] = None,
) -> Tensor:
    """Apply ``f`` pointwise.

    Binary forms accept equal shapes or a 0-d scalar on either side; ``scale``
    requires ``other`` to be a scalar.
    """
    op = ElementwiseOp(f)
    x = np.asarray(x, dtype=np.float64)
    if op in _UNARY:
        if other is not None:
            raise DimensionError(f"{op.value} is unary but received a second operand")
        return np.asarray(_UNARY_FUNCS[op](x), dtype=np.float64)

    if other is None:
        raise DimensionError(f"{op.value} requires a second operand")
    y = np.asarray(other, dtype=np.float64)
    if op is ElementwiseOp.SCALE and y.ndim != 0:
        raise DimensionError("scale factor must be a scalar", y.shape)
    if x.shape != y.shape and x.ndim != 0 and y.ndim != 0:
        raise DimensionError(f"{op.value} operands are not broadcastable", x.shape, y.shape)
    return np.asarray(_BINARY_FUNCS[op](x, y), dtype=np.float64)


# ---------------------------------------------------------------------------
# Layer normalization
# ---------------------------------------------------------------------------

def layer_norm_stats(x: Tensor, axis: int, eps: float) -> Tuple[Tensor, Tensor]:
    """Return ``(centered, inv_std)`` along ``axis`` (both broadcastable to ``x``).

    ``inv_std`` is 0 where ``var + eps`` is 0, so constant inputs normalize to 0.
    """
    axis = _check_axis(x, axis)
    shifted = x - np.take(x, [0], axis=axis)
    centered = shifted - reduce(shifted, axis, ReduceKind.MEAN, keepdims=True)
    var = sequential_sum(centered * centered, axis) / x.shape[axis]
    denom = np.sqrt(np.expand_dims(var, axis) + eps)
    inv_std = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0.0)
    return centered, inv_std


def layer_norm(x: Tensor, axis: int, gamma: Tensor, beta: Tensor, eps: float) -> Tensor:
    """Normalize ``x`` along ``axis`` and apply the affine ``gamma``/``beta``."""
    x = np.asarray(x, dtype=np.float64)
    axis = _check_axis(x, axis)
    gamma = np.asarray(gamma, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    extent = x.shape[axis]
    if gamma.shape != (extent,) or beta.shape != (extent,):
        raise DimensionError("layer_norm affine extents must equal the normalized extent", x.shape, gamma.shape, beta.shape)

    centered, inv_std = layer_norm_stats(x, axis, eps)
    bshape = [1] * x.ndim
    bshape[axis] = extent
    return centered * inv_std * gamma.reshape(bshape) + beta.reshape(bshape)


__all__ = [
    "Tensor",
    "ReduceKind",
    "ElementwiseOp",
    "as_tensor",
    "matmul",
    "project_last",
    "transpose",
    "sequential_sum",
    "reduce",
    "relu",
    "sigmoid",
    "softplus",
    "silu",
    "elementwise",
    "layer_norm_stats",
    "layer_norm",
]
