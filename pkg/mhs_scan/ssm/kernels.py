# component_id: ssm_kernels
# kind: runtime_module
# area: ssm
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Linear-recurrence and global-convolution forms of a discrete diagonal SSM.

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import Tensor, sequential_sum
from ..errors import ContractError, DimensionError


@dataclass(frozen=True, eq=False)
class ConvKernel:
    """Structured kernel ``K[i] = C . A_bar^i . B_bar`` for ``i = 0 .. L-1``."""

    values: Tensor

    @property
    def length(self) -> int:
        return int(self.values.shape[0])


def _per_step(param: Tensor, L: int, name: str) -> Tensor:
    p = np.atleast_1d(np.asarray(param, dtype=np.float64))
    if p.ndim == 1:
        return np.broadcast_to(p, (L, p.shape[0]))
    if p.ndim != 2 or p.shape[0] != L:
        raise DimensionError(f"{name} must be (N,) or (L, N) with L={L}", p.shape)
    return p


def recurrence_states(A_bar: Tensor, B_bar: Tensor, C: Tensor, x: Tensor) -> Tuple[Tensor, Tensor]:
    """Run ``h_t = A_bar h_{t-1} + B_bar x_t``, ``y_t = C . h_t`` from ``h_0 = 0``.

    Parameters may be time invariant (N,) or per step (L, N).
    Returns ``(y, h)`` with ``h`` of shape (L, N).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("recurrence input must be a 1-D sequence", x.shape)
    L = x.shape[0]
    a = _per_step(A_bar, L, "A_bar")
    b = _per_step(B_bar, L, "B_bar")
    c = _per_step(C, L, "C")
    if not a.shape[1] == b.shape[1] == c.shape[1]:
        raise DimensionError("state sizes differ", a.shape, b.shape, c.shape)

    h = np.zeros(a.shape[1], dtype=np.float64)
    hs = np.empty((L, a.shape[1]), dtype=np.float64)
    y = np.empty(L, dtype=np.float64)
    for t in range(L):
        h = a[t] * h + b[t] * x[t]
        hs[t] = h
        y[t] = sequential_sum(c[t] * h, 0)
    return y, hs


def recurrence_scan(A_bar: Tensor, B_bar: Tensor, C: Tensor, x: Tensor) -> Tensor:
    """Output of the linear recurrence; see :func:`recurrence_states`."""
    return recurrence_states(A_bar, B_bar, C, x)[0]


def conv_kernel(A_bar: Tensor, B_bar: Tensor, C: Tensor, L: int) -> ConvKernel:
    """Materialize the length-``L`` kernel by repeated elementwise products.

    Raises:
        ContractError: for per-step parameters; the convolution form only
            matches the recurrence when parameters are time invariant.
    """
    a, b, c = (np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in (A_bar, B_bar, C))
    if a.ndim != 1 or b.ndim != 1 or c.ndim != 1:
        raise ContractError("conv_kernel requires time-invariant (N,) parameters")
    if not a.shape == b.shape == c.shape:
        raise DimensionError("state sizes differ", a.shape, b.shape, c.shape)
    if L < 1:
        raise DimensionError(f"kernel length must be >= 1, got {L}")

    values = np.empty(L, dtype=np.float64)
    power_b = b.copy()
    for i in range(L):
        values[i] = sequential_sum(c * power_b, 0)
        power_b = power_b * a
    return ConvKernel(values)


def conv_scan(x: Tensor, kernel: ConvKernel) -> Tensor:
    """Causal convolution ``y_t = sum_{i<=t} K[i] x[t-i]``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != kernel.length:
        raise DimensionError("input length differs from kernel length", x.shape, kernel.values.shape)
    L = x.shape[0]
    y = np.zeros(L, dtype=np.float64)
    for i in range(L):
        y[i:] += kernel.values[i] * x[: L - i]
    return y


__all__ = ["ConvKernel", "recurrence_states", "recurrence_scan", "conv_kernel", "conv_scan"]
