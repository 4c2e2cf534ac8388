# component_id: ssm_discretization
# kind: runtime_module
# area: ssm
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Zero-order-hold discretization of diagonal continuous-time state-space parameters.

"""
Zero-order hold for a diagonal state matrix.

The continuous system ``h'(t) = A h(t) + B x(t)``, ``y(t) = C h(t)`` is
held constant over a step of length ``delta``. With diagonal ``A`` the
matrix exponential and inverse reduce to per-state scalars::

    A_bar = exp(delta * A)
    B_bar = phi(delta * A) * delta * B,   phi(z) = (exp(z) - 1) / z

``phi`` switches to its Taylor series below ``SERIES_THRESHOLD`` to remove
the 0/0 at ``z -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import Tensor
from ..errors import DomainError

SERIES_THRESHOLD = 1e-4


def zoh_phi(z: Tensor) -> Tensor:
    """``(exp(z) - 1) / z`` with the series ``1 + z/2 + z^2/6`` for ``|z| < 1e-4``."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < SERIES_THRESHOLD
    exact = np.divide(np.expm1(z), z, out=np.ones_like(z), where=~small)
    series = 1.0 + z / 2.0 + (z * z) / 6.0
    return np.where(small, series, exact)


def zoh_phi_grad(z: Tensor) -> Tensor:
    """Derivative of :func:`zoh_phi` as implemented (branch by branch)."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < SERIES_THRESHOLD
    exact = np.divide(np.exp(z) - zoh_phi(z), z, out=np.full_like(z, 0.5), where=~small)
    series = 0.5 + z / 3.0
    return np.where(small, series, exact)


def discretize(delta: Tensor, A: Tensor, B: Tensor) -> Tuple[Tensor, Tensor]:
    """Return ``(A_bar, B_bar)``; all arguments broadcast elementwise.

    Raises:
        DomainError: if any ``delta <= 0``.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if np.any(delta <= 0.0) or not np.all(np.isfinite(delta)):
        raise DomainError("timescale delta must be finite and > 0")
    dA = delta * np.asarray(A, dtype=np.float64)
    A_bar = np.exp(dA)
    B_bar = zoh_phi(dA) * delta * np.asarray(B, dtype=np.float64)
    return A_bar, B_bar


@dataclass(frozen=True, eq=False)
class SsmParams:
    """Continuous diagonal SSM parameters for one channel.

    ``A``: (N,) with negative entries. ``B_in``/``C_out``: (N,) when time
    invariant or (L, N) per step. ``delta``: scalar or (L,).
    """

    A: Tensor
    B_in: Tensor
    C_out: Tensor
    delta: Tensor

    @property
    def state_dim(self) -> int:
        return int(np.asarray(self.A).shape[-1])

    @property
    def is_time_invariant(self) -> bool:
        return (
            np.ndim(self.B_in) <= 1
            and np.ndim(self.C_out) <= 1
            and np.ndim(self.delta) == 0
        )

    def discretized(self) -> Tuple[Tensor, Tensor, Tensor]:
        """``(A_bar, B_bar, C)`` ready for the recurrence or kernel forms."""
        delta = np.asarray(self.delta, dtype=np.float64)
        if delta.ndim == 1:
            delta = delta[:, None]
        A_bar, B_bar = discretize(delta, self.A, self.B_in)
        return A_bar, B_bar, np.asarray(self.C_out, dtype=np.float64)


__all__ = ["SERIES_THRESHOLD", "zoh_phi", "zoh_phi_grad", "discretize", "SsmParams"]
