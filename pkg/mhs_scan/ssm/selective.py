# component_id: ssm_selective
# kind: runtime_module
# area: ssm
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Input-dependent (selective) scan and the gated sequence block run by each scan head.

"""
Selective scan and the per-head sequence block.

The block maps a channel-first sequence batch ``(B, S, L)`` to the same
shape::

    u = x^T                                  (B, L, S)
    p = u W_in                               (B, L, S_inner)
    v = silu(causal_depthwise_conv(p))       conv skipped when conv_w is None
    g = silu(u W_gate)
    s = selective_scan(v)
    y = (s * g) W_out                        back to (B, S, L)

Inside :func:`selective_scan` every step derives its own timescale and
input/output vectors from the current input, discretizes with the
zero-order hold and advances a diagonal state of size ``N`` per channel.

The ``*_with_cache`` variants also return the intermediates the backward
pass in :mod:`mhs_scan.gradcheck.backward` consumes.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..core import Tensor, as_tensor, project_last, sequential_sum, silu, softplus
from ..errors import DimensionError
from .discretization import discretize, zoh_phi

LOGGER_NAME = "mhs_scan.ssm"
logger = logging.getLogger(LOGGER_NAME)

DEFAULT_STATE_DIM = 16
DEFAULT_EXPANSION = 2
DEFAULT_CONV_WIDTH = 3
DELTA_INIT_RANGE = (1e-3, 1e-1)
# softplus underflows to 0 below z ~ -745
DELTA_FLOOR = float(np.finfo(np.float64).tiny)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MambaWeights:
    """Learnable arrays of one head's sequence block.

    Shapes, with ``S`` the subspace dimension, ``S_inner`` the expanded
    width and ``N`` the state size::

        W_in, W_gate   (S, S_inner)
        conv_w         (S_inner, width) or None
        W_delta        (S_inner, S_inner)
        b_delta        (S_inner,)
        W_B, W_C       (S_inner, N)
        A              (S_inner, N)
        D_skip         (S_inner,)
        W_out          (S_inner, S)
        b_B, b_C       (N,) or None
    """

    W_in: Tensor
    W_gate: Tensor
    conv_w: Optional[Tensor]
    W_delta: Tensor
    b_delta: Tensor
    W_B: Tensor
    W_C: Tensor
    A: Tensor
    D_skip: Tensor
    W_out: Tensor
    b_B: Optional[Tensor] = None
    b_C: Optional[Tensor] = None

    def __post_init__(self) -> None:
        if np.ndim(self.W_in) != 2 or np.ndim(self.A) != 2:
            raise DimensionError("MambaWeights.W_in and A must be 2-D", (np.shape(self.W_in), np.shape(self.A)))
        S, Si = np.shape(self.W_in)
        N = np.shape(self.A)[-1]
        expected = {
            "W_gate": (S, Si),
            "W_delta": (Si, Si),
            "b_delta": (Si,),
            "W_B": (Si, N),
            "W_C": (Si, N),
            "A": (Si, N),
            "D_skip": (Si,),
            "W_out": (Si, S),
        }
        if self.b_B is not None:
            expected["b_B"] = (N,)
        if self.b_C is not None:
            expected["b_C"] = (N,)
        for name, shape in expected.items():
            actual = tuple(np.shape(getattr(self, name)))
            if actual != shape:
                raise DimensionError(f"MambaWeights.{name} has shape {actual}, expected {shape}")
        if self.conv_w is not None and (np.ndim(self.conv_w) != 2 or np.shape(self.conv_w)[0] != Si):
            raise DimensionError("MambaWeights.conv_w must be (S_inner, width)", np.shape(self.conv_w))

    @property
    def subspace_dim(self) -> int:
        return int(np.shape(self.W_in)[0])

    @property
    def inner_dim(self) -> int:
        return int(np.shape(self.W_in)[1])

    @property
    def state_dim(self) -> int:
        return int(np.shape(self.A)[1])

    def named_arrays(self) -> Dict[str, Tensor]:
        """Present arrays keyed by field name, in declaration order."""
        out: Dict[str, Tensor] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is not None:
                out[f.name] = value
        return out

    def replace(self, **changes: Optional[Tensor]) -> "MambaWeights":
        return dataclasses.replace(self, **changes)


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> Tensor:
    """Uniform in ``±sqrt(6 / (fan_in + fan_out))``."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def inverse_softplus(y: Tensor) -> Tensor:
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


def init_mamba_weights(
    subspace_dim: int,
    rng: np.random.Generator,
    *,
    state_dim: int = DEFAULT_STATE_DIM,
    expansion: int = DEFAULT_EXPANSION,
    conv_width: int = DEFAULT_CONV_WIDTH,
    conv_on: bool = True,
) -> MambaWeights:
    """Draw one head's block weights from ``rng``.

    ``A`` rows are ``-(1, 2, ..., N)``; the Δ bias is the inverse softplus of
    a log-uniform draw in ``DELTA_INIT_RANGE``; ``D_skip`` is 1.
    """
    S, Si, N = subspace_dim, expansion * subspace_dim, state_dim
    W_in = glorot_uniform(rng, S, Si)
    W_gate = glorot_uniform(rng, S, Si)
    conv_w = rng.uniform(-1.0, 1.0, size=(Si, conv_width)) / np.sqrt(conv_width) if conv_on else None
    W_delta = glorot_uniform(rng, Si, Si)
    lo, hi = np.log(DELTA_INIT_RANGE[0]), np.log(DELTA_INIT_RANGE[1])
    b_delta = inverse_softplus(np.exp(rng.uniform(lo, hi, size=Si)))
    W_B = glorot_uniform(rng, Si, N)
    W_C = glorot_uniform(rng, Si, N)
    A = -np.tile(np.arange(1, N + 1, dtype=np.float64), (Si, 1))
    D_skip = np.ones(Si, dtype=np.float64)
    W_out = glorot_uniform(rng, Si, S)
    return MambaWeights(W_in, W_gate, conv_w, W_delta, b_delta, W_B, W_C, A, D_skip, W_out)


# ---------------------------------------------------------------------------
# Causal depthwise convolution
# ---------------------------------------------------------------------------

def causal_depthwise_conv(x: Tensor, taps: Tensor) -> Tensor:
    """Per-channel causal convolution over the time axis of ``x`` (..., L, D).

    ``taps`` is ``(D, width)`` ordered oldest to newest; the last tap
    multiplies the current step. Steps before the start read zeros.
    """
    x = np.asarray(x, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    if taps.ndim != 2 or taps.shape[0] != x.shape[-1]:
        raise DimensionError("conv taps must be (D, width) with D the channel extent", x.shape, taps.shape)
    L, width = x.shape[-2], taps.shape[1]
    pad = np.zeros(x.shape[:-2] + (width - 1, x.shape[-1]), dtype=np.float64)
    padded = np.concatenate([pad, x], axis=-2)
    out = np.zeros_like(x)
    for j in range(width):
        out = out + taps[:, j] * padded[..., j:j + L, :]
    return out


# ---------------------------------------------------------------------------
# Selective scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SelectiveCache:
    u: Tensor
    z: Tensor
    delta: Tensor
    B_t: Tensor
    C_t: Tensor
    dA: Tensor
    A_bar: Tensor
    phi: Tensor
    B_bar: Tensor
    states: Tensor


def selective_scan_with_cache(u: Tensor, weights: MambaWeights) -> Tuple[Tensor, SelectiveCache]:
    """Selective scan of ``u`` (..., L, D) with ``D == weights.inner_dim``.

    Leading axes are independent sequences; time runs strictly in order.
    """
    u = as_tensor(u, name="selective_scan input")
    if u.ndim < 2 or u.shape[-1] != weights.inner_dim:
        raise DimensionError(f"selective_scan expects (..., L, {weights.inner_dim})", u.shape)

    z = project_last(u, weights.W_delta) + weights.b_delta
    delta = np.maximum(softplus(z), DELTA_FLOOR)
    B_t = project_last(u, weights.W_B)
    C_t = project_last(u, weights.W_C)
    if weights.b_B is not None:
        B_t = B_t + weights.b_B
    if weights.b_C is not None:
        C_t = C_t + weights.b_C

    # (..., L, D, N)
    A_bar, B_bar = discretize(delta[..., None], weights.A, B_t[..., None, :])
    dA = delta[..., None] * weights.A
    phi = zoh_phi(dA)

    L = u.shape[-2]
    h = np.zeros(u.shape[:-2] + weights.A.shape, dtype=np.float64)
    states = np.empty(A_bar.shape, dtype=np.float64)
    y = np.empty(u.shape, dtype=np.float64)
    for t in range(L):
        h = A_bar[..., t, :, :] * h + B_bar[..., t, :, :] * u[..., t, :, None]
        states[..., t, :, :] = h
        y[..., t, :] = sequential_sum(C_t[..., t, None, :] * h, -1) + weights.D_skip * u[..., t, :]

    return y, SelectiveCache(u, z, delta, B_t, C_t, dA, A_bar, phi, B_bar, states)


def selective_scan(u: Tensor, weights: MambaWeights) -> Tensor:
    return selective_scan_with_cache(u, weights)[0]


# ---------------------------------------------------------------------------
# Gated block
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MambaCache:
    u: Tensor
    p: Tensor
    c: Tensor
    v: Tensor
    gate_pre: Tensor
    g: Tensor
    s: Tensor
    scan: SelectiveCache


def mamba_block_with_cache(x_seq: Tensor, weights: MambaWeights) -> Tuple[Tensor, MambaCache]:
    x_seq = as_tensor(x_seq, name="mamba_block input")
    if x_seq.ndim != 3 or x_seq.shape[1] != weights.subspace_dim:
        raise DimensionError(f"mamba_block expects (B, {weights.subspace_dim}, L)", x_seq.shape)

    u = np.ascontiguousarray(np.swapaxes(x_seq, 1, 2))
    p = project_last(u, weights.W_in)
    c = causal_depthwise_conv(p, weights.conv_w) if weights.conv_w is not None else p
    v = silu(c)
    gate_pre = project_last(u, weights.W_gate)
    g = silu(gate_pre)
    s, scan = selective_scan_with_cache(v, weights)
    y = project_last(s * g, weights.W_out)
    return np.ascontiguousarray(np.swapaxes(y, 1, 2)), MambaCache(u, p, c, v, gate_pre, g, s, scan)


def mamba_block(x_seq: Tensor, weights: MambaWeights) -> Tensor:
    """Run the block on ``x_seq`` (B, S, L); the batch axis may hold several routes."""
    return mamba_block_with_cache(x_seq, weights)[0]


__all__ = [
    "DEFAULT_STATE_DIM",
    "DEFAULT_EXPANSION",
    "DEFAULT_CONV_WIDTH",
    "DELTA_INIT_RANGE",
    "DELTA_FLOOR",
    "MambaWeights",
    "glorot_uniform",
    "inverse_softplus",
    "init_mamba_weights",
    "causal_depthwise_conv",
    "SelectiveCache",
    "selective_scan_with_cache",
    "selective_scan",
    "MambaCache",
    "mamba_block_with_cache",
    "mamba_block",
]
