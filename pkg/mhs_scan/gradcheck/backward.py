# component_id: backward
# kind: runtime_module
# area: gradcheck
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Hand-derived reverse-mode passes for the recurrence, selective scan, sequence block, ESF, layer norm and full module.

"""
Analytic backward passes.

Every function takes the cotangent of an output and returns cotangents of
the inputs and parameters of the matching forward function. Forward
intermediates come from the ``*_with_cache`` / ``*_with_trace`` variants.

Subgradient conventions:

- ``relu'(0) = 0``;
- max/min route the cotangent to the first (lowest-index) attaining section;
- the std cotangent is 0 where all sections coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..core import ReduceKind, Tensor, reduce, sequential_sum, sigmoid
from ..fusion import (
    SECTION_AXIS,
    EsfScheme,
    GateKind,
    apply_gate,
    coefficient_variation,
    fuse_mixpool,
    fuse_sum,
)
from ..module import ForwardTrace, MhsConfig, MhsWeights
from ..ssm import MambaCache, MambaWeights, SelectiveCache, recurrence_states, zoh_phi_grad


def _flat(x: Tensor) -> Tensor:
    return x.reshape(-1, x.shape[-1])


def _weight_grad(inputs: Tensor, cotangent: Tensor) -> Tensor:
    """Cotangent of ``W`` in ``y = x W`` over all leading axes."""
    return _flat(inputs).T @ _flat(cotangent)


def silu_grad(x: Tensor) -> Tensor:
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


# ---------------------------------------------------------------------------
# Linear recurrence
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RecurrenceGrads:
    x: Tensor
    A_bar: Tensor
    B_bar: Tensor
    C: Tensor


def backward_recurrence(A_bar: Tensor, B_bar: Tensor, C: Tensor, x: Tensor, y_bar: Tensor) -> RecurrenceGrads:
    """Reverse-time adjoint ``lam_t = A_bar_{t+1} lam_{t+1} + C_t y_bar_t``.

    Parameter cotangents keep the shape of the parameter: (N,) parameters
    accumulate over time, (L, N) ones stay per step.
    """
    x = np.asarray(x, dtype=np.float64)
    y_bar = np.asarray(y_bar, dtype=np.float64)
    _, hs = recurrence_states(A_bar, B_bar, C, x)
    L, N = hs.shape
    a, b, c = (np.broadcast_to(np.atleast_1d(np.asarray(p, dtype=np.float64)), (L, N)) for p in (A_bar, B_bar, C))

    dx = np.empty(L, dtype=np.float64)
    da = np.zeros((L, N), dtype=np.float64)
    db = np.zeros((L, N), dtype=np.float64)
    dc = np.zeros((L, N), dtype=np.float64)
    carry = np.zeros(N, dtype=np.float64)
    for t in range(L - 1, -1, -1):
        lam = carry + c[t] * y_bar[t]
        h_prev = hs[t - 1] if t > 0 else np.zeros(N, dtype=np.float64)
        dc[t] = y_bar[t] * hs[t]
        da[t] = lam * h_prev
        db[t] = lam * x[t]
        dx[t] = sequential_sum(b[t] * lam, 0)
        carry = a[t] * lam

    def _fold(grad: Tensor, param: Tensor) -> Tensor:
        return sequential_sum(grad, 0) if np.ndim(param) <= 1 else grad

    return RecurrenceGrads(dx, _fold(da, A_bar), _fold(db, B_bar), _fold(dc, C))


# ---------------------------------------------------------------------------
# Selective scan and sequence block
# ---------------------------------------------------------------------------

def backward_selective_scan(
    y_bar: Tensor,
    cache: SelectiveCache,
    weights: MambaWeights,
) -> Tuple[Tensor, Dict[str, Tensor]]:
    """Return ``(u_bar, grads)``; ``grads`` is keyed by MambaWeights field name."""
    u, states = cache.u, cache.states
    L = u.shape[-2]

    lam_shape = states.shape[:-3] + states.shape[-2:]
    carry = np.zeros(lam_shape, dtype=np.float64)
    dA_bar = np.empty_like(states)
    dB_bar = np.empty_like(states)
    dC_t = np.empty_like(cache.C_t)
    du = np.empty_like(u)
    for t in range(L - 1, -1, -1):
        lam = carry + y_bar[..., t, :, None] * cache.C_t[..., t, None, :]
        h_prev = states[..., t - 1, :, :] if t > 0 else np.zeros(lam_shape, dtype=np.float64)
        dA_bar[..., t, :, :] = lam * h_prev
        dB_bar[..., t, :, :] = lam * u[..., t, :, None]
        dC_t[..., t, :] = np.sum(y_bar[..., t, :, None] * states[..., t, :, :], axis=-2)
        du[..., t, :] = np.sum(lam * cache.B_bar[..., t, :, :], axis=-1) + weights.D_skip * y_bar[..., t, :]
        carry = cache.A_bar[..., t, :, :] * lam

    delta = cache.delta[..., None]
    B_t = cache.B_t[..., None, :]
    d_dA = dA_bar * cache.A_bar + dB_bar * zoh_phi_grad(cache.dA) * delta * B_t
    d_delta = np.sum(dB_bar * cache.phi * B_t, axis=-1) + np.sum(d_dA * weights.A, axis=-1)
    dB_t = np.sum(dB_bar * cache.phi * delta, axis=-2)
    dz = d_delta * sigmoid(cache.z)

    du = du + dz @ weights.W_delta.T + dB_t @ weights.W_B.T + dC_t @ weights.W_C.T
    grads: Dict[str, Tensor] = {
        "W_delta": _weight_grad(u, dz),
        "b_delta": np.sum(_flat(dz), axis=0),
        "W_B": _weight_grad(u, dB_t),
        "W_C": _weight_grad(u, dC_t),
        "A": np.sum((d_dA * delta).reshape((-1,) + weights.A.shape), axis=0),
        "D_skip": np.sum(_flat(y_bar * u), axis=0),
    }
    if weights.b_B is not None:
        grads["b_B"] = np.sum(_flat(dB_t), axis=0)
    if weights.b_C is not None:
        grads["b_C"] = np.sum(_flat(dC_t), axis=0)
    return du, grads


def backward_causal_conv(c_bar: Tensor, p: Tensor, taps: Tensor) -> Tuple[Tensor, Tensor]:
    """Adjoint of :func:`mhs_scan.ssm.causal_depthwise_conv`; returns ``(p_bar, taps_bar)``."""
    L, width = p.shape[-2], taps.shape[1]
    pad = np.zeros(p.shape[:-2] + (width - 1, p.shape[-1]), dtype=np.float64)
    padded = np.concatenate([pad, p], axis=-2)
    d_padded = np.zeros_like(padded)
    d_taps = np.empty_like(taps)
    for j in range(width):
        d_padded[..., j:j + L, :] += taps[:, j] * c_bar
        d_taps[:, j] = np.sum(_flat(c_bar * padded[..., j:j + L, :]), axis=0)
    return d_padded[..., width - 1:, :], d_taps


def backward_mamba_block(
    y_bar: Tensor,
    cache: MambaCache,
    weights: MambaWeights,
) -> Tuple[Tensor, Dict[str, Tensor]]:
    """Return ``(x_bar, grads)`` for the block on ``(B, S, L)``."""
    y_bar_l = np.swapaxes(np.asarray(y_bar, dtype=np.float64), 1, 2)

    q = cache.s * cache.g
    dq = y_bar_l @ weights.W_out.T
    d_s = dq * cache.g
    d_gate_pre = dq * cache.s * silu_grad(cache.gate_pre)

    dv, grads = backward_selective_scan(d_s, cache.scan, weights)
    dc = dv * silu_grad(cache.c)
    if weights.conv_w is not None:
        dp, grads["conv_w"] = backward_causal_conv(dc, cache.p, weights.conv_w)
    else:
        dp = dc

    du = d_gate_pre @ weights.W_gate.T + dp @ weights.W_in.T
    grads["W_out"] = _weight_grad(q, y_bar_l)
    grads["W_gate"] = _weight_grad(cache.u, d_gate_pre)
    grads["W_in"] = _weight_grad(cache.u, dp)
    return np.ascontiguousarray(np.swapaxes(du, 1, 2)), grads


# ---------------------------------------------------------------------------
# Embedding section fusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EsfGrads:
    """``stack`` cotangent, plus ``w`` for pooling schemes and ``t`` for gated ones."""

    stack: Tensor
    w: Optional[Tensor] = None
    t: Optional[float] = None


def _first_index_mask(stack: Tensor, index: Tensor) -> Tensor:
    K = stack.shape[SECTION_AXIS]
    shape = [1] * stack.ndim
    shape[SECTION_AXIS] = K
    return (np.arange(K).reshape(shape) == np.expand_dims(index, SECTION_AXIS)).astype(np.float64)


def _spread(cot: Tensor, K: int) -> Tensor:
    return np.repeat(np.expand_dims(cot, SECTION_AXIS), K, axis=SECTION_AXIS)


def _mixpool_backward(stack: Tensor, w: Tensor, z_bar: Tensor) -> Tuple[Tensor, Tensor]:
    K = stack.shape[SECTION_AXIS]
    mean = reduce(stack, SECTION_AXIS, ReduceKind.MEAN)
    top = reduce(stack, SECTION_AXIS, ReduceKind.MAX)
    mask = _first_index_mask(stack, np.argmax(stack, axis=SECTION_AXIS))
    d_stack = _spread(w[0] * z_bar / K, K) + mask * np.expand_dims(w[1] * z_bar, SECTION_AXIS)
    d_w = np.array([np.sum(z_bar * mean), np.sum(z_bar * top)])
    return d_stack, d_w


def _cv_backward(stack: Tensor, eps: float, cv_bar: Tensor) -> Tensor:
    K = stack.shape[SECTION_AXIS]
    sigma = reduce(stack, SECTION_AXIS, ReduceKind.STD)
    low = reduce(stack, SECTION_AXIS, ReduceKind.MIN, keepdims=True)
    den = reduce(stack - low, SECTION_AXIS, ReduceKind.MEAN) + eps

    d_sigma = cv_bar / den
    d_den = -cv_bar * sigma / (den * den)

    centered = stack - reduce(stack, SECTION_AXIS, ReduceKind.MEAN, keepdims=True)
    scale = np.divide(d_sigma, K * sigma, out=np.zeros_like(sigma), where=sigma > 0.0)
    d_stack = centered * np.expand_dims(scale, SECTION_AXIS)

    mask = _first_index_mask(stack, np.argmin(stack, axis=SECTION_AXIS))
    d_stack = d_stack + _spread(d_den / K, K) - mask * np.expand_dims(d_den, SECTION_AXIS)
    return d_stack


def backward_esf(
    scheme: EsfScheme,
    stack: Tensor,
    cotangent: Tensor,
    w: Optional[Tensor] = None,
) -> EsfGrads:
    """Reverse mode of :func:`mhs_scan.fusion.apply_scheme` at ``stack``."""
    stack = np.asarray(stack, dtype=np.float64)
    z_bar = np.asarray(cotangent, dtype=np.float64)
    K = stack.shape[SECTION_AXIS]
    mix = None
    if scheme.uses_mix:
        mix = np.asarray(w if w is not None else scheme.w, dtype=np.float64)
    w_shape = np.shape(mix) if mix is not None else None

    if not scheme.uses_gate:
        if mix is None:
            return EsfGrads(_spread(z_bar, K))
        d_stack, d_w = _mixpool_backward(stack, mix.reshape(-1), z_bar)
        return EsfGrads(d_stack, d_w.reshape(w_shape))

    cv = coefficient_variation(stack, scheme.eps)
    gate_in = cv - scheme.t
    gate = apply_gate(gate_in, scheme.gate)
    base = fuse_sum(stack) if mix is None else fuse_mixpool(stack, mix)

    d_base = z_bar * gate
    d_gate = z_bar * base
    if scheme.gate is GateKind.RELU:
        d_gate_in = np.where(gate_in > 0.0, d_gate, 0.0)
    else:
        d_gate_in = d_gate * gate * (1.0 - gate)

    d_stack = _cv_backward(stack, scheme.eps, d_gate_in)
    d_t = -float(np.sum(d_gate_in))
    if mix is None:
        return EsfGrads(d_stack + _spread(d_base, K), t=d_t)
    d_mix_stack, d_w = _mixpool_backward(stack, mix.reshape(-1), d_base)
    return EsfGrads(d_stack + d_mix_stack, d_w.reshape(w_shape), d_t)


# ---------------------------------------------------------------------------
# Layer norm and the full module
# ---------------------------------------------------------------------------

def backward_layer_norm(
    y_bar: Tensor,
    centered: Tensor,
    inv_std: Tensor,
    gamma: Tensor,
) -> Tuple[Tensor, Tensor, Tensor]:
    """Adjoint of layer norm over the last axis; returns ``(x_bar, gamma_bar, beta_bar)``."""
    x_hat = centered * inv_std
    d_hat = y_bar * gamma
    mean_d = np.mean(d_hat, axis=-1, keepdims=True)
    mean_dx = np.mean(d_hat * x_hat, axis=-1, keepdims=True)
    d_x = inv_std * (d_hat - mean_d - x_hat * mean_dx)
    return d_x, np.sum(_flat(y_bar * x_hat), axis=0), np.sum(_flat(y_bar), axis=0)


def backward_forward(
    Y_bar: Tensor,
    trace: ForwardTrace,
    weights: MhsWeights,
    config: MhsConfig,
) -> Tuple[Tensor, Dict[str, Tensor]]:
    """Return ``(X_bar, grads)`` with ``grads`` keyed like :meth:`MhsWeights.named_arrays`."""
    B, H, W, C = trace.output.shape
    L = trace.grid.L
    S, K = config.subspace_dim, config.k_routes
    Y_bar_l = np.asarray(Y_bar, dtype=np.float64).reshape(B, L, C)
    grads: Dict[str, Tensor] = {}

    if weights.tail_proj is not None:
        grads["tail_proj"] = _weight_grad(Y_bar_l, trace.normed)
        d_normed = Y_bar_l @ weights.tail_proj
    else:
        d_normed = Y_bar_l
    d_concat, grads["ln_gamma"], grads["ln_beta"] = backward_layer_norm(
        d_normed, trace.ln_centered, trace.ln_inv_std, weights.ln_gamma
    )
    d_concat = np.swapaxes(d_concat, 1, 2)

    X_bar = np.zeros_like(trace.inputs)
    for h, head in enumerate(trace.heads):
        w = weights.esf_w[h] if weights.esf_w is not None else None
        esf = backward_esf(config.esf, head.sections, d_concat[:, h * S:(h + 1) * S, :], w)
        if esf.w is not None:
            grads[f"head.{h}.esf_w"] = esf.w

        perms = np.stack([r.perm for r in head.routes])[None, :, None, :]
        d_route_out = np.take_along_axis(esf.stack, perms, axis=-1)
        d_seq, mgrads = backward_mamba_block(d_route_out.reshape(B * K, S, L), head.mamba, weights.mamba[h])
        d_seq = d_seq.reshape(B, K, S, L)

        d_map = np.zeros((B, S, L), dtype=np.float64)
        for k, route in enumerate(head.routes):
            d_map = d_map + d_seq[:, k][..., route.inv]
        d_proj = np.swapaxes(d_map, 1, 2)

        grads[f"head.{h}.proj"] = _weight_grad(d_proj, trace.inputs)
        for name, g in mgrads.items():
            grads[f"head.{h}.mamba.{name}"] = g
        X_bar = X_bar + d_proj @ weights.head_proj[h]

    return X_bar.reshape(B, H, W, C), grads


__all__ = [
    "silu_grad",
    "RecurrenceGrads",
    "backward_recurrence",
    "backward_selective_scan",
    "backward_causal_conv",
    "backward_mamba_block",
    "EsfGrads",
    "backward_esf",
    "backward_layer_norm",
    "backward_forward",
]
