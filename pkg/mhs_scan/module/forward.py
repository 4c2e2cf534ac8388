# component_id: mhs_forward
# kind: runtime_module
# area: module
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: End-to-end forward pass of the multi-head scan module.

"""
Forward pass.

For an embedding map ``X`` of shape ``(B, H, W, C_l)``:

1. every head ``h`` projects the channels to its subspace, ``x_h = W_h x``;
2. the projected map is read along the ``K`` routes of the head's pattern;
3. the head's sequence block runs on all ``K`` sequences (shared weights);
4. every output is re-laid into row-major cell order (one section per route);
5. the ``K`` sections are fused with the configured ESF scheme;
6. the ``n`` fused sections are concatenated and layer-normalized per cell;
7. the tail projection maps back to ``C_l`` channels when enabled.

Heads are independent and may run on a thread pool; results are collected
in head order, so the output does not depend on the worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core import Tensor, as_tensor, layer_norm, layer_norm_stats, project_last, transpose
from ..errors import DimensionError
from ..fusion import EsfResult, apply_scheme
from ..geometry import GridShape, ScanRoute, gather_routes, route_set, scatter_routes
from ..ssm import MambaCache, mamba_block_with_cache
from .config import LN_EPS, MhsConfig
from .weights import MhsWeights, require_weights

LOGGER_NAME = "mhs_scan.module"
logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True, eq=False)
class HeadTrace:
    """Intermediates of one head; route-indexed arrays are ``(B, K, S, L)``."""

    routes: Tuple[ScanRoute, ...]
    projected: Tensor
    sequences: Tensor
    route_outputs: Tensor
    sections: Tensor
    esf: EsfResult
    mamba: MambaCache

    @property
    def fused(self) -> Tensor:
        return self.esf.fused


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    grid: GridShape
    inputs: Tensor
    heads: Tuple[HeadTrace, ...]
    concat: Tensor
    ln_centered: Tensor
    ln_inv_std: Tensor
    normed: Tensor
    output: Tensor


def _run_head(h: int, X_l: Tensor, grid: GridShape, weights: MhsWeights, config: MhsConfig) -> HeadTrace:
    B, L, _ = X_l.shape
    S, K = config.subspace_dim, config.k_routes

    projected = project_last(X_l, transpose(weights.head_proj[h], (1, 0)))
    x_map = transpose(projected, (0, 2, 1)).reshape(B, S, grid.H, grid.W)
    routes = route_set(config.patterns[h], grid, K)
    sequences = gather_routes(x_map, routes)

    out, cache = mamba_block_with_cache(sequences.reshape(B * K, S, L), weights.mamba[h])
    route_outputs = out.reshape(B, K, S, L)
    sections = scatter_routes(route_outputs, routes)

    w = weights.esf_w[h] if weights.esf_w is not None else None
    esf = apply_scheme(sections, config.esf, w=w)
    return HeadTrace(routes, projected, sequences, route_outputs, sections, esf, cache)


def forward_with_trace(
    X: Tensor,
    weights: MhsWeights,
    config: MhsConfig,
    *,
    workers: int = 1,
) -> Tuple[Tensor, ForwardTrace]:
    """Run the module on ``X`` (B, H, W, C_l) and keep every intermediate.

    Raises:
        DimensionError: if ``X`` is not rank 4 or its channels differ from ``c_l``.
        DomainError: if ``X`` holds non-finite values.
        ConfigValidationError: if ``weights`` do not match ``config``.
    """
    X = as_tensor(X, name="embedding map")
    if X.ndim != 4 or X.shape[-1] != config.c_l:
        raise DimensionError(f"embedding map must be (B, H, W, {config.c_l})", X.shape)
    require_weights(weights, config)

    B, H, W, C = X.shape
    grid = GridShape(H, W)
    X_l = X.reshape(B, grid.L, C)

    started = time.perf_counter()
    if workers > 1 and config.n_heads > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_head, h, X_l, grid, weights, config) for h in range(config.n_heads)]
            heads: List[HeadTrace] = [f.result() for f in futures]
    else:
        heads = [_run_head(h, X_l, grid, weights, config) for h in range(config.n_heads)]
    logger.debug("heads done n=%d workers=%d elapsed=%.6fs", config.n_heads, workers, time.perf_counter() - started)

    concat = transpose(np.concatenate([head.fused for head in heads], axis=1), (0, 2, 1))
    centered, inv_std = layer_norm_stats(concat, -1, LN_EPS)
    normed = layer_norm(concat, -1, weights.ln_gamma, weights.ln_beta, LN_EPS)
    out = normed
    if weights.tail_proj is not None:
        out = project_last(normed, transpose(weights.tail_proj, (1, 0)))
    Y = out.reshape(B, H, W, C)

    trace = ForwardTrace(grid, X_l, tuple(heads), concat, centered, inv_std, normed, Y)
    return Y, trace


def forward(X: Tensor, weights: MhsWeights, config: MhsConfig, *, workers: int = 1) -> Tensor:
    return forward_with_trace(X, weights, config, workers=workers)[0]


def gate_zero_fraction(head: HeadTrace) -> Optional[float]:
    """Share of exactly-zero gate values in a head, ``None`` for ungated schemes."""
    if head.esf.gate is None:
        return None
    return float(np.count_nonzero(head.esf.gate == 0.0)) / head.esf.gate.size


__all__ = ["HeadTrace", "ForwardTrace", "forward_with_trace", "forward", "gate_zero_fraction"]
