# component_id: scan_bench
# kind: runtime_module
# area: cli
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Gather/scatter throughput under two memory strategies, checksummed before timing is reported.

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from ..core import Tensor
from ..errors import ContractError
from ..geometry import (
    GridShape,
    ScanPattern,
    ScanRoute,
    gather_routes,
    gather_sequence,
    route_set,
    scatter_routes,
    scatter_section,
)

LOGGER_NAME = "mhs_scan.cli"
logger = logging.getLogger(LOGGER_NAME)

MIN_REPS = 3


class BenchStrategy(str, Enum):
    PER_ROUTE_COPY = "per-route-copy"
    FUSED_GATHER = "fused-gather"


def per_route_copy(embedding_map: Tensor, routes: Sequence[ScanRoute]) -> Tensor:
    """One materialized sequence per route, scattered back one at a time."""
    sections = []
    for route in routes:
        seq = np.ascontiguousarray(gather_sequence(embedding_map, route))
        sections.append(scatter_section(seq, route))
    return np.stack(sections, axis=1)


def fused_gather(embedding_map: Tensor, routes: Sequence[ScanRoute]) -> Tensor:
    """All routes in a single indexed gather and a single scatter."""
    return scatter_routes(gather_routes(embedding_map, routes), routes)


STRATEGIES: Dict[BenchStrategy, Callable[[Tensor, Sequence[ScanRoute]], Tensor]] = {
    BenchStrategy.PER_ROUTE_COPY: per_route_copy,
    BenchStrategy.FUSED_GATHER: fused_gather,
}


def checksum(x: Tensor) -> str:
    return hashlib.sha256(np.ascontiguousarray(x, dtype="<f8").tobytes()).hexdigest()


@dataclass(frozen=True)
class BenchResult:
    op: str
    H: int
    W: int
    channels: int
    routes: int
    reps: int
    median_seconds: float
    p10_seconds: float
    p90_seconds: float
    elements_per_second: float
    checksum: str

    def as_dict(self) -> Dict[str, Any]:
        """Timing values are grouped under ``wall_time`` so they can be masked."""
        return {
            "op": self.op,
            "grid": [self.H, self.W],
            "channels": self.channels,
            "routes": self.routes,
            "reps": self.reps,
            "checksum": self.checksum,
            "wall_time": {
                "median_seconds": self.median_seconds,
                "p10_seconds": self.p10_seconds,
                "p90_seconds": self.p90_seconds,
                "elements_per_second": self.elements_per_second,
            },
        }


def bench_strategy(
    strategy: "BenchStrategy | str",
    embedding_map: Tensor,
    routes: Sequence[ScanRoute],
    reps: int,
) -> BenchResult:
    strategy = BenchStrategy(strategy)
    if reps < MIN_REPS:
        raise ValueError(f"reps must be >= {MIN_REPS}, got {reps}")
    fn = STRATEGIES[strategy]
    out = fn(embedding_map, routes)
    digest = checksum(out)

    samples: List[float] = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        fn(embedding_map, routes)
        samples.append((time.perf_counter_ns() - start) * 1e-9)
    p10, median, p90 = (float(v) for v in np.percentile(samples, [10, 50, 90]))
    elements = out.size
    grid = routes[0].grid
    logger.debug("bench %s median=%.6fs over %d reps", strategy.value, median, reps)
    return BenchResult(
        op=strategy.value,
        H=grid.H,
        W=grid.W,
        channels=int(embedding_map.shape[1]),
        routes=len(routes),
        reps=reps,
        median_seconds=median,
        p10_seconds=p10,
        p90_seconds=p90,
        elements_per_second=elements / max(median, 1e-9),
        checksum=digest,
    )


def run_bench(
    strategies: Sequence["BenchStrategy | str"],
    H: int,
    W: int,
    S: int,
    reps: int,
    *,
    seed: int = 0,
    pattern: "ScanPattern | str" = ScanPattern.SNAKE,
    batch: int = 1,
) -> List[BenchResult]:
    """Bench every strategy on the same seeded map.

    Raises:
        ContractError: if the strategies disagree on the output checksum.
    """
    grid = GridShape(H, W)
    routes = route_set(pattern, grid)
    embedding_map = np.random.default_rng(seed).standard_normal((batch, S, H, W))
    results = [bench_strategy(s, embedding_map, routes, reps) for s in strategies]
    digests = {r.checksum for r in results}
    if len(digests) > 1:
        raise ContractError("gather strategies disagree: " + ", ".join(f"{r.op}={r.checksum[:12]}" for r in results))
    return results


__all__ = [
    "MIN_REPS",
    "BenchStrategy",
    "STRATEGIES",
    "per_route_copy",
    "fused_gather",
    "checksum",
    "BenchResult",
    "bench_strategy",
    "run_bench",
]
