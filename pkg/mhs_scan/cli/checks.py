# component_id: property_checks
# kind: runtime_module
# area: cli
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Seeded property suites behind the `check` subcommand.

"""
Property suites.

Each check is a zero-argument callable returning a :class:`CheckResult`.
Seeds are fixed, so two runs print byte-identical lines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterator, List, Tuple

import numpy as np

from ..core import ReduceKind, reduce
from ..errors import ContractError
from ..fusion import CvScaling, MixPoolCv, apply_scheme, coefficient_variation, fuse_sum
from ..geometry import (
    GridShape,
    RouteVariant,
    ScanPattern,
    ScanRoute,
    adjacency_report,
    build_route,
    dump_route,
    gather_routes,
    gather_sequence,
    parse_route_dump,
    scatter_section,
)
from ..gradcheck import OP_BUILDERS, GradStatus, gradcheck_module
from ..ssm import SERIES_THRESHOLD, conv_kernel, conv_scan, discretize, recurrence_scan, zoh_phi

LOGGER_NAME = "mhs_scan.cli"
logger = logging.getLogger(LOGGER_NAME)

GRID_RANGE = range(1, 9)
DUALITY_TRIALS = 100
DUALITY_TOLERANCE = 1e-10


class CheckScope(str, Enum):
    ROUTES = "routes"
    SSM = "ssm"
    ESF = "esf"
    GRADS = "grads"
    ALL = "all"


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CheckResult:
    scope: str
    name: str
    status: CheckStatus
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status is CheckStatus.FAIL

    def line(self) -> str:
        return f"[{self.status.value}] {self.scope}.{self.name}: {self.detail}"


def _result(scope: str, name: str, ok: bool, detail: str) -> CheckResult:
    return CheckResult(scope, name, CheckStatus.PASS if ok else CheckStatus.FAIL, detail)


# ---------------------------------------------------------------------------
# routes
# ---------------------------------------------------------------------------

def _all_routes() -> Iterator[ScanRoute]:
    for pattern in ScanPattern:
        for variant in RouteVariant:
            for H in GRID_RANGE:
                for W in GRID_RANGE:
                    yield build_route(pattern, variant, GridShape(H, W))


def check_route_bijection() -> CheckResult:
    total, bad = 0, 0
    for route in _all_routes():
        total += 1
        ident = np.arange(route.L)
        if not (np.array_equal(np.sort(route.perm), ident) and np.array_equal(route.inv[route.perm], ident)):
            bad += 1
    return _result("routes", "bijection", bad == 0, f"{total - bad}/{total} routes are bijections with inv . perm = id")


def check_route_adjacency() -> CheckResult:
    total, bad = 0, 0
    for route in _all_routes():
        if route.pattern is ScanPattern.RASTER or route.L == 1:
            continue
        total += 1
        if not adjacency_report(route).is_adjacent:
            bad += 1
    return _result("routes", "adjacency", bad == 0, f"{total - bad}/{total} snake/spiral/diagonal routes step to a neighbour")


def check_route_corners() -> CheckResult:
    total, bad = 0, 0
    for route in _all_routes():
        H, W = route.grid.H, route.grid.W
        flip_rows, flip_cols = route.variant.flips
        expected = (H - 1 if flip_rows else 0, W - 1 if flip_cols else 0)
        total += 1
        if route.grid.cell(int(route.perm[0])) != expected:
            bad += 1
    return _result("routes", "start_corner", bad == 0, f"{total - bad}/{total} routes start at their variant corner")


def check_route_dump() -> CheckResult:
    total, bad = 0, 0
    for route in _all_routes():
        total += 1
        if parse_route_dump(dump_route(route)) != route:
            bad += 1
    return _result("routes", "dump_parse", bad == 0, f"{total - bad}/{total} dumps parse back to the same route")


def check_gather_scatter() -> CheckResult:
    rng = np.random.default_rng(11)
    total, bad = 0, 0
    for H, W in ((1, 1), (2, 3), (5, 4), (8, 8)):
        grid = GridShape(H, W)
        x = rng.standard_normal((2, 3, H, W))
        flat = x.reshape(2, 3, grid.L)
        for pattern in ScanPattern:
            routes = [build_route(pattern, v, grid) for v in RouteVariant]
            fused = gather_routes(x, routes)
            for k, route in enumerate(routes):
                total += 1
                seq = gather_sequence(x, route)
                if not (np.array_equal(scatter_section(seq, route), flat) and np.array_equal(fused[:, k], seq)):
                    bad += 1
    return _result("routes", "gather_scatter", bad == 0, f"{total - bad}/{total} scatter(gather(x)) == x, fused == per-route")


# ---------------------------------------------------------------------------
# ssm
# ---------------------------------------------------------------------------

def check_zoh_closed_form() -> CheckResult:
    A_bar, B_bar = discretize(np.log(2.0), 1.0, 1.0)
    err = max(abs(float(A_bar) - 2.0), abs(float(B_bar) - 1.0))
    return _result("ssm", "zoh_closed_form", err <= 1e-12, f"A=1, delta=ln 2: error {err:.1e}")


def check_zoh_small_delta() -> CheckResult:
    rng = np.random.default_rng(3)
    A = -rng.uniform(0.5, 2.0, 8)
    B = rng.standard_normal(8)
    delta = 1e-4
    _, B_bar = discretize(delta, A, B)
    gap = float(np.max(np.abs(B_bar - delta * B)))
    bound = float(np.max(np.abs(A))) * delta**2 * float(np.max(np.abs(B)))
    return _result("ssm", "zoh_small_delta", gap <= bound, f"|B_bar - delta B| = {gap:.2e} <= {bound:.2e}")


def check_series_continuity() -> CheckResult:
    worst = 0.0
    for edge in (SERIES_THRESHOLD, -SERIES_THRESHOLD):
        inside = np.nextafter(edge, 0.0)
        worst = max(worst, abs(float(zoh_phi(inside)) - float(zoh_phi(edge))))
    return _result("ssm", "series_continuity", worst <= 1e-12, f"jump at |z| = 1e-4: {worst:.1e}")


def check_duality() -> CheckResult:
    worst = 0.0
    for trial in range(DUALITY_TRIALS):
        rng = np.random.default_rng([7, trial])
        N, L = int(rng.integers(1, 9)), int(rng.integers(1, 65))
        A = -rng.uniform(0.1, 2.0, N)
        A_bar, B_bar = discretize(rng.uniform(0.01, 0.5), A, rng.standard_normal(N))
        C = rng.standard_normal(N)
        x = rng.standard_normal(L)
        y_rec = recurrence_scan(A_bar, B_bar, C, x)
        y_conv = conv_scan(x, conv_kernel(A_bar, B_bar, C, L))
        scale = max(float(np.max(np.abs(y_rec))), np.finfo(np.float64).tiny)
        worst = max(worst, float(np.max(np.abs(y_rec - y_conv))) / scale)
    return _result(
        "ssm",
        "recurrence_conv_duality",
        worst <= DUALITY_TOLERANCE,
        f"{DUALITY_TRIALS} trials, max relative error {worst:.1e} <= {DUALITY_TOLERANCE:.0e}",
    )


def check_kernel_contract() -> CheckResult:
    per_step = np.full((4, 2), 0.5)
    try:
        conv_kernel(per_step, per_step, per_step, 4)
    except ContractError:
        return _result("ssm", "kernel_contract", True, "conv_kernel rejects per-step parameters")
    return _result("ssm", "kernel_contract", False, "conv_kernel accepted per-step parameters")


# ---------------------------------------------------------------------------
# esf
# ---------------------------------------------------------------------------

def check_identical_sections() -> CheckResult:
    stack = np.full((1, 4, 3, 5), 0.7)
    z3 = apply_scheme(stack, CvScaling(t=0.5)).fused
    z4 = apply_scheme(stack, MixPoolCv(t=0.5)).fused
    ok = bool(np.all(z3 == 0.0) and np.all(z4 == 0.0))
    return _result("esf", "identical_sections", ok, "t=0.5: cv-scaled and merged outputs are exactly 0")


def check_cv_probe() -> CheckResult:
    stack = np.array([0.0, 0.0, 0.0, 1.0]).reshape(1, 4, 1)
    cv = float(coefficient_variation(stack, 1e-6)[0, 0])
    z3 = float(apply_scheme(stack, CvScaling(t=0.5)).fused[0, 0])
    err = max(abs(cv - math.sqrt(3.0)), abs(z3 - (math.sqrt(3.0) - 0.5)))
    return _result("esf", "cv_probe", err <= 1e-5, f"{{0,0,0,1}}: y_cv = {cv:.6f}, error {err:.1e}")


def check_cv_invariance() -> CheckResult:
    rng = np.random.default_rng(5)
    stack = rng.uniform(0.0, 1.0, (2, 4, 3, 5)) + 2.0 * np.arange(4).reshape(1, 4, 1, 1)
    base = coefficient_variation(stack, 1e-6)
    worst = 0.0
    for shift, scale in ((3.7, 1.0), (0.0, 2.5), (-1.25, 3.0)):
        moved = coefficient_variation(scale * stack + shift, 1e-6)
        worst = max(worst, float(np.max(np.abs(moved - base) / np.abs(base))))
    return _result("esf", "cv_invariance", worst <= 1e-6, f"shift/scale relative change {worst:.1e}")


def check_sum_mean() -> CheckResult:
    rng = np.random.default_rng(9)
    stack = rng.standard_normal((2, 4, 3, 5))
    ok = np.array_equal(fuse_sum(stack), 4.0 * reduce(stack, 1, ReduceKind.MEAN))
    return _result("esf", "sum_equals_k_mean", bool(ok), "K=4: sum == 4 * mean bitwise")


def check_single_section() -> CheckResult:
    try:
        coefficient_variation(np.ones((1, 1, 3)), 1e-6)
    except ContractError:
        return _result("esf", "single_section", True, "K=1 coefficient of variation is rejected")
    return _result("esf", "single_section", False, "K=1 coefficient of variation was accepted")


# ---------------------------------------------------------------------------
# grads
# ---------------------------------------------------------------------------

def _grad_check(op_id: str) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        report = gradcheck_module(op_id, seed=0)
        detail = f"max_rel={report.max_rel_error:.2e} tol={report.tol:.0e} probes={report.probe_count}"
        if report.status is GradStatus.INCONCLUSIVE:
            return CheckResult("grads", op_id, CheckStatus.INCONCLUSIVE, report.detail)
        return _result("grads", op_id, report.passed, detail)

    run.__name__ = f"check_grad_{op_id}"
    return run


SUITES: Dict[CheckScope, Tuple[Callable[[], CheckResult], ...]] = {
    CheckScope.ROUTES: (
        check_route_bijection,
        check_route_adjacency,
        check_route_corners,
        check_route_dump,
        check_gather_scatter,
    ),
    CheckScope.SSM: (
        check_zoh_closed_form,
        check_zoh_small_delta,
        check_series_continuity,
        check_duality,
        check_kernel_contract,
    ),
    CheckScope.ESF: (
        check_identical_sections,
        check_cv_probe,
        check_cv_invariance,
        check_sum_mean,
        check_single_section,
    ),
    CheckScope.GRADS: tuple(_grad_check(op_id) for op_id in OP_BUILDERS),
}


def run_checks(scope: "CheckScope | str") -> List[CheckResult]:
    scope = CheckScope(scope)
    scopes = [s for s in SUITES] if scope is CheckScope.ALL else [scope]
    results: List[CheckResult] = []
    for s in scopes:
        for check in SUITES[s]:
            result = check()
            logger.debug("%s", result.line())
            results.append(result)
    return results


__all__ = ["CheckScope", "CheckStatus", "CheckResult", "SUITES", "run_checks"]
