# component_id: gradcheck_harness
# kind: runtime_module
# area: gradcheck
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Central-difference certification of the analytic backward passes.

"""
Gradient checking.

Each check draws inputs and weights from a seed, forms the scalar loss
``sum(y_bar * f(params))`` with a random cotangent ``y_bar`` and compares the
analytic cotangent of every parameter tensor against central differences
on a deterministic subsample of its coordinates.

Ops with kinks (max/min routing, the relu gate) are only checked at regular
points: every component must keep its top and bottom gaps and its distance
``|y_cv - t|`` above a margin. The full module packs its sections much
closer than that, so there every loss evaluation records the branch each
kink takes instead, and a point is regular when no probed step changes one.
Points that stay irregular after ``MAX_JITTER_ATTEMPTS`` redraws give an
inconclusive report.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core import Tensor, as_tensor, layer_norm, layer_norm_stats
from ..errors import DomainError, InconclusiveCheck
from ..fusion import (
    SECTION_AXIS,
    CvScaling,
    EsfScheme,
    GateKind,
    MixPoolCv,
    MixturePooling,
    SumScheme,
    apply_scheme,
    coefficient_variation,
)
from ..module import MhsConfig, MhsWeights, SsmConfig, forward_with_trace, init_weights
from ..ssm import (
    MambaWeights,
    init_mamba_weights,
    mamba_block_with_cache,
    recurrence_scan,
    selective_scan_with_cache,
)
from .backward import (
    backward_esf,
    backward_forward,
    backward_layer_norm,
    backward_mamba_block,
    backward_recurrence,
    backward_selective_scan,
)

LOGGER_NAME = "mhs_scan.gradcheck"
logger = logging.getLogger(LOGGER_NAME)

DEFAULT_STEP = 1e-5
OP_TOLERANCE = 1e-5
FORWARD_TOLERANCE = 1e-4
REGULARITY_MARGIN = 1e-3
MAX_JITTER_ATTEMPTS = 10
DEFAULT_PROBES = 32
REL_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def probe_coordinates(size: int, probes: Optional[int], rng: np.random.Generator) -> np.ndarray:
    """Sorted flat indices to probe; all of them when ``probes`` is None or large enough."""
    if probes is None or size <= probes:
        return np.arange(size)
    return np.sort(rng.choice(size, size=probes, replace=False))


def numeric_jacobian(
    f: Callable[[Tensor], Any],
    x: Tensor,
    h: float = DEFAULT_STEP,
    *,
    coords: Optional[Sequence[int]] = None,
) -> Tensor:
    """Central differences ``(f(x + h e) - f(x - h e)) / 2h``.

    Returns ``f(x).shape + x.shape``, or ``f(x).shape + (len(coords),)`` when
    only the flat coordinates ``coords`` are probed.

    Raises:
        DomainError: if ``f`` yields a non-finite value.
    """
    if h <= 0:
        raise ValueError("step h MUST be > 0")
    x = as_tensor(x, name="probe point")
    flat = x.reshape(-1)
    index = range(flat.shape[0]) if coords is None else [int(i) for i in coords]

    columns: List[Tensor] = []
    for i in index:
        plus, minus = flat.copy(), flat.copy()
        plus[i] += h
        minus[i] -= h
        f_plus = np.asarray(f(plus.reshape(x.shape)), dtype=np.float64)
        f_minus = np.asarray(f(minus.reshape(x.shape)), dtype=np.float64)
        if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
            raise DomainError(f"function is not finite around coordinate {i}")
        columns.append((f_plus - f_minus) / (2.0 * h))

    if not columns:
        return np.zeros((0,), dtype=np.float64)
    jac = np.stack(columns, axis=-1)
    if coords is None:
        return jac.reshape(jac.shape[:-1] + x.shape)
    return jac


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class GradStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GradEntry:
    """Comparison for one parameter tensor over its probed coordinates."""

    name: str
    max_abs_error: float
    max_rel_error: float
    probes: int


@dataclass(frozen=True)
class GradReport:
    op_id: str
    status: GradStatus
    step: float
    tol: float
    seed: int
    entries: Tuple[GradEntry, ...] = ()
    attempts: int = 1
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is GradStatus.PASS

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    @property
    def max_abs_error(self) -> float:
        return max((e.max_abs_error for e in self.entries), default=0.0)

    @property
    def probe_count(self) -> int:
        return sum(e.probes for e in self.entries)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "op_id": self.op_id,
            "status": self.status.value,
            "step": self.step,
            "tol": self.tol,
            "seed": self.seed,
            "attempts": self.attempts,
            "max_rel_error": self.max_rel_error,
            "max_abs_error": self.max_abs_error,
            "probes": self.probe_count,
            "entries": [e.__dict__ for e in self.entries],
            "detail": self.detail,
        }


def compare_gradients(analytic: Tensor, numeric: Tensor) -> Tuple[float, float]:
    """``(max_abs_error, max_rel_error)`` with the per-tensor relative floor."""
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    if a.size == 0:
        return 0.0, 0.0
    abs_err = float(np.max(np.abs(a - n)))
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(n))), REL_FLOOR)
    return abs_err, abs_err / scale


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

LossFn = Callable[[Dict[str, Tensor]], float]


@dataclass
class _Problem:
    params: Dict[str, Tensor]
    loss: LossFn
    analytic: Dict[str, Tensor]
    regular: bool = True
    detail: str = ""
    crossings: List[str] = dataclasses.field(default_factory=list)


def _weighted_loss(y_bar: Tensor) -> Callable[[Tensor], float]:
    return lambda y: float(np.sum(y_bar * y))


def _regular_mamba_weights(S: int, N: int, rng: np.random.Generator, *, biases: bool = False) -> MambaWeights:
    """Block weights with Δ well inside softplus's smooth range (Δ ~ 0.3..1)."""
    weights = init_mamba_weights(S, rng, state_dim=N)
    changes: Dict[str, Tensor] = {"b_delta": rng.uniform(-1.0, 0.5, size=weights.inner_dim)}
    if biases:
        changes["b_B"] = rng.normal(size=N)
        changes["b_C"] = rng.normal(size=N)
    return weights.replace(**changes)


def _recurrence_problem(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
    N, L = dims.get("N", 2), dims.get("L", 8)
    params = {
        "A_bar": rng.uniform(-0.9, 0.9, size=N),
        "B_bar": rng.normal(size=N),
        "C": rng.normal(size=N),
        "x": rng.normal(size=L),
    }
    y_bar = rng.normal(size=L)
    score = _weighted_loss(y_bar)

    def loss(p: Dict[str, Tensor]) -> float:
        return score(recurrence_scan(p["A_bar"], p["B_bar"], p["C"], p["x"]))

    g = backward_recurrence(params["A_bar"], params["B_bar"], params["C"], params["x"], y_bar)
    return _Problem(params, loss, {"A_bar": g.A_bar, "B_bar": g.B_bar, "C": g.C, "x": g.x})


def _selective_problem(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
    S, L, N = dims.get("S", 2), dims.get("L", 5), dims.get("N", 3)
    weights = _regular_mamba_weights(S, N, rng, biases=True)
    u = rng.normal(size=(L, weights.inner_dim))
    y_bar = rng.normal(size=u.shape)
    score = _weighted_loss(y_bar)
    names = ("W_delta", "b_delta", "W_B", "W_C", "A", "D_skip", "b_B", "b_C")

    def loss(p: Dict[str, Tensor]) -> float:
        w = weights.replace(**{k: p[k] for k in names})
        return score(selective_scan_with_cache(p["u"], w)[0])

    _, cache = selective_scan_with_cache(u, weights)
    du, grads = backward_selective_scan(y_bar, cache, weights)
    params = {"u": u, **{k: getattr(weights, k) for k in names}}
    return _Problem(params, loss, {"u": du, **grads})


def _mamba_problem(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
    B, S, L, N = dims.get("B", 1), dims.get("S", 3), dims.get("L", 5), dims.get("N", 4)
    weights = _regular_mamba_weights(S, N, rng)
    x = rng.normal(size=(B, S, L))
    y_bar = rng.normal(size=x.shape)
    score = _weighted_loss(y_bar)
    names = tuple(weights.named_arrays())

    def loss(p: Dict[str, Tensor]) -> float:
        w = weights.replace(**{k: p[k] for k in names})
        return score(mamba_block_with_cache(p["x"], w)[0])

    _, cache = mamba_block_with_cache(x, weights)
    dx, grads = backward_mamba_block(y_bar, cache, weights)
    params = {"x": x, **weights.named_arrays()}
    return _Problem(params, loss, {"x": dx, **grads})


def esf_irregularities(stack: Tensor, scheme: EsfScheme, margin: float) -> int:
    """Number of components closer than ``margin`` to a kink of ``scheme``."""
    ordered = np.sort(stack, axis=SECTION_AXIS)
    K = ordered.shape[SECTION_AXIS]
    bad = np.zeros(np.delete(ordered.shape, SECTION_AXIS), dtype=bool)
    if K >= 2 and scheme.uses_mix:
        top = np.take(ordered, K - 1, axis=SECTION_AXIS) - np.take(ordered, K - 2, axis=SECTION_AXIS)
        bad |= top <= margin
    if scheme.uses_gate:
        bottom = np.take(ordered, 1, axis=SECTION_AXIS) - np.take(ordered, 0, axis=SECTION_AXIS)
        bad |= bottom <= margin
        bad |= np.abs(coefficient_variation(stack, scheme.eps) - scheme.t) <= margin
    return int(np.count_nonzero(bad))


def kink_branches(stack: Tensor, scheme: EsfScheme) -> Tensor:
    """Branch ``scheme`` takes at every component: max index, min index, relu side.

    Two points with equal branches lie on the same smooth piece of the scheme.
    """
    parts: List[Tensor] = []
    if scheme.uses_mix:
        parts.append(np.argmax(stack, axis=SECTION_AXIS))
    if scheme.uses_gate:
        parts.append(np.argmin(stack, axis=SECTION_AXIS))
        if scheme.gate is GateKind.RELU:
            parts.append((coefficient_variation(stack, scheme.eps) > scheme.t).astype(np.intp))
    if not parts:
        return np.zeros((0,), dtype=np.intp)
    return np.stack(parts)


ESF_SCHEMES: Dict[str, EsfScheme] = {
    "esf_sum": SumScheme(),
    "esf_mixpool": MixturePooling(w=(0.6, 0.4)),
    "esf_cv": CvScaling(t=0.5),
    "esf_mixpool_cv": MixPoolCv(w=(0.6, 0.4), t=0.5),
}


def _esf_problem(op_id: str) -> Callable[[np.random.Generator, Mapping[str, int], float], _Problem]:
    scheme = ESF_SCHEMES[op_id]

    def build(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
        B, K, S, L = dims.get("B", 1), dims.get("K", 4), dims.get("S", 3), dims.get("L", 6)
        stack = rng.normal(size=(B, K, S, L))
        z_bar = rng.normal(size=(B, S, L))
        score = _weighted_loss(z_bar)
        params: Dict[str, Tensor] = {"stack": stack}
        if scheme.uses_mix:
            params["w"] = np.asarray([scheme.w], dtype=np.float64)
        if scheme.uses_gate:
            params["t"] = np.asarray(scheme.t, dtype=np.float64)

        def loss(p: Dict[str, Tensor]) -> float:
            s = dataclasses.replace(scheme, t=float(p["t"])) if "t" in p else scheme
            return score(apply_scheme(p["stack"], s, w=p.get("w")).fused)

        g = backward_esf(scheme, stack, z_bar, params.get("w"))
        analytic: Dict[str, Tensor] = {"stack": g.stack}
        if g.w is not None:
            analytic["w"] = g.w
        if g.t is not None:
            analytic["t"] = np.asarray(g.t)
        irregular = esf_irregularities(stack, scheme, margin)
        return _Problem(params, loss, analytic, irregular == 0, f"{irregular} irregular components")

    return build


def _layer_norm_problem(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
    B, L, C = dims.get("B", 2), dims.get("L", 3), dims.get("C", 5)
    eps = 1e-5
    params = {"x": rng.normal(size=(B, L, C)), "gamma": rng.normal(size=C), "beta": rng.normal(size=C)}
    y_bar = rng.normal(size=(B, L, C))
    score = _weighted_loss(y_bar)

    def loss(p: Dict[str, Tensor]) -> float:
        return score(layer_norm(p["x"], -1, p["gamma"], p["beta"], eps))

    centered, inv_std = layer_norm_stats(params["x"], -1, eps)
    dx, dgamma, dbeta = backward_layer_norm(y_bar, centered, inv_std, params["gamma"])
    return _Problem(params, loss, {"x": dx, "gamma": dgamma, "beta": dbeta})


def _forward_problem(rng: np.random.Generator, dims: Mapping[str, int], margin: float) -> _Problem:
    config = MhsConfig(
        c_l=dims.get("C_l", 12),
        n_heads=dims.get("n", 3),
        subspace_dim=dims.get("S", 4),
        k_routes=dims.get("K", 4),
        ssm=SsmConfig(state_dim=dims.get("N", 4)),
        seed=int(rng.integers(0, 2**31)),
    )
    weights = init_weights(config)
    for h in range(config.n_heads):
        weights = weights.with_array(f"head.{h}.mamba.b_delta", rng.uniform(-1.0, 0.5, size=config.inner_dim))
    X = rng.normal(size=(dims.get("B", 1), dims.get("H", 4), dims.get("W", 4), config.c_l))

    Y, trace = forward_with_trace(X, weights, config)
    Y_bar = rng.normal(size=Y.shape)
    score = _weighted_loss(Y_bar)
    branches = [kink_branches(head.sections, config.esf) for head in trace.heads]
    crossings: List[str] = []

    def loss(p: Dict[str, Tensor]) -> float:
        w = MhsWeights.from_named_arrays({k: v for k, v in p.items() if k != "X"})
        Y_p, trace_p = forward_with_trace(p["X"], w, config)
        for h, head in enumerate(trace_p.heads):
            if not np.array_equal(kink_branches(head.sections, config.esf), branches[h]):
                crossings.append(f"head {h}")
        return score(Y_p)

    dX, grads = backward_forward(Y_bar, trace, weights, config)
    # Module sections sit far closer than ``margin``; only kinks a difference step crosses count.
    near = sum(esf_irregularities(head.sections, config.esf, margin) for head in trace.heads)
    params = {"X": X, **weights.named_arrays()}
    detail = f"{near} components within {margin:g} of a kink"
    return _Problem(params, loss, {"X": dX, **grads}, True, detail, crossings)


OP_BUILDERS: Dict[str, Callable[[np.random.Generator, Mapping[str, int], float], _Problem]] = {
    "recurrence": _recurrence_problem,
    "selective_scan": _selective_problem,
    "mamba_block": _mamba_problem,
    "esf_sum": _esf_problem("esf_sum"),
    "esf_mixpool": _esf_problem("esf_mixpool"),
    "esf_cv": _esf_problem("esf_cv"),
    "esf_mixpool_cv": _esf_problem("esf_mixpool_cv"),
    "layer_norm": _layer_norm_problem,
    "forward": _forward_problem,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _check(problem: _Problem, h: float, probes: Optional[int], rng: np.random.Generator) -> Tuple[GradEntry, ...]:
    entries: List[GradEntry] = []
    for name, value in problem.params.items():
        coords = probe_coordinates(int(np.size(value)), probes, rng)
        shape = np.shape(value)

        def partial(v: Tensor, _name: str = name) -> float:
            return problem.loss({**problem.params, _name: v})

        numeric = numeric_jacobian(partial, np.asarray(value, dtype=np.float64).reshape(shape), h, coords=coords)
        analytic = np.asarray(problem.analytic[name], dtype=np.float64).reshape(-1)[coords]
        abs_err, rel_err = compare_gradients(analytic, numeric)
        entries.append(GradEntry(name, abs_err, rel_err, len(coords)))
    return tuple(entries)


def gradcheck_module(
    op_id: str,
    dims: Optional[Mapping[str, int]] = None,
    seed: int = 0,
    h: float = DEFAULT_STEP,
    tol: Optional[float] = None,
    *,
    probes: Optional[int] = DEFAULT_PROBES,
    margin: Optional[float] = None,
) -> GradReport:
    """Certify the backward pass of ``op_id`` at a seeded regular point.

    ``op_id`` is one of :data:`OP_BUILDERS`. ``tol`` defaults to 1e-5 for
    isolated ops and 1e-4 for ``forward``.
    """
    if op_id not in OP_BUILDERS:
        raise ValueError(f"unknown op_id {op_id!r}; expected one of {sorted(OP_BUILDERS)}")
    tol = tol if tol is not None else (FORWARD_TOLERANCE if op_id == "forward" else OP_TOLERANCE)
    margin = margin if margin is not None else REGULARITY_MARGIN
    dims = dict(dims or {})

    try:
        entries, attempts = _certify(op_id, dims, seed, h, probes, margin)
    except InconclusiveCheck as exc:
        logger.debug("gradcheck %s inconclusive: %s", op_id, exc)
        return GradReport(op_id, GradStatus.INCONCLUSIVE, h, tol, seed, attempts=MAX_JITTER_ATTEMPTS, detail=str(exc))

    worst = max((e.max_rel_error for e in entries), default=0.0)
    status = GradStatus.PASS if worst <= tol else GradStatus.FAIL
    logger.debug("gradcheck %s status=%s max_rel=%.3e attempts=%d", op_id, status.value, worst, attempts)
    return GradReport(op_id, status, h, tol, seed, entries, attempts)


def _certify(
    op_id: str,
    dims: Mapping[str, int],
    seed: int,
    h: float,
    probes: Optional[int],
    margin: float,
) -> Tuple[Tuple[GradEntry, ...], int]:
    """Redraw until a point is regular and no difference step changes a kink branch."""
    last = ""
    for attempt in range(MAX_JITTER_ATTEMPTS):
        problem = OP_BUILDERS[op_id](np.random.default_rng([seed, 0, attempt]), dims, margin)
        if not problem.regular:
            last = problem.detail
            continue
        entries = _check(problem, h, probes, np.random.default_rng([seed, 1]))
        if problem.crossings:
            last = f"{len(problem.crossings)} difference steps crossed a kink ({problem.crossings[0]})"
            continue
        return entries, attempt + 1
    raise InconclusiveCheck(f"no regular point for {op_id} after {MAX_JITTER_ATTEMPTS} attempts ({last})")


__all__ = [
    "DEFAULT_STEP",
    "OP_TOLERANCE",
    "FORWARD_TOLERANCE",
    "REGULARITY_MARGIN",
    "MAX_JITTER_ATTEMPTS",
    "probe_coordinates",
    "numeric_jacobian",
    "GradStatus",
    "GradEntry",
    "GradReport",
    "compare_gradients",
    "esf_irregularities",
    "kink_branches",
    "OP_BUILDERS",
    "gradcheck_module",
]
