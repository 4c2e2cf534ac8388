# component_id: cli_main
# kind: runtime_module
# area: cli
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Command-line entry point: routes, demo, check, params and bench subcommands.

"""
mhs-scan command line.

Exit codes: 0 success, 1 check/correctness failure or library error,
2 usage error (argparse).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..errors import MhsError
from ..geometry import GridShape, RenderFormat, RouteVariant, ScanPattern, build_route, render_route
from ..logging import StructuredLogger, configure, make_console_logger
from ..module import forward_with_trace, gate_zero_fraction, init_weights, load_config, load_weights, param_breakdown, save_weights
from .bench import MIN_REPS, BenchStrategy, run_bench
from .checks import CheckScope, CheckStatus, run_checks

LOGGER_NAME = "mhs_scan.cli"
logger = logging.getLogger(LOGGER_NAME)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(x * x)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_routes(args: argparse.Namespace, out: StructuredLogger) -> int:
    route = build_route(args.pattern, args.variant, GridShape(args.H, args.W))
    sys.stdout.write(render_route(route, args.format))
    return EXIT_OK


def cmd_demo(args: argparse.Namespace, out: StructuredLogger) -> int:
    config = load_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    weights = load_weights(args.weights, config) if args.weights else init_weights(config, seed)
    if args.save_weights:
        save_weights(weights, args.save_weights, storage=args.storage)

    shape = (args.B, args.H, args.W, config.c_l)
    if args.constant is not None:
        X = np.full(shape, args.constant)
    else:
        X = np.random.default_rng([seed, 2]).standard_normal(shape)

    started = time.perf_counter()
    Y, trace = forward_with_trace(X, weights, config, workers=args.threads)
    elapsed = time.perf_counter() - started

    heads: List[Dict[str, Any]] = []
    for h, head in enumerate(trace.heads):
        heads.append(
            {
                "head": h,
                "pattern": config.patterns[h].value,
                "section_norms": [_norm(head.sections[:, k]) for k in range(config.k_routes)],
                "fused_norm": _norm(head.fused),
                "gate_zero_fraction": gate_zero_fraction(head),
            }
        )
    out.log(
        {
            "command": "demo",
            "seed": seed,
            "input_shape": list(X.shape),
            "output_shape": list(Y.shape),
            "esf_scheme": config.esf.name.value,
            "heads": heads,
            "output_norm": _norm(Y),
            "wall_time": {"forward_seconds": elapsed},
        }
    )
    return EXIT_OK


def cmd_check(args: argparse.Namespace, out: StructuredLogger) -> int:
    results = run_checks(args.scope)
    for result in results:
        print(result.line())
    counts = {status: sum(r.status is status for r in results) for status in CheckStatus}
    print(
        f"{counts[CheckStatus.PASS]} passed, {counts[CheckStatus.FAIL]} failed, "
        f"{counts[CheckStatus.INCONCLUSIVE]} inconclusive"
    )
    return EXIT_FAILURE if counts[CheckStatus.FAIL] else EXIT_OK


def cmd_params(args: argparse.Namespace, out: StructuredLogger) -> int:
    config = load_config(args.config)
    breakdown = param_breakdown(config)
    if args.json:
        out.log({"command": "params", "n_heads": config.n_heads, "subspace_dim": config.subspace_dim, **breakdown.as_dict()})
        return EXIT_OK
    rows = [
        ("head projections", breakdown.head_projection),
        ("ssm (all heads)", breakdown.ssm),
        ("ssm (per head)", breakdown.per_head_ssm),
        ("esf", breakdown.esf),
        ("layer norm", breakdown.layer_norm),
        ("tail projection", breakdown.tail),
        ("total", breakdown.total),
    ]
    print(f"c_l={config.c_l} n_heads={config.n_heads} subspace_dim={config.subspace_dim}")
    for label, count in rows:
        print(f"{label:<18} {count:>12,d}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, out: StructuredLogger) -> int:
    if args.strategy == "both":
        strategies = list(BenchStrategy)
    else:
        strategies = [BenchStrategy(args.strategy)]
    results = run_bench(strategies, args.H, args.W, args.S, args.reps, seed=args.seed, pattern=args.pattern)
    out.log(
        {
            "command": "bench",
            "pattern": ScanPattern(args.pattern).value,
            "seed": args.seed,
            "checksums_match": True,
            "results": [r.as_dict() for r in results],
        }
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mhs-scan", description="Multi-head scan module tools.")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Diagnostic log level (stderr).",
    )
    parser.add_argument("--jsonl", default=None, help="Append every JSON record to this run log.")
    sub = parser.add_subparsers(dest="command", required=True)

    routes = sub.add_parser("routes", help="Render a scan route.")
    routes.add_argument("pattern", choices=[p.value for p in ScanPattern])
    routes.add_argument("variant", type=int, choices=[int(v) for v in RouteVariant])
    routes.add_argument("H", type=_positive_int)
    routes.add_argument("W", type=_positive_int)
    routes.add_argument("--format", default=RenderFormat.ASCII.value, choices=[f.value for f in RenderFormat])
    routes.set_defaults(handler=cmd_routes)

    demo = sub.add_parser("demo", help="Run the module forward on seeded input and report statistics.")
    demo.add_argument("config", help="Config file (JSON or YAML).")
    demo.add_argument("--seed", type=int, default=None, help="Defaults to the config seed.")
    demo.add_argument("--H", type=_positive_int, default=8)
    demo.add_argument("--W", type=_positive_int, default=8)
    demo.add_argument("--B", type=_positive_int, default=1)
    demo.add_argument("--threads", type=_positive_int, default=1, help="Worker threads for the heads.")
    demo.add_argument("--constant", type=float, default=None, help="Fill the input with this value.")
    demo.add_argument("--weights", default=None, help="Load weights from a container instead of seeding them.")
    demo.add_argument("--save-weights", default=None, help="Write the weights used to this container.")
    demo.add_argument("--storage", default="f64", choices=["f64", "f32"])
    demo.set_defaults(handler=cmd_demo)

    check = sub.add_parser("check", help="Run the property suites.")
    check.add_argument("scope", nargs="?", default=CheckScope.ALL.value, choices=[s.value for s in CheckScope])
    check.set_defaults(handler=cmd_check)

    params = sub.add_parser("params", help="Itemized parameter counts for a config.")
    params.add_argument("config")
    params.add_argument("--json", action="store_true", help="Emit JSON instead of a table.")
    params.set_defaults(handler=cmd_params)

    bench = sub.add_parser("bench", help="Gather/scatter throughput benchmark.")
    bench.add_argument("--strategy", default="both", choices=[s.value for s in BenchStrategy] + ["both"])
    bench.add_argument("--H", type=_positive_int, default=64)
    bench.add_argument("--W", type=_positive_int, default=64)
    bench.add_argument("--S", type=_positive_int, default=32)
    bench.add_argument("--reps", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--pattern", default=ScanPattern.SNAKE.value, choices=[p.value for p in ScanPattern])
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.reps < MIN_REPS:
        parser.error(f"--reps must be >= {MIN_REPS}")
    configure(args.log_level)

    out = make_console_logger(jsonl_path=args.jsonl)
    try:
        return args.handler(args, out)
    except MhsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    finally:
        out.close()


def entrypoint() -> None:
    sys.exit(main())


__all__ = ["build_parser", "main", "entrypoint", "EXIT_OK", "EXIT_FAILURE", "EXIT_USAGE"]
