# component_id: cli_pkg_init
# kind: code
# area: cli
# status: stable
# purpose: Package initialization for the command-line surface.

from .bench import BenchResult, BenchStrategy, run_bench
from .checks import CheckResult, CheckScope, CheckStatus, run_checks
from .main import build_parser, entrypoint, main

__all__ = [
    "BenchResult",
    "BenchStrategy",
    "run_bench",
    "CheckResult",
    "CheckScope",
    "CheckStatus",
    "run_checks",
    "build_parser",
    "entrypoint",
    "main",
]
